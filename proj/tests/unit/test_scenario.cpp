// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rooflinesim/error.hpp"
#include "rooflinesim/scenario.hpp"
#include "rooflinesim/service.hpp"
#include "support/fixtures.hpp"

using namespace rooflinesim;
using nlohmann::json;

namespace
{

std::string slurp(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string preset(const std::string &name)
{
    return slurp(std::string(ROOFLINESIM_CONFIG_DIR) + "/" + name + ".json");
}

json preset_json(const std::string &name)
{
    return json::parse(preset(name));
}

Error parse_failure(const std::string &text)
{
    try
    {
        parse_scenario(text, testsupport::builtin());
    }
    catch (const Error &e)
    {
        return e;
    }
    FAIL("expected a parse failure");
    return Error(ErrorKind::Precondition, "");
}

std::vector<std::vector<std::string>> csv_rows(const std::string &text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
    {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::size_t column(const std::vector<std::string> &header, const std::string &name)
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    FAIL("missing column " << name);
    return 0;
}

void check_six_digits(const json &j)
{
    if (j.is_number_float())
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", j.get<double>());
        CHECK(std::strtod(buf, nullptr) == j.get<double>());
    }
    else if (j.is_structured())
        for (const auto &v : j)
            check_six_digits(v);
}

}  // namespace

TEST_CASE("sha256")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config hash is canonical")
{
    const std::string a = R"({"b": 1, "a": {"y": 2, "x": [1, 2]}})";
    const std::string b = "{\n  \"a\": {\"x\": [1,2], \"y\": 2},\n  \"b\": 1\n}";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(R"({"b": 2, "a": {"y": 2, "x": [1, 2]}})"));

    const std::string text = preset("dense-on-hbm");
    const ScenarioConfig c = parse_scenario(text, testsupport::builtin());
    CHECK(c.config_hash == config_hash(text));
    const json report = json::parse(render_estimate(c, ReportFormat::Json));
    CHECK(report["config_hash"] == config_hash(text));
    CHECK(report["tool"]["version"] == "0.1.0");
}

TEST_CASE("scenario parsing")
{
    const auto &cat = testsupport::builtin();
    const ScenarioConfig c = parse_scenario(preset("dense-on-hbm"), cat);
    CHECK(c.name == "dense-on-hbm");
    CHECK(c.model.layers == 32);
    CHECK(c.model.n_kv_heads == 8);
    CHECK(c.request.input_len == 2048);
    CHECK(c.node == cat.node("hbm8"));
    CHECK(c.plan);
    CHECK(!c.explore);
    CHECK(c.topology.link_bw == 100e9);
    CHECK(c.topology.per_message_overhead == doctest::Approx(1e-6));

    json inline_node = preset_json("dense-on-hbm");
    inline_node["node"] = json{{"name", "custom"},
                               {"peak_tflops", 100},
                               {"chip_power_w", 100},
                               {"tiers", json::array({{{"device", "HBM4"}, {"stack_count", 2}}})}};
    const ScenarioConfig ic = parse_scenario(inline_node.dump(), cat);
    CHECK(ic.node.name == "custom");
    CHECK(ic.node.peak_flops == 100e12);

    json explore = preset_json("dense-explore");
    const ScenarioConfig ec = parse_scenario(explore.dump(), cat);
    REQUIRE(ec.explore);
    CHECK(ec.explore->budget == 64);
    CHECK(ec.explore->objectives == std::vector<Objective>{Objective::TimeToCompletion, Objective::UsdPerToken});
}

TEST_CASE("scenario errors name the field")
{
    json base = preset_json("dense-on-hbm");
    auto with = [&](auto edit) {
        json j = base;
        edit(j);
        return parse_failure(j.dump());
    };

    Error e = with([](json &j) { j.erase("model"); });
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(e.field() == "model");

    e = with([](json &j) { j["request"]["bacth"] = 4; });
    CHECK(e.field() == "request.bacth");

    e = with([](json &j) { j["model"]["layers"] = "many"; });
    CHECK(e.field() == "model.layers");

    e = with([](json &j) { j["model"]["layers"] = 0; });
    CHECK(e.field() == "model.layers");

    e = with([](json &j) { j["topology"]["kind"] = "ring"; });
    CHECK(e.field() == "topology.kind");

    e = with([](json &j) { j["explore"] = json::object(); });
    CHECK(e.field() == "explore");

    e = with([](json &j) { j.erase("sharding"); });
    CHECK(e.field() == "sharding");

    e = with([](json &j) { j["sharding"]["placement"]["weights"] = "HBF"; });
    CHECK(e.kind() == ErrorKind::UnknownTier);
    CHECK(e.field() == "sharding.placement.weights");

    e = with([](json &j) { j["sharding"]["placement"].erase("kv_cache"); });
    CHECK(e.kind() == ErrorKind::MissingPlacement);
    CHECK(e.field() == "sharding.placement.kv_cache");

    e = with([](json &j) { j["node"] = "tpu9000"; });
    CHECK(e.kind() == ErrorKind::UnknownName);
    CHECK(e.field() == "node");

    e = with([](json &j) { j["cost_model"]["lifetime_hours"] = 0; });
    CHECK(e.kind() == ErrorKind::ZeroLifetime);

    e = with([](json &j) { j["topology"]["link_bw_gbps"] = 0; });
    CHECK(e.field() == "topology.link_bw_gbps");

    e = with([](json &j) { j["topology"]["link_bw_bytes_per_s"] = 1e9; });
    CHECK(e.field() == "topology.link_bw_gbps");  // the conflicting key

    e = with([](json &j) { j["overrides"]["overlap"] = 2; });
    CHECK(e.field() == "overrides.overlap");

    e = parse_failure("{\"model\": ");
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);

    CHECK(exit_code(e) == 2);
    CHECK(exit_code(UnsatisfiableError("x", {})) == 3);
}

TEST_CASE("estimate report")
{
    const auto &cat = testsupport::builtin();
    const std::string text = preset("dense-on-hbm");
    const std::string first = run_scenario(text, cat, ReportFormat::Json);
    for (int i = 0; i < 3; ++i)
        CHECK(run_scenario(text, cat, ReportFormat::Json) == first);

    const json r = json::parse(first);
    check_six_digits(r);
    CHECK(r["phases"]["decode_first"]["bottleneck"] == "MemoryBandwidth");
    CHECK(r["phases"]["prefill"]["bottleneck"] == "Compute");
    CHECK(r["phases"]["decode_last"].is_object());
    CHECK(r["phases"]["prefill"]["bytes"].is_number_unsigned());
    CHECK(r["memory_per_chip_bytes"]["weights"].is_number_unsigned());
    CHECK(r["feasibility"]["feasible"] == true);
    CHECK(r["bottleneck_matrix"]["decode"]["memory_bandwidth"] == "✓");
    CHECK(r["plan"]["placement"]["activations"] == "HBM4");

    const std::string md = run_scenario(text, cat, ReportFormat::Markdown);
    CHECK(md.find("| Decode |  | ✓ |") != std::string::npos);
    CHECK(md.find("| Prefill |  |  |  | ✓ |") != std::string::npos);

    const auto rows = csv_rows(run_scenario(text, cat, ReportFormat::Csv));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].size() == rows[1].size());

    // No generated tokens: no last decode step.
    json j = json::parse(text);
    j["request"]["output_len"] = 0;
    CHECK(json::parse(run_scenario(j.dump(), cat, ReportFormat::Json))["phases"]["decode_last"].is_null());
}

TEST_CASE("bottleneck rows for the presets")
{
    const auto &cat = testsupport::builtin();
    const json moe = json::parse(run_scenario(preset("moe-256-on-hbm"), cat, ReportFormat::Json));
    const json &d = moe["bottleneck_matrix"]["decode"];
    CHECK(d["memory_capacity"] == "✓");
    CHECK(d["memory_bandwidth"] == "✓");
    CHECK(d["interconnect_latency"] == "✓");
    CHECK(d["compute"] == "");

    const json hbf = json::parse(run_scenario(preset("moe-256-with-hbf"), cat, ReportFormat::Json));
    CHECK(hbf["plan"]["chips"] == 1);
    CHECK(hbf["bottleneck_matrix"]["decode"]["memory_capacity"] == "");
    CHECK(hbf["bottleneck_matrix"]["decode"]["interconnect_latency"] == "");

    const json reasoning = json::parse(run_scenario(preset("reasoning-long-context"), cat, ReportFormat::Json));
    CHECK(reasoning["bottleneck_matrix"]["decode"]["memory_bandwidth"] == "✓");
    CHECK(reasoning["bottleneck_matrix"]["decode"]["interconnect_latency"] != "");
}

TEST_CASE("kv on flash is unsatisfiable")
{
    try
    {
        run_scenario(preset("kv-on-hbf"), testsupport::builtin(), ReportFormat::Json);
        FAIL("expected Unsatisfiable");
    }
    catch (const UnsatisfiableError &e)
    {
        CHECK(exit_code(e) == 3);
        const json body = json::parse(render_error(e));
        CHECK(body["error"]["kind"] == "Unsatisfiable");
        CHECK(body["feasibility"]["feasible"] == false);
        CHECK(body["feasibility"]["violations"][0]["kind"] == "endurance");
        CHECK(body["feasibility"]["violations"][0]["tier"] == "HBF");
    }
}

TEST_CASE("explore report")
{
    const auto &cat = testsupport::builtin();
    const std::string text = preset("dense-explore");
    const std::string out = run_scenario(text, cat, ReportFormat::Json);
    CHECK(run_scenario(text, cat, ReportFormat::Json) == out);
    const json r = json::parse(out);
    REQUIRE(r["pareto"].is_array());
    REQUIRE(!r["pareto"].empty());
    for (std::size_t i = 1; i < r["pareto"].size(); ++i)
        CHECK(r["pareto"][i - 1]["objectives"]["time_to_completion"].get<double>() <=
              r["pareto"][i]["objectives"]["time_to_completion"].get<double>());

    const auto rows = csv_rows(run_scenario(text, cat, ReportFormat::Csv));
    CHECK(rows.size() == r["pareto"].size() + 1);
    CHECK(rows[0][0] == "chips");

    json one = json::parse(text);
    one["explore"]["budget"] = 1;
    one["model"]["layers"] = 2;
    one["model"]["vocab"] = 1000;
    CHECK(json::parse(run_scenario(one.dump(), cat, ReportFormat::Json))["pareto"].size() == 1);
}

TEST_CASE("sweeps")
{
    const auto &cat = testsupport::builtin();
    const std::string text = preset("dense-on-hbm");

    auto rows = csv_rows(render_sweep(text, cat, "request.batch", {"1", "2", "4", "8"}));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0][0] == "request.batch");
    const std::size_t ai = column(rows[0], "decode_arithmetic_intensity");
    for (std::size_t i = 2; i < rows.size(); ++i)
        CHECK(std::stod(rows[i][ai]) > std::stod(rows[i - 1][ai]));
    CHECK(rows[1][0] == "1");
    CHECK(rows[4][0] == "8");

    // Bare key resolves when it is unique.
    CHECK(render_sweep(text, cat, "batch", {"1", "2"}) == render_sweep(text, cat, "request.batch", {"1", "2"}));

    rows = csv_rows(render_sweep(text, cat, "batch", {}));
    CHECK(rows.size() == 1);

    rows = csv_rows(render_sweep(text, cat, "node.tiers[0].device.read_bw_bytes_per_s",
                                 {"1e11", "5e11", "1e12", "1.638e12", "4e12", "1e13"}));
    REQUIRE(rows.size() == 7);
    const std::size_t step = column(rows[0], "decode_step_s");
    for (std::size_t i = 2; i < rows.size(); ++i)
        CHECK(std::stod(rows[i][step]) <= std::stod(rows[i - 1][step]));

    // An infeasible point stays in the table, flagged.
    rows = csv_rows(render_sweep(text, cat, "request.batch", {"1", "100000"}));
    REQUIRE(rows.size() == 3);
    const std::size_t feasible = column(rows[0], "feasible");
    CHECK(rows[1][feasible] == "true");
    CHECK(rows[2][feasible] == "false");

    for (const char *bad : {"request.nope", "model", "layers_count", "node.tiers[9].stack_count"})
    {
        try
        {
            render_sweep(text, cat, bad, {"1"});
            FAIL("expected UnknownAxis for " << bad);
        }
        catch (const Error &e)
        {
            CHECK(e.kind() == ErrorKind::UnknownAxis);
            CHECK(exit_code(e) == 2);
        }
    }
    // d_model occurs once, but "stack_count" would too: ambiguity needs two hits.
    json two = json::parse(text);
    two["node"] = json{{"name", "twin"},
                       {"peak_tflops", 100},
                       {"chip_power_w", 100},
                       {"tiers", json::array({{{"device", "HBM4"}, {"stack_count", 2}},
                                              {{"device", "DDR5"}, {"stack_count", 2}}})}};
    CHECK_THROWS_AS(render_sweep(two.dump(), cat, "stack_count", {"1"}), Error);
    CHECK_THROWS_AS(render_sweep(text, cat, "batch", {"four"}), Error);
}

TEST_CASE("trend report")
{
    const std::string csv = slurp(std::string(ROOFLINESIM_DATA_DIR) + "/ddr_price_history.csv");
    const auto points = ingest_price_history(csv).points;
    const json r = json::parse(render_trend(points, 2022, 2025, TrendSeries::Capacity, ReportFormat::Json));
    CHECK(r["window_factor"].get<double>() >= 0.45);
    CHECK(r["window_factor"].get<double>() <= 0.65);
    CHECK(r["hbm_index_ratio"].get<double>() == doctest::Approx(1.35));

    const auto flat = ingest_price_history("year,usd_per_gb\n2020,5\n2021,5\n2022,5\n").points;
    CHECK(json::parse(render_trend(flat, 2020, 2022, TrendSeries::Capacity, ReportFormat::Json))["annual_factor"] ==
          1.0);
    const auto single = ingest_price_history("year,usd_per_gb\n2020,5\n").points;
    try
    {
        render_trend(single, 2020, 2022, TrendSeries::Capacity, ReportFormat::Json);
        FAIL("expected InsufficientData");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::InsufficientData);
        CHECK(exit_code(e) == 2);
    }
    CHECK(csv_rows(render_trend(points, 2022, 2025, TrendSeries::Capacity, ReportFormat::Csv)).size() == 2);
}

TEST_CASE("service routing")
{
    const auto &cat = testsupport::builtin();
    auto health = handle_request("GET", "/health", "", cat);
    CHECK(health.status == 200);
    CHECK(json::parse(health.body)["status"] == "ok");

    auto catalog = handle_request("GET", "/catalog", "", cat);
    CHECK(catalog.status == 200);
    CHECK(load_catalog(catalog.body) == cat);

    const std::string golden = preset("dense-on-hbm");
    auto est = handle_request("POST", "/estimate", golden, cat);
    CHECK(est.status == 200);
    CHECK(est.body == run_scenario(golden, cat, ReportFormat::Json));

    json missing = json::parse(golden);
    missing.erase("model");
    auto bad = handle_request("POST", "/estimate", missing.dump(), cat);
    CHECK(bad.status == 400);
    CHECK(json::parse(bad.body)["error"]["field"] == "model");

    auto unsat = handle_request("POST", "/estimate", preset("kv-on-hbf"), cat);
    CHECK(unsat.status == 422);
    CHECK(json::parse(unsat.body)["feasibility"]["violations"][0]["kind"] == "endurance");

    const std::string ex = preset("dense-explore");
    auto pareto = handle_request("POST", "/explore", ex, cat);
    CHECK(pareto.status == 200);
    CHECK(pareto.body == run_scenario(ex, cat, ReportFormat::Json));
    CHECK(handle_request("POST", "/explore", golden, cat).status == 400);
    CHECK(handle_request("POST", "/estimate", ex, cat).status == 400);

    CHECK(handle_request("GET", "/estimate", "", cat).status == 405);
    CHECK(handle_request("GET", "/nowhere", "", cat).status == 404);
    CHECK(handle_request("POST", "/estimate", "not json", cat).status == 400);
}
