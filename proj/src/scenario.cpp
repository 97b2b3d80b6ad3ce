// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/scenario.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "catalog_json.hpp"
#include "json_fields.hpp"
#include "rooflinesim/error.hpp"
#include "rooflinesim/units.hpp"

#ifndef ROOFLINESIM_VERSION
#define ROOFLINESIM_VERSION "0.0.0"
#endif

namespace rooflinesim
{

using detail::config_error;
using detail::json;
using detail::ObjectReader;
using ojson = nlohmann::ordered_json;

namespace
{

// ---------------------------------------------------------------- parsing

ModelSpec parse_model(const json &j)
{
    ObjectReader r(j, "model");
    ModelSpec m;
    if (r.has("name"))
        r.string("name");
    m.layers = r.count("layers");
    m.d_model = r.count("d_model");
    m.n_heads = r.count("n_heads");
    m.n_kv_heads = r.count_or("n_kv_heads", m.n_heads);
    m.d_head = r.has("d_head") ? r.count("d_head") : (m.n_heads ? m.d_model / m.n_heads : 0);
    m.ffn_dim = r.count("ffn_dim");
    m.vocab = r.count("vocab");
    m.dtype_bytes = r.count_or("dtype_bytes", 2);
    m.gated = r.boolean_or("gated", true);
    if (const json *moe = r.find("moe"); moe && !moe->is_null())
    {
        ObjectReader mr(*moe, r.sub("moe"));
        MoeSpec s;
        s.n_experts = mr.count("n_experts");
        s.top_k = mr.count("top_k");
        s.shared_ffn_dim = mr.count_or("shared_ffn_dim", 0);
        mr.reject_unknown();
        m.moe = s;
    }
    r.reject_unknown();
    validate(m);
    return m;
}

RequestSpec parse_request(const json &j)
{
    ObjectReader r(j, "request");
    RequestSpec q;
    q.input_len = r.count_or("input_len", 1);
    q.output_len = r.count_or("output_len", 0);
    q.thought_len = r.count_or("thought_len", 0);
    q.batch = r.count_or("batch", 1);
    if (auto rag = r.quantity_opt("rag_corpus",
                                  {{"_bytes", 1.0}, {"_gb", units::kGB}, {"_gib", static_cast<double>(units::kGiB)}}))
        q.rag_corpus_bytes = detail::to_bytes(*rag, r.sub("rag_corpus"));
    q.modality_flops_multiplier = r.number_or("modality_flops_multiplier", 1.0);
    q.compute_only = r.boolean_or("compute_only", false);
    r.reject_unknown();
    validate(q);
    return q;
}

NodeSpec parse_node_ref(const json &j, const Catalog &catalog)
{
    if (j.is_string())
    {
        const std::string name = j.get<std::string>();
        auto it = catalog.nodes().find(name);
        if (it == catalog.nodes().end())
            fail(ErrorKind::UnknownName, "node: unknown node '" + name + "'", "node");
        return it->second;
    }
    return parse_node(j, "node", catalog.devices());
}

Topology parse_topology(const json &j)
{
    ObjectReader r(j, "topology");
    Topology t;
    const std::string kind = r.has("kind") ? r.string("kind") : "fully_connected";
    if (kind == "fully_connected")
        t.kind = FullyConnected{};
    else if (kind == "torus")
    {
        Torus torus;
        if (const json *dims = r.find("dims"))
        {
            if (!dims->is_array())
                config_error(r.sub("dims"), "expected an array");
            for (std::size_t i = 0; i < dims->size(); ++i)
            {
                const json &d = (*dims)[i];
                if (!d.is_number_unsigned())
                    config_error(detail::index_path(r.sub("dims"), i), "expected a positive integer");
                torus.dims.push_back(d.get<std::uint64_t>());
            }
        }
        torus.ndims = static_cast<std::uint32_t>(r.count_or("ndims", torus.dims.empty() ? 2 : torus.dims.size()));
        t.kind = torus;
    }
    else if (kind == "tree")
        t.kind = Tree{r.count_or("fanout", 2), static_cast<std::uint32_t>(r.count_or("levels", 0))};
    else if (kind == "dragonfly")
        t.kind = Dragonfly{r.count_or("groups", 1), r.count_or("per_group", 1)};
    else
        config_error(r.sub("kind"), "unknown topology '" + kind + "' (fully_connected, torus, tree, dragonfly)");

    if (auto bw = r.quantity_opt("link_bw", {{"_bytes_per_s", 1.0}, {"_gbps", units::kGB}}))
        t.link_bw = *bw;
    if (auto v = r.quantity_opt("per_hop_latency", {{"_s", 1.0}, {"_ns", units::kNano}, {"_us", units::kMicro}}))
        t.per_hop_latency = *v;
    if (auto v = r.quantity_opt("per_message_overhead", {{"_s", 1.0}, {"_ns", units::kNano}, {"_us", units::kMicro}}))
        t.per_message_overhead = *v;
    t.in_network_collectives = r.boolean_or("in_network_collectives", false);
    t.overhead_reduction = r.number_or("overhead_reduction", 0.0);
    t.moe_skew = r.number_or("moe_skew", 1.0);
    r.reject_unknown();
    validate(t);
    return t;
}

Placement parse_placement(const json &j, const std::string &path)
{
    ObjectReader r(j, path);
    Placement p;
    for (DataClass c : {DataClass::Weights, DataClass::KvCache, DataClass::SlowContext})
    {
        const std::string key(to_string(c));
        if (r.has(key))
            p[c] = r.string(key);
    }
    if (r.has("activations"))
        config_error(r.sub("activations"), "activations are placed automatically");
    r.reject_unknown();
    return p;
}

ShardingPlan parse_plan(const json &j)
{
    ObjectReader r(j, "sharding");
    ShardingPlan p;
    p.tp = r.count_or("tp", 1);
    p.pp = r.count_or("pp", 1);
    p.ep = r.count_or("ep", 1);
    p.dp = r.count_or("dp", 1);
    for (const char *k : {"tp", "pp", "ep", "dp"})
        if (r.has(k) && r.count(k) == 0)
            config_error(r.sub(k), "must be >= 1");
    if (const json *pl = r.find("placement"))
        p.placement = parse_placement(*pl, r.sub("placement"));
    p.shared_context = r.boolean_or("shared_context", false);
    r.reject_unknown();
    return p;
}

ExploreSpec parse_explore(const json &j)
{
    ObjectReader r(j, "explore");
    ExploreSpec e;
    e.budget = r.count_or("budget", e.budget);
    if (e.budget < 1 || e.budget > kMaxBudget)
        config_error(r.sub("budget"), "must be in [1, 4096]");
    if (const json *objs = r.find("objectives"))
    {
        if (!objs->is_array() || objs->empty())
            config_error(r.sub("objectives"), "expected a non-empty array");
        e.objectives.clear();
        for (std::size_t i = 0; i < objs->size(); ++i)
        {
            const json &o = (*objs)[i];
            auto parsed = o.is_string() ? parse_objective(o.get<std::string>()) : std::nullopt;
            if (!parsed)
                config_error(detail::index_path(r.sub("objectives"), i),
                             "unknown objective (time_to_completion, ttft, usd_per_token, joules_per_token, "
                             "co2e_per_token, chips)");
            e.objectives.push_back(*parsed);
        }
    }
    if (const json *pl = r.find("placement"))
        e.pins = parse_placement(*pl, r.sub("placement"));
    e.shared_context = r.boolean_or("shared_context", false);
    r.reject_unknown();
    return e;
}

CostModel parse_cost(const json &j)
{
    ObjectReader r(j, "cost_model");
    CostModel c;
    c.electricity_usd_per_kwh = r.number_or("electricity_usd_per_kwh", c.electricity_usd_per_kwh);
    c.pue = r.number_or("pue", c.pue);
    c.grid_intensity_g_per_kwh = r.number_or("grid_intensity_g_per_kwh", c.grid_intensity_g_per_kwh);
    c.lifetime_hours = r.number_or("lifetime_hours", c.lifetime_hours);
    c.embodied_kg_per_chip = r.number_or("embodied_kg_per_chip", c.embodied_kg_per_chip);
    c.embodied_kg_per_memory_gb = r.number_or("embodied_kg_per_memory_gb", c.embodied_kg_per_memory_gb);
    r.reject_unknown();
    validate(c);
    return c;
}

EngineKnobs parse_knobs(const json &j)
{
    ObjectReader r(j, "overrides");
    EngineKnobs k;
    k.compute_utilization = r.number_or("compute_utilization", k.compute_utilization);
    k.memory_utilization = r.number_or("memory_utilization", k.memory_utilization);
    k.overlap = r.number_or("overlap", k.overlap);
    r.reject_unknown();
    validate(k);
    return k;
}

ScenarioConfig parse_document(const json &doc, const Catalog &catalog)
{
    ObjectReader r(doc, "");
    ScenarioConfig c;
    if (r.has("name"))
        c.name = r.string("name");
    if (r.has("description"))
        r.string("description");
    c.model = parse_model(r.at("model"));
    if (c.name.empty())
        if (const json *mn = doc.at("model").is_object() ? &doc.at("model") : nullptr; mn && mn->contains("name"))
            c.name = mn->at("name").get<std::string>();
    c.request = r.has("request") ? parse_request(r.at("request")) : RequestSpec{};
    c.node = parse_node_ref(r.at("node"), catalog);
    if (r.has("topology"))
        c.topology = parse_topology(r.at("topology"));
    const bool has_plan = r.has("sharding"), has_explore = r.has("explore");
    if (has_plan == has_explore)
        config_error(has_plan ? "explore" : "sharding", "exactly one of 'sharding' and 'explore' is required");
    if (has_plan)
        c.plan = parse_plan(r.at("sharding"));
    else
        c.explore = parse_explore(r.at("explore"));
    if (r.has("cost_model"))
        c.cost = parse_cost(r.at("cost_model"));
    if (r.has("overrides"))
        c.knobs = parse_knobs(r.at("overrides"));
    r.reject_unknown();

    // Placement references must name tiers of the chosen node.
    const Placement &pl = c.plan ? c.plan->placement : c.explore->pins;
    const std::string base = c.plan ? "sharding.placement." : "explore.placement.";
    for (DataClass k : {DataClass::Weights, DataClass::KvCache, DataClass::SlowContext})
        if (pl[k] && !c.node.find_tier(*pl[k]))
            fail(ErrorKind::UnknownTier, "node '" + c.node.name + "' has no tier '" + *pl[k] + "'",
                 base + std::string(to_string(k)));
    if (c.plan)
        resolve_placement(c.plan->placement, c.model, c.request, c.node);
    return c;
}

// ---------------------------------------------------------------- output

// Six significant digits; non-finite values become null.
ojson sig6(double x)
{
    if (!std::isfinite(x))
        return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

ojson opt6(const std::optional<double> &x)
{
    return x ? sig6(*x) : ojson(nullptr);
}

std::uint64_t whole(double x)
{
    return x <= 0 ? 0 : static_cast<std::uint64_t>(std::llround(std::min(x, 9.2e18)));
}

std::string fmt6(double x)
{
    if (!std::isfinite(x))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string fmt_opt(const std::optional<double> &x)
{
    return x ? fmt6(*x) : "";
}

ojson tool_json()
{
    return ojson{{"name", "rooflinesim"}, {"version", std::string(tool_version())}};
}

ojson placement_json(const Placement &p)
{
    ojson o = ojson::object();
    for (DataClass c : {DataClass::Weights, DataClass::KvCache, DataClass::SlowContext, DataClass::Activations})
        o[std::string(to_string(c))] = p[c] ? ojson(*p[c]) : ojson(nullptr);
    return o;
}

ojson plan_json(const ShardingPlan &p)
{
    return ojson{{"tp", p.tp},
                 {"pp", p.pp},
                 {"ep", p.ep},
                 {"dp", p.dp},
                 {"chips", p.chips()},
                 {"shared_context", p.shared_context},
                 {"placement", placement_json(p.placement)}};
}

ojson phase_json(const PhaseEstimate &e)
{
    return ojson{{"phase", std::string(to_string(e.phase))},
                 {"compute_s", sig6(e.compute_time)},
                 {"memory_s", sig6(e.memory_time)},
                 {"network_s", sig6(e.network_time)},
                 {"step_s", sig6(e.step_time)},
                 {"arithmetic_intensity", sig6(e.arithmetic_intensity)},
                 {"flops", sig6(e.flops)},
                 {"bytes", whole(e.bytes)},
                 {"bottleneck", std::string(to_string(e.bottleneck))}};
}

ojson timing_json(const ScenarioTiming &t)
{
    return ojson{{"ttft_s", sig6(t.ttft)},
                 {"time_to_completion_s", sig6(t.time_to_completion)},
                 {"decode_tokens_per_second", sig6(t.decode_tokens_per_second)},
                 {"energy_per_token_j", sig6(t.energy_per_token)}};
}

ojson cost_json(const CostReport &c)
{
    return ojson{{"system_power_w", sig6(c.system_power_watts)},
                 {"tco_usd_per_hour", sig6(c.tco_rate)},
                 {"tokens_per_usd", opt6(c.tokens_per_usd)},
                 {"tokens_per_joule", opt6(c.tokens_per_joule)},
                 {"co2e_g_per_token", opt6(c.co2e_per_token)}};
}

ojson feasibility_json(const FeasibilityReport &r)
{
    ojson v = ojson::array();
    for (const auto &x : r.violations)
        v.push_back(ojson{{"kind", std::string(to_string(x.kind))},
                          {"detail", x.detail},
                          {"tier", x.tier.empty() ? ojson(nullptr) : ojson(x.tier)}});
    return ojson{{"feasible", r.feasible}, {"violations", v}};
}

ojson row_json(const BottleneckRow &row, Bottleneck label)
{
    return ojson{{"memory_capacity", std::string(to_symbol(row.capacity))},
                 {"memory_bandwidth", std::string(to_symbol(row.bandwidth))},
                 {"interconnect_latency", std::string(to_symbol(row.interconnect))},
                 {"compute", std::string(to_symbol(row.compute))},
                 {"label", std::string(to_string(label))}};
}

std::string dump(const ojson &j)
{
    return j.dump(2) + "\n";
}

// Everything a single-plan report needs, computed once.
struct Estimate
{
    ShardingPlan plan;
    FeasibilityReport feasibility;
    ShardLayout layout;
    PhaseEstimate prefill;
    PhaseEstimate decode_first;
    std::optional<PhaseEstimate> decode_last;
    ScenarioTiming timing;
    double throughput = 0;
    CostReport cost;
    bool capacity_pressure = false;
    BottleneckRow prefill_row;
    BottleneckRow decode_row;
};

Estimate estimate(const ScenarioConfig &c)
{
    require(c.plan.has_value(), "scenario has no explicit sharding plan", "sharding");
    Estimate e;
    e.feasibility = check_feasible(*c.plan, c.model, c.request, c.node);
    if (!e.feasibility.feasible)
        throw UnsatisfiableError("sharding plan is infeasible: " + e.feasibility.violations.front().detail,
                                 e.feasibility);

    const Candidate cand = evaluate_plan(c.model, c.request, c.node, *c.plan, c.topology, c.knobs, c.cost, {});
    e.plan = cand.plan;
    e.timing = cand.timing;
    e.throughput = cand.system_tokens_per_second;
    e.cost = cand.cost;

    const PhaseModel pm(c.model, c.request, SystemSetup{c.node, e.plan, c.topology, c.knobs});
    e.layout = pm.layout();
    e.prefill = pm.prefill();
    e.decode_first = pm.decode_step(c.request.input_len);
    const std::uint64_t generated = c.request.thought_len + c.request.output_len;
    if (generated > 0)
        e.decode_last = pm.decode_step(c.request.input_len + generated - 1);

    ShardingPlan single = *c.plan;
    single.tp = single.pp = single.ep = single.dp = 1;
    const FeasibilityReport one_chip = check_feasible(single, c.model, c.request, c.node);
    for (const auto &v : one_chip.violations)
        e.capacity_pressure |= v.kind == ViolationKind::Capacity;

    e.prefill_row = classify(e.prefill, e.capacity_pressure);
    // The largest context is the step under the most pressure.
    e.decode_row = classify(e.decode_last.value_or(e.decode_first), e.capacity_pressure);
    return e;
}

const PhaseEstimate &decode_for_row(const Estimate &e)
{
    return e.decode_last ? *e.decode_last : e.decode_first;
}

const char *kEstimateCsvHeader =
    "scenario,node,chips,tp,pp,ep,dp,feasible,prefill_step_s,prefill_bottleneck,decode_step_s,"
    "decode_arithmetic_intensity,decode_bottleneck,ttft_s,time_to_completion_s,system_tokens_per_second,"
    "tokens_per_usd,tokens_per_joule,co2e_g_per_token";

std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s)
    {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string plan_prefix(const ScenarioConfig &c, const ShardingPlan &p)
{
    std::ostringstream os;
    os << csv_field(c.name) << ',' << csv_field(c.node.name) << ',' << p.chips() << ',' << p.tp << ',' << p.pp << ','
       << p.ep << ',' << p.dp;
    return os.str();
}

std::string estimate_csv_row(const ScenarioConfig &c, const Estimate &e)
{
    const PhaseEstimate &d = decode_for_row(e);
    std::ostringstream os;
    os << plan_prefix(c, e.plan) << ",true," << fmt6(e.prefill.step_time) << ',' << to_string(e.prefill.bottleneck)
       << ',' << fmt6(d.step_time) << ',' << fmt6(d.arithmetic_intensity) << ',' << to_string(d.bottleneck) << ','
       << fmt6(e.timing.ttft) << ',' << fmt6(e.timing.time_to_completion) << ',' << fmt6(e.throughput) << ','
       << fmt_opt(e.cost.tokens_per_usd) << ',' << fmt_opt(e.cost.tokens_per_joule) << ','
       << fmt_opt(e.cost.co2e_per_token);
    return os.str();
}

std::string infeasible_csv_row(const ScenarioConfig &c)
{
    return plan_prefix(c, *c.plan) + ",false,,,,,,,,,,,";
}

std::string md_row(const std::string &label, const BottleneckRow &row, Bottleneck b)
{
    auto cell = [](Mark m) { return std::string(to_symbol(m)); };
    return "| " + label + " | " + cell(row.capacity) + " | " + cell(row.bandwidth) + " | " + cell(row.interconnect) +
           " | " + cell(row.compute) + " | " + std::string(to_string(b)) + " |\n";
}

std::string title(const ScenarioConfig &c)
{
    return c.name.empty() ? std::string("scenario") : c.name;
}

std::string estimate_markdown(const ScenarioConfig &c, const Estimate &e)
{
    const PhaseEstimate &d = decode_for_row(e);
    std::ostringstream os;
    os << "### " << title(c) << "\n\n";
    os << c.node.name << " x " << e.plan.chips() << " (tp=" << e.plan.tp << ", pp=" << e.plan.pp
       << ", ep=" << e.plan.ep << ", dp=" << e.plan.dp << ")\n\n";
    os << "| Phase | Memory capacity | Memory bandwidth | Interconnect latency | Compute | Bottleneck |\n";
    os << "|---|---|---|---|---|---|\n";
    os << md_row("Prefill", e.prefill_row, e.prefill.bottleneck);
    os << md_row("Decode", e.decode_row, d.bottleneck);
    os << "\n| Metric | Value |\n|---|---|\n";
    os << "| TTFT (s) | " << fmt6(e.timing.ttft) << " |\n";
    os << "| Time to completion (s) | " << fmt6(e.timing.time_to_completion) << " |\n";
    os << "| Decode step (s) | " << fmt6(d.step_time) << " |\n";
    os << "| System tokens/s | " << fmt6(e.throughput) << " |\n";
    os << "| Tokens/USD | " << fmt_opt(e.cost.tokens_per_usd) << " |\n";
    os << "| Tokens/J | " << fmt_opt(e.cost.tokens_per_joule) << " |\n";
    os << "| gCO2e/token | " << fmt_opt(e.cost.co2e_per_token) << " |\n";
    os << "\n\"✓\" primary bottleneck, \"?\" derived interconnect bottleneck.\n";
    return os.str();
}

ojson estimate_json(const ScenarioConfig &c, const Estimate &e)
{
    ojson memory = ojson::object();
    for (DataClass k : {DataClass::Weights, DataClass::KvCache, DataClass::SlowContext, DataClass::Activations})
        memory[std::string(to_string(k))] = e.layout.per_chip[k];
    const PhaseEstimate &d = decode_for_row(e);
    return ojson{{"tool", tool_json()},
                 {"config_hash", c.config_hash},
                 {"scenario", c.name},
                 {"node", c.node.name},
                 {"topology", std::string(kind_name(c.topology.kind))},
                 {"plan", plan_json(e.plan)},
                 {"feasibility", feasibility_json(e.feasibility)},
                 {"memory_per_chip_bytes", memory},
                 {"phases",
                  ojson{{"prefill", phase_json(e.prefill)},
                        {"decode_first", phase_json(e.decode_first)},
                        {"decode_last", e.decode_last ? phase_json(*e.decode_last) : ojson(nullptr)}}},
                 {"timing", timing_json(e.timing)},
                 {"system_tokens_per_second", sig6(e.throughput)},
                 {"cost", cost_json(e.cost)},
                 {"bottleneck_matrix",
                  ojson{{"capacity_pressure", e.capacity_pressure},
                        {"prefill", row_json(e.prefill_row, e.prefill.bottleneck)},
                        {"decode", row_json(e.decode_row, d.bottleneck)}}}};
}

// ---------------------------------------------------------------- sweeps

struct PathStep
{
    std::string key;
    std::optional<std::size_t> index;
};

std::vector<PathStep> split_path(const std::string &axis)
{
    std::vector<PathStep> steps;
    std::size_t i = 0;
    while (i < axis.size())
    {
        std::size_t end = axis.find_first_of(".[", i);
        PathStep s{axis.substr(i, end == std::string::npos ? std::string::npos : end - i), std::nullopt};
        i = end == std::string::npos ? axis.size() : end;
        if (i < axis.size() && axis[i] == '[')
        {
            const std::size_t close = axis.find(']', i);
            if (close == std::string::npos)
                fail(ErrorKind::UnknownAxis, "malformed axis '" + axis + "'", "axis");
            s.index = std::stoul(axis.substr(i + 1, close - i - 1));
            i = close + 1;
        }
        if (i < axis.size() && axis[i] == '.')
            ++i;
        if (s.key.empty())
            fail(ErrorKind::UnknownAxis, "malformed axis '" + axis + "'", "axis");
        steps.push_back(std::move(s));
    }
    return steps;
}

void collect_numeric(const json &j, const std::string &path, const std::string &key,
                     std::vector<std::string> &hits)
{
    if (j.is_object())
    {
        for (auto it = j.begin(); it != j.end(); ++it)
        {
            const std::string p = detail::join_path(path, it.key());
            if (it.key() == key && it->is_number())
                hits.push_back(p);
            collect_numeric(*it, p, key, hits);
        }
    }
    else if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i)
            collect_numeric(j[i], detail::index_path(path, i), key, hits);
}

json *resolve_axis(json &doc, const std::string &axis)
{
    json *cur = &doc;
    for (const PathStep &s : split_path(axis))
    {
        if (!cur->is_object() || !cur->contains(s.key))
            return nullptr;
        cur = &(*cur)[s.key];
        if (s.index)
        {
            if (!cur->is_array() || *s.index >= cur->size())
                return nullptr;
            cur = &(*cur)[*s.index];
        }
    }
    return cur->is_number() ? cur : nullptr;
}

std::string explore_csv_header(const std::vector<Objective> &objectives)
{
    std::string h = "chips,tp,pp,ep,dp,weights,kv_cache,slow_context";
    for (Objective o : objectives)
        h += "," + std::string(to_string(o));
    return h + ",ttft_s,time_to_completion_s,system_tokens_per_second,tokens_per_usd";
}

}  // namespace

std::string_view tool_version()
{
    return ROOFLINESIM_VERSION;
}

std::optional<ReportFormat> parse_format(std::string_view s)
{
    if (s == "json")
        return ReportFormat::Json;
    if (s == "md" || s == "markdown")
        return ReportFormat::Markdown;
    if (s == "csv")
        return ReportFormat::Csv;
    return std::nullopt;
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorKind::Precondition, "SHA-256 failed");
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

std::string config_hash(std::string_view text)
{
    return sha256_hex(detail::parse_document(text, "scenario").dump());
}

ScenarioConfig parse_scenario(std::string_view text, const Catalog &catalog)
{
    const json doc = detail::parse_document(text, "scenario");
    ScenarioConfig c = parse_document(doc, catalog);
    c.config_hash = sha256_hex(doc.dump());
    return c;
}

std::string render_estimate(const ScenarioConfig &config, ReportFormat format)
{
    const Estimate e = estimate(config);
    switch (format)
    {
        case ReportFormat::Json:
            return dump(estimate_json(config, e));
        case ReportFormat::Markdown:
            return estimate_markdown(config, e);
        case ReportFormat::Csv:
            return std::string(kEstimateCsvHeader) + "\n" + estimate_csv_row(config, e) + "\n";
    }
    return {};
}

std::string render_explore(const ScenarioConfig &config, ReportFormat format)
{
    require(config.explore.has_value(), "scenario has no explore block", "explore");
    const ExploreSpec &x = *config.explore;
    ExploreRequest req;
    req.budget = x.budget;
    req.objectives = x.objectives;
    req.pins = x.pins;
    req.shared_context = x.shared_context;
    req.topology = config.topology;
    req.knobs = config.knobs;
    req.cost = config.cost;
    const ExploreResult res = explore(config.model, config.request, config.node, req);

    if (format == ReportFormat::Json)
    {
        ojson names = ojson::array();
        for (Objective o : x.objectives)
            names.push_back(std::string(to_string(o)));
        ojson pareto = ojson::array();
        for (const Candidate &c : res.pareto)
        {
            ojson obj = ojson::object();
            for (std::size_t i = 0; i < x.objectives.size(); ++i)
                obj[std::string(to_string(x.objectives[i]))] = sig6(c.objectives[i]);
            pareto.push_back(ojson{{"plan", plan_json(c.plan)},
                                   {"objectives", obj},
                                   {"timing", timing_json(c.timing)},
                                   {"system_tokens_per_second", sig6(c.system_tokens_per_second)},
                                   {"cost", cost_json(c.cost)}});
        }
        return dump(ojson{{"tool", tool_json()},
                          {"config_hash", config.config_hash},
                          {"scenario", config.name},
                          {"node", config.node.name},
                          {"budget", x.budget},
                          {"objectives", names},
                          {"evaluated", res.evaluated},
                          {"pareto", pareto}});
    }

    std::ostringstream os;
    const bool md = format == ReportFormat::Markdown;
    if (md)
    {
        os << "### " << title(config) << " Pareto set (" << res.pareto.size() << " of " << res.evaluated
           << " plans)\n\n| Chips | tp | pp | ep | dp | Weights | KV | Slow context";
        for (Objective o : x.objectives)
            os << " | " << to_string(o);
        os << " |\n|---|---|---|---|---|---|---|---";
        for (std::size_t i = 0; i < x.objectives.size(); ++i)
            os << "|---";
        os << "|\n";
    }
    else
        os << explore_csv_header(x.objectives) << "\n";
    for (const Candidate &c : res.pareto)
    {
        const Placement &p = c.plan.placement;
        std::vector<std::string> cells = {std::to_string(c.plan.chips()),
                                          std::to_string(c.plan.tp),
                                          std::to_string(c.plan.pp),
                                          std::to_string(c.plan.ep),
                                          std::to_string(c.plan.dp),
                                          p[DataClass::Weights].value_or(""),
                                          p[DataClass::KvCache].value_or(""),
                                          p[DataClass::SlowContext].value_or("")};
        for (double v : c.objectives)
            cells.push_back(fmt6(v));
        if (!md)
        {
            cells.push_back(fmt6(c.timing.ttft));
            cells.push_back(fmt6(c.timing.time_to_completion));
            cells.push_back(fmt6(c.system_tokens_per_second));
            cells.push_back(fmt_opt(c.cost.tokens_per_usd));
        }
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << (md ? (i ? " | " : "| ") : (i ? "," : "")) << (md ? cells[i] : csv_field(cells[i]));
        os << (md ? " |\n" : "\n");
    }
    return os.str();
}

std::string run_scenario(std::string_view text, const Catalog &catalog, ReportFormat format)
{
    const ScenarioConfig c = parse_scenario(text, catalog);
    return c.plan ? render_estimate(c, format) : render_explore(c, format);
}

std::string render_sweep(std::string_view text, const Catalog &catalog, const std::string &axis,
                         const std::vector<std::string> &values)
{
    json doc = detail::parse_document(text, "scenario");
    if (!doc.is_object())
        config_error("<root>", "expected an object");
    // Catalog nodes are inlined so their numeric fields can be swept.
    if (doc.contains("node") && doc["node"].is_string())
    {
        auto it = catalog.nodes().find(doc["node"].get<std::string>());
        if (it != catalog.nodes().end())
            doc["node"] = node_to_json(it->second);
    }

    std::string path = axis;
    if (axis.find_first_of(".[") == std::string::npos)
    {
        std::vector<std::string> hits;
        collect_numeric(doc, "", axis, hits);
        if (hits.size() == 1)
            path = hits.front();
        else if (hits.size() > 1)
        {
            std::string all;
            for (const auto &h : hits)
                all += (all.empty() ? "" : ", ") + h;
            fail(ErrorKind::UnknownAxis, "axis '" + axis + "' is ambiguous: " + all, "axis");
        }
    }
    if (!resolve_axis(doc, path))
        fail(ErrorKind::UnknownAxis, "axis '" + axis + "' does not name a numeric field of the scenario", "axis");

    // Fail on a bad base scenario before emitting anything.
    ScenarioConfig base = parse_document(doc, catalog);
    if (!base.plan)
        config_error("sharding", "sweep needs an explicit sharding plan");

    std::string out = csv_field(path) + "," + kEstimateCsvHeader + "\n";
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        json v;
        try
        {
            v = json::parse(values[i]);
        }
        catch (const json::parse_error &)
        {
        }
        if (!v.is_number())
            config_error(detail::index_path("values", i), "expected a number, got '" + values[i] + "'");
        json point = doc;
        *resolve_axis(point, path) = v;
        ScenarioConfig c = parse_document(point, catalog);
        c.config_hash = sha256_hex(point.dump());
        out += csv_field(values[i]) + ",";
        try
        {
            out += estimate_csv_row(c, estimate(c)) + "\n";
        }
        catch (const UnsatisfiableError &)
        {
            out += infeasible_csv_row(c) + "\n";
        }
    }
    return out;
}

std::optional<TrendSeries> parse_series(std::string_view s)
{
    if (s == "capacity")
        return TrendSeries::Capacity;
    if (s == "bandwidth")
        return TrendSeries::Bandwidth;
    return std::nullopt;
}

std::string render_trend(const std::vector<PricePoint> &points, double window_start, double window_end,
                         TrendSeries series, ReportFormat format)
{
    const auto samples = series == TrendSeries::Capacity ? capacity_series(points) : bandwidth_series(points);
    const TrendFit fit = fit_trend(samples, window_start, window_end);
    const double span = fit.window_end - fit.window_start;
    const double window_factor = std::pow(fit.annual_factor, span);
    const double hbm = hbm_trend_check(builtin_hbm_index());
    const std::string name = series == TrendSeries::Capacity ? "capacity" : "bandwidth";

    switch (format)
    {
        case ReportFormat::Json:
            return dump(ojson{{"tool", tool_json()},
                              {"series", name},
                              {"window_start", sig6(fit.window_start)},
                              {"window_end", sig6(fit.window_end)},
                              {"n_points", fit.n_points},
                              {"annual_factor", sig6(fit.annual_factor)},
                              {"window_factor", sig6(window_factor)},
                              {"intercept_usd_per_gb", sig6(fit.intercept_usd_per_gb)},
                              {"r_squared", sig6(fit.r_squared)},
                              {"hbm_index_ratio", sig6(hbm)}});
        case ReportFormat::Markdown:
        {
            std::ostringstream os;
            os << "| Series | Window | Points | Annual factor | Window factor | r² | HBM index ratio |\n"
               << "|---|---|---|---|---|---|---|\n"
               << "| " << name << " | " << fmt6(fit.window_start) << "–" << fmt6(fit.window_end) << " | "
               << fit.n_points << " | " << fmt6(fit.annual_factor) << " | " << fmt6(window_factor) << " | "
               << fmt6(fit.r_squared) << " | " << fmt6(hbm) << " |\n";
            return os.str();
        }
        case ReportFormat::Csv:
        {
            std::ostringstream os;
            os << "series,window_start,window_end,n_points,annual_factor,window_factor,intercept_usd_per_gb,"
                  "r_squared,hbm_index_ratio\n"
               << name << ',' << fmt6(fit.window_start) << ',' << fmt6(fit.window_end) << ',' << fit.n_points << ','
               << fmt6(fit.annual_factor) << ',' << fmt6(window_factor) << ',' << fmt6(fit.intercept_usd_per_gb)
               << ',' << fmt6(fit.r_squared) << ',' << fmt6(hbm) << "\n";
            return os.str();
        }
    }
    return {};
}

std::string render_catalog(const Catalog &catalog, ReportFormat format)
{
    if (format == ReportFormat::Json)
        return serialize_catalog(catalog) + "\n";

    const bool md = format == ReportFormat::Markdown;
    std::ostringstream os;
    auto row = [&](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << (md ? (i ? " | " : "| ") : (i ? "," : "")) << (md ? cells[i] : csv_field(cells[i]));
        os << (md ? " |\n" : "\n");
    };
    const std::vector<std::string> dev_head = {"device", "capacity_gb", "read_gbps", "write_gbps", "power_w",
                                               "gbps_per_w", "gb_per_w", "granularity_bytes", "endurance"};
    row(dev_head);
    if (md)
        row(std::vector<std::string>(dev_head.size(), "---"));
    for (const auto &[name, d] : catalog.devices())
    {
        const MemoryEfficiency eff = derive_efficiency(d);
        row({name, fmt6(double(d.capacity_bytes) / units::kGB), fmt6(d.read_bw / units::kGB),
             fmt6(d.write_bw / units::kGB), fmt6(d.power_watts), fmt6(eff.bw_per_watt / units::kGB),
             fmt6(eff.cap_per_watt / units::kGB), std::to_string(d.read_granularity_bytes),
             std::string(to_string(d.write_endurance))});
    }
    os << "\n";
    const std::vector<std::string> node_head = {"node", "peak_tflops", "tiers", "memory_gb", "power_w", "capex_usd"};
    row(node_head);
    if (md)
        row(std::vector<std::string>(node_head.size(), "---"));
    for (const auto &[name, n] : catalog.nodes())
    {
        std::string tiers;
        for (const auto &t : n.tiers)
            tiers += (tiers.empty() ? "" : " + ") + t.device.name + " x" + std::to_string(t.stack_count);
        row({name, fmt6(n.peak_flops / 1e12), tiers, fmt6(double(n.total_memory_bytes()) / units::kGB),
             fmt6(n.total_power_watts()), fmt6(n.total_capex_usd())});
    }
    return os.str();
}

std::string render_error(const Error &e)
{
    ojson err{{"kind", std::string(to_string(e.kind()))},
              {"message", std::string(e.what())},
              {"field", e.field().empty() ? ojson(nullptr) : ojson(e.field())}};
    ojson body{{"error", err}};
    if (const auto *u = dynamic_cast<const UnsatisfiableError *>(&e))
        body["feasibility"] = feasibility_json(u->report());
    return dump(body);
}

int exit_code(const Error &e)
{
    return e.kind() == ErrorKind::Unsatisfiable ? 3 : 2;
}

}  // namespace rooflinesim
