// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rooflinesim/error.hpp"
#include "rooflinesim/price_trends.hpp"
#include "rooflinesim/scenario.hpp"
#include "rooflinesim/service.hpp"

#ifndef ROOFLINESIM_DATA_DIR
#define ROOFLINESIM_DATA_DIR "data"
#endif

using namespace rooflinesim;

namespace
{

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::Parse, "cannot read '" + path + "'", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Catalog open_catalog(const std::string &path)
{
    return load_catalog(path.empty() ? std::string() : read_file(path));
}

ReportFormat format_of(const std::string &s)
{
    auto f = parse_format(s);
    if (!f)
        fail(ErrorKind::Parse, "unknown format '" + s + "' (json, md, csv)", "format");
    return *f;
}

std::vector<std::string> split_values(const std::string &s)
{
    std::vector<std::string> out;
    if (s.find_first_not_of(" \t") == std::string::npos)
        return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    return out;
}

std::pair<double, double> parse_window(const std::string &s)
{
    const auto colon = s.find(':');
    try
    {
        if (colon != std::string::npos)
        {
            std::size_t a = 0, b = 0;
            const double lo = std::stod(s.substr(0, colon), &a);
            const double hi = std::stod(s.substr(colon + 1), &b);
            if (a == colon && b == s.size() - colon - 1)
                return {lo, hi};
        }
    }
    catch (const std::exception &)
    {
    }
    fail(ErrorKind::Parse, "window must look like START:END, got '" + s + "'", "window");
}

Service *g_service = nullptr;

void on_signal(int)
{
    if (g_service)
        g_service->stop();
}

}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Analytical roofline simulator for LLM inference hardware"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    const char *env_catalog = std::getenv("ROOFLINESIM_CATALOG");
    std::string catalog_path = env_catalog ? env_catalog : "";
    std::string format = "json";
    app.add_option("--catalog", catalog_path, "Catalog document merged over the built-ins (env ROOFLINESIM_CATALOG)");

    std::string config_path;
    auto *estimate = app.add_subcommand("estimate", "Evaluate one scenario (explicit plan or explore block)");
    estimate->add_option("config", config_path, "Scenario config (JSON)")->required();
    estimate->add_option("--format", format, "json | md | csv");

    std::string axis, values;
    auto *sweep = app.add_subcommand("sweep", "Evaluate a scenario along one numeric axis (CSV)");
    sweep->add_option("config", config_path, "Scenario config (JSON)")->required();
    sweep->add_option("--axis", axis, "Dotted field path, or a key that occurs once")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();

    std::string csv_path = std::string(ROOFLINESIM_DATA_DIR) + "/ddr_price_history.csv";
    std::string window = "2022:2025", series = "capacity";
    bool lenient = false;
    auto *trend = app.add_subcommand("fit-trend", "Fit a price trend over a closed year window");
    trend->add_option("csv", csv_path, "Price history CSV")->capture_default_str();
    trend->add_option("--window", window, "START:END")->capture_default_str();
    trend->add_option("--series", series, "capacity | bandwidth")->capture_default_str();
    trend->add_option("--format", format, "json | md | csv");
    trend->add_flag("--lenient", lenient, "Skip malformed rows instead of failing");

    auto *catalog_cmd = app.add_subcommand("catalog", "Catalog operations");
    catalog_cmd->require_subcommand(1);
    auto *list = catalog_cmd->add_subcommand("list", "List devices and nodes");
    list->add_option("--format", format, "json | md | csv");

    int port = 8080;
    std::string host = "127.0.0.1";
    auto *serve = app.add_subcommand("serve", "Run the JSON-over-HTTP service");
    serve->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try
    {
        if (estimate->parsed())
        {
            const Catalog catalog = open_catalog(catalog_path);
            const ReportFormat f = format_of(format);
            try
            {
                std::cout << run_scenario(read_file(config_path), catalog, f);
            }
            catch (const Error &e)
            {
                if (f == ReportFormat::Json)
                    std::cout << render_error(e);
                throw;
            }
        }
        else if (sweep->parsed())
        {
            const Catalog catalog = open_catalog(catalog_path);
            std::cout << render_sweep(read_file(config_path), catalog, axis, split_values(values));
        }
        else if (trend->parsed())
        {
            const auto s = parse_series(series);
            if (!s)
                fail(ErrorKind::Parse, "unknown series '" + series + "' (capacity, bandwidth)", "series");
            const auto [lo, hi] = parse_window(window);
            const IngestResult data = ingest_price_history(read_file(csv_path), lenient);
            for (const auto &skip : data.skipped)
                std::cerr << "warning: skipped row " << skip.row << ": " << skip.reason << "\n";
            std::cout << render_trend(data.points, lo, hi, *s, format_of(format));
        }
        else if (list->parsed())
        {
            std::cout << render_catalog(open_catalog(catalog_path), format_of(format));
        }
        else if (serve->parsed())
        {
            Service service(open_catalog(catalog_path));
            const int bound = service.bind(host, port);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on http://" << host << ":" << bound << "\n";
            service.listen();
            g_service = nullptr;
        }
    }
    catch (const Error &e)
    {
        std::cerr << (e.kind() == ErrorKind::Unsatisfiable ? "unsatisfiable: " : "error: ") << e.what() << "\n";
        if (const auto *u = dynamic_cast<const UnsatisfiableError *>(&e))
            for (const auto &v : u->report().violations)
                std::cerr << "  " << to_string(v.kind) << ": " << v.detail << "\n";
        return exit_code(e);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
