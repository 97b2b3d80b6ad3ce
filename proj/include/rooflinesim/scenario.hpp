// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rooflinesim/cost_metrics.hpp"
#include "rooflinesim/hardware_catalog.hpp"
#include "rooflinesim/price_trends.hpp"
#include "rooflinesim/roofline_engine.hpp"
#include "rooflinesim/sharding_explorer.hpp"

namespace rooflinesim
{

std::string_view tool_version();

enum class ReportFormat
{
    Json,
    Markdown,
    Csv,
};

std::optional<ReportFormat> parse_format(std::string_view s);

struct ExploreSpec
{
    std::uint64_t budget = 64;
    std::vector<Objective> objectives = {Objective::TimeToCompletion, Objective::UsdPerToken};
    Placement pins;
    bool shared_context = false;
};

/// A fully resolved scenario. Exactly one of `plan` and `explore` is set.
struct ScenarioConfig
{
    std::string name;
    ModelSpec model;
    RequestSpec request;
    NodeSpec node;
    Topology topology;
    std::optional<ShardingPlan> plan;
    std::optional<ExploreSpec> explore;
    CostModel cost;
    EngineKnobs knobs;
    std::string config_hash;  // SHA-256 of the canonical input document
};

/// Parses a scenario document (JSON, units in key suffixes) against a catalog.
/// Errors carry the dotted path of the offending field.
ScenarioConfig parse_scenario(std::string_view text, const Catalog &catalog);

std::string sha256_hex(std::string_view bytes);

/// Hash of the canonical form (sorted keys, no whitespace) of a document.
std::string config_hash(std::string_view text);

/// Single-plan report. Throws UnsatisfiableError when the plan is infeasible.
std::string render_estimate(const ScenarioConfig &config, ReportFormat format);

/// Pareto report for an `explore` scenario.
std::string render_explore(const ScenarioConfig &config, ReportFormat format);

/// Parses and dispatches to the estimate or explore report.
std::string run_scenario(std::string_view text, const Catalog &catalog, ReportFormat format);

/// Evaluates the scenario once per value with `axis` (a dotted field path, or
/// a bare key that occurs exactly once) set to that value. CSV, one row per
/// value in the given order.
std::string render_sweep(std::string_view text, const Catalog &catalog, const std::string &axis,
                         const std::vector<std::string> &values);

enum class TrendSeries
{
    Capacity,
    Bandwidth,
};

std::optional<TrendSeries> parse_series(std::string_view s);

std::string render_trend(const std::vector<PricePoint> &points, double window_start, double window_end,
                         TrendSeries series, ReportFormat format);

std::string render_catalog(const Catalog &catalog, ReportFormat format);

/// JSON body describing a failure: {"error": {...}} plus "feasibility" for
/// unsatisfiable scenarios.
std::string render_error(const Error &e);

/// 3 for Unsatisfiable, 2 for every other library error.
int exit_code(const Error &e);

}  // namespace rooflinesim
