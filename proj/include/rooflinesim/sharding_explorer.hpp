// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rooflinesim/cost_metrics.hpp"
#include "rooflinesim/error.hpp"
#include "rooflinesim/roofline_engine.hpp"
#include "rooflinesim/sharding_plan.hpp"

namespace rooflinesim
{

enum class ViolationKind
{
    Capacity,
    Endurance,
    Divisibility,
};

std::string_view to_string(ViolationKind k);

struct Violation
{
    ViolationKind kind = ViolationKind::Capacity;
    std::string detail;
    std::string tier;       // empty for Divisibility
    double severity = 0.0;  // demand / capacity for Capacity, +inf otherwise

    bool operator==(const Violation &) const = default;
};

struct FeasibilityReport
{
    bool feasible = true;
    std::vector<Violation> violations;
};

/// Thrown when no plan within the budget is feasible; carries the report of
/// the plan that came closest.
class UnsatisfiableError : public Error
{
   public:
    UnsatisfiableError(const std::string &message, FeasibilityReport report) :
        Error(ErrorKind::Unsatisfiable, message), report_(std::move(report))
    {
    }
    const FeasibilityReport &report() const { return report_; }

   private:
    FeasibilityReport report_;
};

inline constexpr std::uint64_t kMaxBudget = 4096;

/// Per-chip capacity per tier, endurance of KV/activation tiers, and the
/// structural rules (tp | n_heads, pp | layers, ep | n_experts, dp <= batch).
FeasibilityReport check_feasible(const ShardingPlan &plan, const ModelSpec &m, const RequestSpec &r,
                                 const NodeSpec &node);

/// Placements consistent with `pins`: unpinned Weights, KvCache and (when a
/// corpus is present) SlowContext range over every tier of the node.
std::vector<Placement> enumerate_placements(const Placement &pins, const ModelSpec &m, const RequestSpec &r,
                                            const NodeSpec &node);

/// Smallest tp*pp*ep*dp over feasible plans and placements consistent with
/// `pins`. Throws UnsatisfiableError if nothing fits within `budget`.
std::uint64_t min_system_size(const ModelSpec &m, const RequestSpec &r, const NodeSpec &node, const Placement &pins,
                              std::uint64_t budget = kMaxBudget, bool shared_context = false);

enum class Objective
{
    TimeToCompletion,
    Ttft,
    UsdPerToken,
    JoulesPerToken,
    Co2ePerToken,
    Chips,
};

std::string_view to_string(Objective o);
std::optional<Objective> parse_objective(std::string_view s);

struct Candidate
{
    ShardingPlan plan;  // placement resolved, Activations included
    ScenarioTiming timing;
    CostReport cost;
    double system_tokens_per_second = 0;
    std::vector<double> objectives;  // minimised, in request order
};

/// Indices of the non-dominated rows (all objectives minimised). Equal rows
/// do not dominate each other.
std::vector<std::size_t> pareto_front(const std::vector<std::vector<double>> &points);

struct ExploreRequest
{
    std::uint64_t budget = 64;
    std::vector<Objective> objectives = {Objective::TimeToCompletion, Objective::UsdPerToken};
    Placement pins;
    bool shared_context = false;
    Topology topology;
    EngineKnobs knobs;
    CostModel cost;
    unsigned threads = 0;  // 0 = hardware concurrency
};

struct ExploreResult
{
    std::vector<Candidate> pareto;  // sorted by objectives, then chips, then tp
    std::size_t evaluated = 0;
    std::size_t feasible = 0;
};

/// Candidate plans: tp | n_heads, pp | layers, ep | n_experts, and dp from
/// the smallest feasible value plus every larger divisor of the batch.
ExploreResult explore(const ModelSpec &m, const RequestSpec &r, const NodeSpec &node, const ExploreRequest &req);

/// Evaluates one plan end to end (timing and cost).
Candidate evaluate_plan(const ModelSpec &m, const RequestSpec &r, const NodeSpec &node, const ShardingPlan &plan,
                        const Topology &topology, const EngineKnobs &knobs, const CostModel &cost,
                        const std::vector<Objective> &objectives);

}  // namespace rooflinesim
