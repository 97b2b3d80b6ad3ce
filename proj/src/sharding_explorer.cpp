// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/sharding_explorer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <tuple>

#include "rooflinesim/error.hpp"

namespace rooflinesim
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::uint64_t> divisors(std::uint64_t n)
{
    std::vector<std::uint64_t> lo, hi;
    for (std::uint64_t i = 1; i * i <= n; ++i)
        if (n % i == 0)
        {
            lo.push_back(i);
            if (i != n / i)
                hi.push_back(n / i);
        }
    lo.insert(lo.end(), hi.rbegin(), hi.rend());
    return lo;
}

struct Triple
{
    std::uint64_t tp, pp, ep;
};

// tp | n_heads, pp | layers, ep | n_experts, with tp*pp*ep <= budget.
std::vector<Triple> structural_triples(const ModelSpec &m, std::uint64_t budget)
{
    std::vector<Triple> out;
    const std::vector<std::uint64_t> eps = m.moe ? divisors(m.moe->n_experts) : std::vector<std::uint64_t>{1};
    for (std::uint64_t tp : divisors(m.n_heads))
        for (std::uint64_t pp : divisors(m.layers))
            for (std::uint64_t ep : eps)
                if (tp * pp <= budget && tp * pp * ep <= budget)
                    out.push_back({tp, pp, ep});
    return out;
}

double worst_severity(const FeasibilityReport &r)
{
    double s = 0;
    for (const auto &v : r.violations)
        s = std::max(s, v.severity);
    return s;
}

// Keeps the infeasible report whose worst violation is mildest.
struct Tightest
{
    FeasibilityReport report;
    double score = kInf;
    bool any = false;

    void offer(const FeasibilityReport &r)
    {
        const double s = worst_severity(r);
        if (!any || s < score)
        {
            report = r;
            score = s;
            any = true;
        }
    }
};

[[noreturn]] void unsatisfiable(const Tightest &t, std::uint64_t budget)
{
    std::string msg = "no feasible plan within " + std::to_string(budget) + " chips";
    if (t.any && !t.report.violations.empty())
        msg += ": " + t.report.violations.front().detail;
    throw UnsatisfiableError(msg, t.any ? t.report : FeasibilityReport{false, {}});
}

// Smallest dp in [1, dp_max] that passes check_feasible, relying on per-chip
// demand being non-increasing in dp. Offers the dp_max report when none does.
std::optional<std::uint64_t> min_dp(ShardingPlan plan, std::uint64_t dp_max, const ModelSpec &m,
                                    const RequestSpec &r, const NodeSpec &node, Tightest &tightest)
{
    plan.dp = dp_max;
    FeasibilityReport top = check_feasible(plan, m, r, node);
    if (!top.feasible)
    {
        tightest.offer(top);
        return std::nullopt;
    }
    std::uint64_t lo = 1, hi = dp_max;
    while (lo < hi)
    {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        plan.dp = mid;
        if (check_feasible(plan, m, r, node).feasible)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

double objective_value(Objective o, const Candidate &c)
{
    switch (o)
    {
        case Objective::TimeToCompletion:
            return c.timing.time_to_completion;
        case Objective::Ttft:
            return c.timing.ttft;
        case Objective::UsdPerToken:
            return c.cost.tokens_per_usd ? 1.0 / *c.cost.tokens_per_usd : kInf;
        case Objective::JoulesPerToken:
            return c.cost.tokens_per_joule ? 1.0 / *c.cost.tokens_per_joule : kInf;
        case Objective::Co2ePerToken:
            return c.cost.co2e_per_token.value_or(kInf);
        case Objective::Chips:
            return static_cast<double>(c.plan.chips());
    }
    return kInf;
}

bool topology_fits(const Topology &t, std::uint64_t chips)
{
    try
    {
        scale_topology(t, chips);
        return true;
    }
    catch (const Error &e)
    {
        if (e.kind() == ErrorKind::InconsistentNodes)
            return false;
        throw;
    }
}

}  // namespace

std::string_view to_string(ViolationKind k)
{
    switch (k)
    {
        case ViolationKind::Capacity:
            return "capacity";
        case ViolationKind::Endurance:
            return "endurance";
        case ViolationKind::Divisibility:
            return "divisibility";
    }
    return "?";
}

FeasibilityReport check_feasible(const ShardingPlan &plan, const ModelSpec &m, const RequestSpec &r,
                                 const NodeSpec &node)
{
    FeasibilityReport rep;
    auto structural = [&](bool ok, std::string detail) {
        if (!ok)
            rep.violations.push_back({ViolationKind::Divisibility, std::move(detail), {}, kInf});
    };
    const std::uint64_t experts = m.moe ? m.moe->n_experts : 1;
    structural(plan.tp >= 1 && m.n_heads % plan.tp == 0,
               "tp=" + std::to_string(plan.tp) + " does not divide n_heads=" + std::to_string(m.n_heads));
    structural(plan.pp >= 1 && m.layers % plan.pp == 0,
               "pp=" + std::to_string(plan.pp) + " does not divide layers=" + std::to_string(m.layers));
    if (m.moe)
        structural(plan.ep >= 1 && experts % plan.ep == 0,
                   "ep=" + std::to_string(plan.ep) + " does not divide n_experts=" + std::to_string(experts));
    else
        structural(plan.ep == 1, "ep=" + std::to_string(plan.ep) + " on a dense model");
    structural(plan.dp >= 1 && plan.dp <= r.batch,
               "dp=" + std::to_string(plan.dp) + " exceeds batch=" + std::to_string(r.batch));
    if (plan.tp == 0 || plan.pp == 0 || plan.ep == 0 || plan.dp == 0)
    {
        rep.feasible = false;
        return rep;
    }

    const Placement placement = resolve_placement(plan.placement, m, r, node);
    const ShardLayout layout = shard_layout(m, r, plan);

    auto endurance = [&](DataClass c) {
        const auto &name = placement[c];
        if (!name)
            return;
        const TierSlot *t = node.find_tier(*name);
        if (t->device.write_endurance == WriteEndurance::Low)
            rep.violations.push_back({ViolationKind::Endurance,
                                      std::string(to_string(c)) + " placed on low-endurance tier " + *name, *name,
                                      kInf});
    };
    if (!r.compute_only)
        endurance(DataClass::KvCache);
    endurance(DataClass::Activations);

    for (const TierSlot &t : node.tiers)
    {
        unsigned __int128 demand = 0;
        for (std::size_t i = 0; i < placement.tier.size(); ++i)
            if (placement.tier[i] && *placement.tier[i] == t.device.name)
                demand += layout.per_chip[static_cast<DataClass>(i)];
        const std::uint64_t cap = t.capacity_bytes();
        if (demand > cap)
        {
            const double need = static_cast<double>(demand);
            rep.violations.push_back({ViolationKind::Capacity,
                                      "tier " + t.device.name + " needs " +
                                          std::to_string(static_cast<std::uint64_t>(
                                              std::min<unsigned __int128>(demand, UINT64_MAX))) +
                                          " B per chip, has " + std::to_string(cap) + " B",
                                      t.device.name, cap ? need / static_cast<double>(cap) : kInf});
        }
    }
    rep.feasible = rep.violations.empty();
    return rep;
}

std::vector<Placement> enumerate_placements(const Placement &pins, const ModelSpec &m, const RequestSpec &r,
                                            const NodeSpec &node)
{
    (void)m;
    std::vector<DataClass> open;
    auto consider = [&](DataClass c, bool used) {
        if (used && !pins[c])
            open.push_back(c);
    };
    consider(DataClass::Weights, true);
    consider(DataClass::KvCache, !r.compute_only);
    consider(DataClass::SlowContext, r.rag_corpus_bytes > 0);

    std::vector<Placement> out{pins};
    for (DataClass c : open)
    {
        std::vector<Placement> next;
        for (const Placement &p : out)
            for (const TierSlot &t : node.tiers)
            {
                Placement q = p;
                q[c] = t.device.name;
                next.push_back(std::move(q));
            }
        out = std::move(next);
    }
    return out;
}

std::uint64_t min_system_size(const ModelSpec &m, const RequestSpec &r, const NodeSpec &node, const Placement &pins,
                              std::uint64_t budget, bool shared_context)
{
    validate(m);
    validate(r);
    require(budget >= 1 && budget <= kMaxBudget, "budget must be in [1, 4096]", "explore.budget");

    Tightest tightest;
    std::uint64_t best = 0;
    for (const Placement &p : enumerate_placements(pins, m, r, node))
    {
        resolve_placement(p, m, r, node);
        for (const Triple &t : structural_triples(m, budget))
        {
            const std::uint64_t replica = t.tp * t.pp * t.ep;
            if (best && replica >= best)
                continue;
            ShardingPlan plan{t.tp, t.pp, t.ep, 1, p, shared_context};
            const std::uint64_t dp_cap = std::min<std::uint64_t>(r.batch, budget / replica);
            if (auto dp = min_dp(plan, dp_cap, m, r, node, tightest))
                if (!best || replica * *dp < best)
                    best = replica * *dp;
        }
    }
    if (!best)
        unsatisfiable(tightest, budget);
    return best;
}

std::string_view to_string(Objective o)
{
    switch (o)
    {
        case Objective::TimeToCompletion:
            return "time_to_completion";
        case Objective::Ttft:
            return "ttft";
        case Objective::UsdPerToken:
            return "usd_per_token";
        case Objective::JoulesPerToken:
            return "joules_per_token";
        case Objective::Co2ePerToken:
            return "co2e_per_token";
        case Objective::Chips:
            return "chips";
    }
    return "?";
}

std::optional<Objective> parse_objective(std::string_view s)
{
    for (Objective o : {Objective::TimeToCompletion, Objective::Ttft, Objective::UsdPerToken,
                        Objective::JoulesPerToken, Objective::Co2ePerToken, Objective::Chips})
        if (to_string(o) == s)
            return o;
    return std::nullopt;
}

std::vector<std::size_t> pareto_front(const std::vector<std::vector<double>> &points)
{
    // A dominator is lexicographically no greater than what it dominates, so
    // after sorting each point need only be checked against the front so far.
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

    auto dominates = [](const std::vector<double> &a, const std::vector<double> &b) {
        bool strict = false;
        for (std::size_t k = 0; k < a.size(); ++k)
        {
            if (a[k] > b[k])
                return false;
            strict |= a[k] < b[k];
        }
        return strict;
    };
    std::vector<std::size_t> front;
    for (std::size_t i : order)
    {
        bool dominated = false;
        for (std::size_t f : front)
            if (dominates(points[f], points[i]))
            {
                dominated = true;
                break;
            }
        if (!dominated)
            front.push_back(i);
    }
    std::sort(front.begin(), front.end());
    return front;
}

Candidate evaluate_plan(const ModelSpec &m, const RequestSpec &r, const NodeSpec &node, const ShardingPlan &plan,
                        const Topology &topology, const EngineKnobs &knobs, const CostModel &cost,
                        const std::vector<Objective> &objectives)
{
    Candidate c;
    c.plan = plan;
    c.plan.placement = resolve_placement(plan.placement, m, r, node);
    SystemSetup setup{node, c.plan, topology, knobs};
    PhaseModel model(m, r, setup);
    c.timing = model.scenario_timing();
    c.system_tokens_per_second = static_cast<double>(plan.dp) * c.timing.decode_tokens_per_second;
    c.cost = ratio_metrics(c.system_tokens_per_second, SystemSpec{node, plan.chips()}, cost);
    for (Objective o : objectives)
        c.objectives.push_back(objective_value(o, c));
    return c;
}

ExploreResult explore(const ModelSpec &m, const RequestSpec &r, const NodeSpec &node, const ExploreRequest &req)
{
    validate(m);
    validate(r);
    validate(req.topology);
    validate(req.knobs);
    validate(req.cost);
    require(req.budget >= 1 && req.budget <= kMaxBudget, "budget must be in [1, 4096]", "explore.budget");
    require(!req.objectives.empty(), "at least one objective is required", "explore.objectives");

    Tightest tightest;
    std::vector<ShardingPlan> plans;
    const std::vector<std::uint64_t> batch_divisors = divisors(r.batch);
    for (const Placement &p : enumerate_placements(req.pins, m, r, node))
    {
        resolve_placement(p, m, r, node);
        for (const Triple &t : structural_triples(m, req.budget))
        {
            const std::uint64_t replica = t.tp * t.pp * t.ep;
            ShardingPlan plan{t.tp, t.pp, t.ep, 1, p, req.shared_context};
            const std::uint64_t dp_cap = std::min<std::uint64_t>(r.batch, req.budget / replica);
            const auto dp_min = min_dp(plan, dp_cap, m, r, node, tightest);
            if (!dp_min)
                continue;
            auto push = [&](std::uint64_t dp) {
                plan.dp = dp;
                if (topology_fits(req.topology, plan.chips()))
                    plans.push_back(plan);
            };
            push(*dp_min);
            for (std::uint64_t d : batch_divisors)
                if (d > *dp_min && d <= dp_cap)
                    push(d);
        }
    }
    if (plans.empty())
        unsatisfiable(tightest, req.budget);

    std::vector<Candidate> evaluated(plans.size());
    unsigned threads = req.threads ? req.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, plans.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i = next++; i < plans.size() && !failed; i = next++)
        {
            try
            {
                evaluated[i] = evaluate_plan(m, r, node, plans[i], req.topology, req.knobs, req.cost, req.objectives);
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    failure = std::current_exception();
            }
        }
    };
    if (threads <= 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<std::vector<double>> points;
    points.reserve(evaluated.size());
    for (const auto &c : evaluated)
        points.push_back(c.objectives);

    ExploreResult out;
    out.evaluated = plans.size();
    out.feasible = plans.size();
    for (std::size_t i : pareto_front(points))
        out.pareto.push_back(evaluated[i]);

    auto key = [](const Candidate &c) {
        return std::make_tuple(c.plan.chips(), c.plan.tp, c.plan.pp, c.plan.ep, c.plan.dp);
    };
    std::stable_sort(out.pareto.begin(), out.pareto.end(), [&](const Candidate &a, const Candidate &b) {
        if (a.objectives != b.objectives)
            return a.objectives < b.objectives;
        if (key(a) != key(b))
            return key(a) < key(b);
        return a.plan.placement.tier < b.plan.placement.tier;
    });
    return out;
}

}  // namespace rooflinesim
