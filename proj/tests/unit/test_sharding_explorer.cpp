// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "rooflinesim/error.hpp"
#include "rooflinesim/sharding_explorer.hpp"
#include "oracles/plan_oracle.hpp"
#include "support/explorer_gen.hpp"
#include "support/fixtures.hpp"

using namespace rooflinesim;
using oracle::brute_front;
using oracle::brute_min_size;
using oracle::dominates;
using testsupport::Gen;
using testsupport::mid_model;
using testsupport::plain_device;
using testsupport::random_node;
using testsupport::small_request;
using testsupport::weights_node;

namespace
{

bool has_kind(const FeasibilityReport &r, ViolationKind k)
{
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation &v) { return v.kind == k; });
}

}  // namespace

TEST_CASE("objective names")
{
    for (Objective o : {Objective::TimeToCompletion, Objective::Ttft, Objective::UsdPerToken,
                        Objective::JoulesPerToken, Objective::Co2ePerToken, Objective::Chips})
        CHECK(parse_objective(to_string(o)) == o);
    CHECK(!parse_objective("latency"));
    CHECK(to_string(ViolationKind::Endurance) == "endurance");
}

TEST_CASE("feasibility rules")
{
    const auto &cat = testsupport::builtin();
    const NodeSpec node = cat.node("hbm4-hbf4");
    ModelSpec m = testsupport::toy_model();
    RequestSpec r;
    r.input_len = 16;

    ShardingPlan plan;
    plan.placement[DataClass::Weights] = "HBF";
    plan.placement[DataClass::KvCache] = "HBM4";
    CHECK(check_feasible(plan, m, r, node).feasible);

    plan.placement[DataClass::KvCache] = "HBF";
    auto rep = check_feasible(plan, m, r, node);
    CHECK(!rep.feasible);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == ViolationKind::Endurance);
    CHECK(rep.violations[0].tier == "HBF");

    // Nothing is written to the KV tier when the request skips it.
    r.compute_only = true;
    CHECK(check_feasible(plan, m, r, node).feasible);
    r.compute_only = false;

    plan.placement[DataClass::KvCache] = "HBM4";
    plan.tp = 3;
    plan.pp = 3;
    plan.ep = 2;
    plan.dp = 2;
    rep = check_feasible(plan, m, r, node);
    CHECK(rep.violations.size() == 4);
    CHECK(std::all_of(rep.violations.begin(), rep.violations.end(),
                      [](const Violation &v) { return v.kind == ViolationKind::Divisibility && v.tier.empty(); }));

    plan = ShardingPlan{};
    plan.placement[DataClass::Weights] = "DDR5";
    plan.placement[DataClass::KvCache] = "HBM4";
    try
    {
        check_feasible(plan, m, r, node);
        FAIL("expected UnknownTier");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::UnknownTier);
        CHECK(e.field() == "sharding.placement.weights");
    }

    // Only Low-endurance tiers: the activations have nowhere else to go.
    NodeSpec flash_only = testsupport::single_tier_node(cat.device("HBF"), 1, 1e15);
    ShardingPlan fp;
    fp.placement[DataClass::Weights] = "HBF";
    r.compute_only = true;
    rep = check_feasible(fp, m, r, flash_only);
    CHECK(has_kind(rep, ViolationKind::Endurance));
}

TEST_CASE("capacity is a closed inequality")
{
    Gen g(71);
    for (int i = 0; i < 1000; ++i)
    {
        ModelSpec m = testsupport::random_toy_model(g);
        RequestSpec r = small_request(g);
        r.rag_corpus_bytes = 0;
        ShardingPlan plan;
        plan.tp = g.pick(std::vector<std::uint64_t>{1, m.n_heads});
        plan.placement[DataClass::Weights] = "main";
        plan.placement[DataClass::KvCache] = "main";
        const ShardLayout l = shard_layout(m, r, plan);
        const std::uint64_t need = l.per_chip[DataClass::Weights] + l.per_chip[DataClass::KvCache];
        CHECK(check_feasible(plan, m, r, weights_node(need)).feasible);
        auto rep = check_feasible(plan, m, r, weights_node(need - 1));
        REQUIRE(rep.violations.size() == 1);
        CHECK(rep.violations[0].kind == ViolationKind::Capacity);
        CHECK(rep.violations[0].tier == "main");
        CHECK(rep.violations[0].severity > 1.0);
    }
}

TEST_CASE("minimum system size examples")
{
    const ModelSpec m = mid_model();
    const std::uint64_t w = weight_bytes(m);
    REQUIRE(w % 2 == 0);
    RequestSpec r;
    r.compute_only = true;
    Placement pins;
    pins[DataClass::Weights] = "main";

    CHECK(min_system_size(m, r, weights_node(w / 2), pins) == 2);
    CHECK(min_system_size(m, r, weights_node(w), pins) == 1);
    CHECK(min_system_size(m, r, weights_node(w / 2 - 1), pins) == 4);

    // One 512 GB flash stack for weights plus one HBM stack for KV.
    const auto &cat = testsupport::builtin();
    REQUIRE(w > cat.device("HBM4").capacity_bytes);
    REQUIRE(w <= cat.device("HBF").capacity_bytes);
    NodeSpec hybrid = testsupport::single_tier_node(cat.device("HBM4"), 1, 1e15);
    hybrid.tiers.push_back({cat.device("HBF"), 1});
    RequestSpec chat;
    chat.input_len = 1024;
    chat.output_len = 256;
    Placement hp;
    hp[DataClass::Weights] = "HBF";
    hp[DataClass::KvCache] = "HBM4";
    CHECK(min_system_size(m, chat, hybrid, hp) == 1);
    NodeSpec hbm_only = testsupport::single_tier_node(cat.device("HBM4"), 1, 1e15);
    CHECK(min_system_size(m, chat, hbm_only, {}) > 1);
    CHECK(min_system_size(m, chat, hybrid, {}) == 1);
}

TEST_CASE("unsatisfiable carries the tightest violation")
{
    const auto &cat = testsupport::builtin();
    ModelSpec m = mid_model();
    RequestSpec r;
    r.input_len = 128;
    NodeSpec flash = testsupport::single_tier_node(cat.device("HBM4"), 1, 1e15);
    flash.tiers.push_back({cat.device("HBF"), 1});

    Placement kv_on_flash;
    kv_on_flash[DataClass::KvCache] = "HBF";
    try
    {
        min_system_size(m, r, flash, kv_on_flash);
        FAIL("expected Unsatisfiable");
    }
    catch (const UnsatisfiableError &e)
    {
        CHECK(e.kind() == ErrorKind::Unsatisfiable);
        CHECK(!e.report().feasible);
        CHECK(has_kind(e.report(), ViolationKind::Endurance));
    }

    Placement w;
    w[DataClass::Weights] = "main";
    r.compute_only = true;
    try
    {
        min_system_size(m, r, weights_node(weight_bytes(m) / 64), w, 8);
        FAIL("expected Unsatisfiable");
    }
    catch (const UnsatisfiableError &e)
    {
        REQUIRE(!e.report().violations.empty());
        const Violation &v = e.report().violations.front();
        CHECK(v.kind == ViolationKind::Capacity);
        // Best reachable with 8 chips is an 8-way split: 64/8 = 8x over.
        CHECK(v.severity == doctest::Approx(8.0).epsilon(0.01));
    }

    CHECK_THROWS_AS(min_system_size(m, r, weights_node(1), w, 0), Error);
    CHECK_THROWS_AS(min_system_size(m, r, weights_node(1), w, kMaxBudget + 1), Error);
}

TEST_CASE("minimum system size equals exhaustive enumeration")
{
    Gen g(72);
    int satisfiable = 0, sizes_above_one = 0;
    for (int i = 0; i < 1000; ++i)
    {
        ModelSpec m = testsupport::random_toy_model(g);
        RequestSpec r = small_request(g);
        const NodeSpec node = random_node(g, m, r, g.coin(0.3));
        const bool shared = g.coin(0.3);
        const std::uint64_t budget = g.uint(1, 16);
        const auto expect = brute_min_size(m, r, node, budget, shared);
        if (expect)
        {
            ++satisfiable;
            sizes_above_one += *expect > 1;
            CHECK(min_system_size(m, r, node, {}, budget, shared) == *expect);
        }
        else
        {
            CHECK_THROWS_AS(min_system_size(m, r, node, {}, budget, shared), UnsatisfiableError);
        }
    }
    // The generator must exercise both outcomes.
    CHECK(satisfiable > 200);
    CHECK(sizes_above_one > 100);
    CHECK(satisfiable < 1000);
}

TEST_CASE("feasibility is monotone in capacity and budget")
{
    Gen g(73);
    for (int i = 0; i < 1000; ++i)
    {
        ModelSpec m = testsupport::random_toy_model(g);
        RequestSpec r = small_request(g);
        const NodeSpec node = random_node(g, m, r, false);
        SystemSetup s = testsupport::random_setup(g, m);
        ShardingPlan plan = s.plan;
        plan.placement = Placement{};
        plan.placement[DataClass::Weights] = "fast";
        plan.placement[DataClass::KvCache] = "fast";
        plan.placement[DataClass::SlowContext] = "fast";
        plan.dp = g.uint(1, r.batch);
        if (!check_feasible(plan, m, r, node).feasible)
            continue;
        NodeSpec bigger = node;
        auto &t = bigger.tiers[g.uint(0, bigger.tiers.size() - 1)];
        t.device.capacity_bytes += g.uint(0, t.device.capacity_bytes);
        CHECK(check_feasible(plan, m, r, bigger).feasible);

        try
        {
            const std::uint64_t b = g.uint(1, 16);
            const std::uint64_t at_b = min_system_size(m, r, node, {}, b);
            CHECK(min_system_size(m, r, node, {}, b + g.uint(0, 32)) == at_b);
            CHECK(min_system_size(m, r, bigger, {}, b) <= at_b);
        }
        catch (const UnsatisfiableError &)
        {
        }
    }
}

TEST_CASE("an extra flash weights tier never grows the minimum system")
{
    Gen g(74);
    int strictly_smaller = 0;
    for (int i = 0; i < 1000; ++i)
    {
        ModelSpec m = testsupport::random_toy_model(g);
        RequestSpec r = small_request(g);
        NodeSpec plain = random_node(g, m, r, false);
        NodeSpec with_flash = plain;
        MemoryDeviceSpec flash = testsupport::builtin().device("HBF");
        flash.capacity_bytes = static_cast<std::uint64_t>(double(weight_bytes(m)) * g.log_real(0.05, 4.0)) + 1;
        with_flash.tiers.push_back({flash, 1});
        const std::uint64_t budget = g.uint(1, 64);

        std::optional<std::uint64_t> a, b;
        try
        {
            a = min_system_size(m, r, plain, {}, budget);
        }
        catch (const UnsatisfiableError &)
        {
        }
        try
        {
            b = min_system_size(m, r, with_flash, {}, budget);
        }
        catch (const UnsatisfiableError &)
        {
        }
        if (a)
        {
            REQUIRE(b);
            CHECK(*b <= *a);
            strictly_smaller += *b < *a;
        }
    }
    CHECK(strictly_smaller > 20);
}

TEST_CASE("pareto front matches pairwise dominance")
{
    Gen g(75);
    for (int i = 0; i < 1500; ++i)
    {
        const std::size_t n = g.uint(0, 60);
        const std::size_t dims = g.uint(1, 4);
        const std::uint64_t levels = g.uint(1, 6);  // coarse grid forces ties
        std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
        for (auto &p : pts)
            for (auto &x : p)
                x = g.coin(0.1) ? std::numeric_limits<double>::infinity() : double(g.uint(0, levels));
        CHECK(pareto_front(pts) == brute_front(pts));
    }
}

TEST_CASE("communication volume matches routing enumeration")
{
    Gen g(76);
    for (int i = 0; i < 1000; ++i)
    {
        ModelSpec m = testsupport::random_toy_model(g);
        RequestSpec r;
        r.batch = g.uint(1, 16);
        ShardingPlan plan;
        plan.tp = g.uint(1, 4);
        plan.pp = g.uint(1, 4);
        plan.ep = m.moe ? g.uint(1, m.moe->n_experts) : 1;
        plan.dp = g.uint(1, r.batch);
        const std::uint64_t tokens = g.uint(1, 4);
        const double row = double(m.d_model * m.dtype_bytes);
        const std::uint64_t replica_batch = (r.batch + plan.dp - 1) / plan.dp;

        // Walk the replica's activations through the network, one row at a time.
        double ar = 0, dispatch = 0, collect = 0, p2p = 0;
        for (std::uint64_t layer = 0; layer < m.layers; ++layer)
            for (std::uint64_t seq = 0; seq < replica_batch; ++seq)
                for (std::uint64_t t = 0; t < tokens; ++t)
                {
                    if (plan.tp > 1)
                        ar += 2 * row;  // attention output and FFN output
                    if (m.moe && plan.ep > 1)
                        for (std::uint64_t route = 0; route < m.moe->top_k; ++route)
                        {
                            dispatch += row;
                            collect += row;
                        }
                }
        for (std::uint64_t stage = 1; stage < plan.pp; ++stage)
            for (std::uint64_t seq = 0; seq < replica_batch; ++seq)
                for (std::uint64_t t = 0; t < tokens; ++t)
                    p2p += row;

        const CommVolume v = comm_volume_per_step(plan, m, r, tokens);
        CHECK(v.all_reduce == ar);
        CHECK(v.moe_dispatch == dispatch);
        CHECK(v.moe_collect == collect);
        CHECK(v.pipeline_p2p == p2p);
        CHECK(v[CollectiveKind::AllReduce] == ar);
        CHECK(v[CollectiveKind::Broadcast] == 0.0);
    }
}

TEST_CASE("explore basics")
{
    const auto &cat = testsupport::builtin();
    ModelSpec m = testsupport::toy_model();
    RequestSpec r;
    r.input_len = 32;
    r.output_len = 8;
    NodeSpec node = testsupport::single_tier_node(cat.device("HBM4"), 2, 1e15);

    ExploreRequest req;
    req.budget = 1;
    auto res = explore(m, r, node, req);
    REQUIRE(res.pareto.size() == 1);
    CHECK(res.pareto[0].plan.chips() == 1);
    CHECK(res.pareto[0].plan.placement[DataClass::Activations] == "HBM4");
    CHECK(res.pareto[0].objectives.size() == 2);
    CHECK(res.pareto[0].objectives[0] == res.pareto[0].timing.time_to_completion);
    CHECK(res.pareto[0].objectives[1] == doctest::Approx(1.0 / *res.pareto[0].cost.tokens_per_usd));

    // Equal objective vectors: fewer chips first.
    req.budget = 16;
    req.objectives = {Objective::Chips};
    r.batch = 8;
    res = explore(m, r, node, req);
    REQUIRE(!res.pareto.empty());
    CHECK(res.pareto.size() == 1);
    CHECK(res.pareto[0].plan.chips() == 1);

    req.objectives = {};
    CHECK_THROWS_AS(explore(m, r, node, req), Error);

    // Nothing fits.
    req.objectives = {Objective::TimeToCompletion};
    NodeSpec tiny = testsupport::single_tier_node(plain_device("main", 8, 1e12), 1, 1e15);
    CHECK_THROWS_AS(explore(m, r, tiny, req), UnsatisfiableError);

    // A torus with fixed dims only admits its own size.
    req.topology.kind = Torus{{2, 2}, 2};
    req.budget = 16;
    res = explore(m, r, node, req);
    for (const auto &c : res.pareto)
        CHECK((c.plan.chips() == 4 || c.plan.chips() == 1));
}

TEST_CASE("explore equals brute-force filter and is deterministic")
{
    Gen g(77);
    for (int i = 0; i < 80; ++i)
    {
        ModelSpec m = testsupport::random_toy_model(g);
        RequestSpec r = small_request(g);
        r.batch = g.uint(1, 8);
        const NodeSpec node = random_node(g, m, r, g.coin(0.3));
        ExploreRequest req;
        req.budget = g.uint(1, 24);
        std::vector<Objective> all = {Objective::TimeToCompletion, Objective::Ttft, Objective::UsdPerToken,
                                      Objective::JoulesPerToken, Objective::Co2ePerToken, Objective::Chips};
        std::shuffle(all.begin(), all.end(), g.engine());
        req.objectives.assign(all.begin(), all.begin() + g.uint(1, 3));
        req.threads = 1;

        ExploreResult one;
        try
        {
            one = explore(m, r, node, req);
        }
        catch (const UnsatisfiableError &)
        {
            CHECK_THROWS_AS(min_system_size(m, r, node, {}, req.budget), UnsatisfiableError);
            continue;
        }
        req.threads = 7;
        const ExploreResult many = explore(m, r, node, req);
        REQUIRE(one.pareto.size() == many.pareto.size());
        for (std::size_t k = 0; k < one.pareto.size(); ++k)
        {
            CHECK(one.pareto[k].plan == many.pareto[k].plan);
            CHECK(one.pareto[k].objectives == many.pareto[k].objectives);
        }

        // Independent candidate set: every structurally valid plan, keeping
        // the smallest feasible dp and every larger batch divisor.
        std::vector<Candidate> pool;
        std::vector<std::uint64_t> seen_min;
        for (const Placement &p : enumerate_placements({}, m, r, node))
            for (std::uint64_t tp = 1; tp <= m.n_heads; ++tp)
                for (std::uint64_t pp = 1; pp <= m.layers; ++pp)
                    for (std::uint64_t ep = 1; ep <= (m.moe ? m.moe->n_experts : 1); ++ep)
                    {
                        std::optional<std::uint64_t> first;
                        for (std::uint64_t dp = 1; dp <= r.batch && tp * pp * ep * dp <= req.budget; ++dp)
                        {
                            ShardingPlan plan{tp, pp, ep, dp, p, false};
                            if (!check_feasible(plan, m, r, node).feasible)
                                continue;
                            if (!first)
                                first = dp;
                            if (dp == *first || r.batch % dp == 0)
                                pool.push_back(evaluate_plan(m, r, node, plan, req.topology, req.knobs, req.cost,
                                                             req.objectives));
                        }
                    }
        CHECK(one.evaluated == pool.size());
        std::vector<std::vector<double>> pts;
        for (const auto &c : pool)
            pts.push_back(c.objectives);
        std::multiset<std::vector<double>> expect, got;
        for (std::size_t k : brute_front(pts))
            expect.insert(pts[k]);
        for (const auto &c : one.pareto)
            got.insert(c.objectives);
        CHECK(expect == got);

        for (std::size_t a = 0; a < one.pareto.size(); ++a)
            for (std::size_t b = 0; b < one.pareto.size(); ++b)
                CHECK(!dominates(one.pareto[a].objectives, one.pareto[b].objectives));
        for (std::size_t k = 1; k < one.pareto.size(); ++k)
        {
            const auto &x = one.pareto[k - 1];
            const auto &y = one.pareto[k];
            CHECK(x.objectives <= y.objectives);
            if (x.objectives == y.objectives)
                CHECK(std::make_pair(x.plan.chips(), x.plan.tp) <= std::make_pair(y.plan.chips(), y.plan.tp));
        }
    }
}

TEST_CASE("adding a flash tier never shrinks the feasible set")
{
    Gen g(78);
    for (int i = 0; i < 200; ++i)
    {
        ModelSpec m = testsupport::random_toy_model(g);
        RequestSpec r = small_request(g);
        r.batch = g.uint(1, 4);
        NodeSpec plain = random_node(g, m, r, false);
        NodeSpec with_flash = plain;
        with_flash.tiers.push_back({testsupport::builtin().device("HBF"), 1});
        ExploreRequest req;
        req.budget = g.uint(1, 8);
        req.objectives = {Objective::Chips};
        req.threads = 1;
        std::size_t a = 0, b = 0;
        try
        {
            a = explore(m, r, plain, req).feasible;
        }
        catch (const UnsatisfiableError &)
        {
        }
        try
        {
            b = explore(m, r, with_flash, req).feasible;
        }
        catch (const UnsatisfiableError &)
        {
        }
        CHECK(b >= a);
    }
}
