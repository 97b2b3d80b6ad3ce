// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rooflinesim/hardware_catalog.hpp"
#include "rooflinesim/roofline_engine.hpp"
#include "support/model_gen.hpp"

namespace testsupport
{

inline const rooflinesim::Catalog &builtin()
{
    static const rooflinesim::Catalog c = rooflinesim::load_catalog("");
    return c;
}

inline rooflinesim::ModelSpec toy_model()
{
    rooflinesim::ModelSpec m;
    m.layers = 2;
    m.d_model = 8;
    m.n_heads = 2;
    m.n_kv_heads = 2;
    m.d_head = 4;
    m.ffn_dim = 16;
    m.vocab = 10;
    m.dtype_bytes = 2;
    return m;
}

inline rooflinesim::NodeSpec single_tier_node(const rooflinesim::MemoryDeviceSpec &dev, std::uint32_t stacks,
                                              double peak_flops)
{
    rooflinesim::NodeSpec n;
    n.name = "test-node";
    n.peak_flops = peak_flops;
    n.sram_bytes = 0;
    n.tiers = {{dev, stacks}};
    n.network_ports = 4;
    n.chip_power_watts = 500;
    n.capex_usd = 10000;
    return n;
}

inline rooflinesim::SystemSetup hbm_setup(const std::string &tier = "HBM4")
{
    rooflinesim::SystemSetup s;
    s.node = builtin().node("hbm8");
    s.plan.placement[rooflinesim::DataClass::Weights] = tier;
    s.plan.placement[rooflinesim::DataClass::KvCache] = tier;
    return s;
}

// A random two-tier node (fast High-endurance tier plus optional second tier)
// and a random single-replica plan valid for `m`.
inline rooflinesim::SystemSetup random_setup(Gen &g, const rooflinesim::ModelSpec &m)
{
    using namespace rooflinesim;
    MemoryDeviceSpec fast;
    fast.name = "fast";
    fast.capacity_bytes = g.uint(1ull << 20, 1ull << 40);
    fast.read_bw = g.log_real(1e10, 1e13);
    fast.write_bw = fast.read_bw * g.real(0.2, 1.0);
    fast.power_watts = g.real(5, 80);
    fast.read_latency = 1e-7;
    fast.read_granularity_bytes = 1ull << g.uint(5, 7);
    fast.cost_per_byte = 1e-8;
    fast.cost_per_bw = 1e-9;
    SystemSetup s;
    s.node = single_tier_node(fast, static_cast<std::uint32_t>(g.uint(1, 8)), g.log_real(1e13, 1e16));
    if (g.coin())
    {
        MemoryDeviceSpec slow = fast;
        slow.name = "slow";
        slow.read_bw = fast.read_bw * g.real(0.05, 1.0);
        slow.write_bw = slow.read_bw / 4;
        slow.write_endurance = WriteEndurance::Low;
        slow.read_granularity_bytes = 4096;
        s.node.tiers.push_back({slow, static_cast<std::uint32_t>(g.uint(1, 4))});
    }
    auto divisors = [](std::uint64_t n) {
        std::vector<std::uint64_t> d;
        for (std::uint64_t i = 1; i <= n; ++i)
            if (n % i == 0)
                d.push_back(i);
        return d;
    };
    s.plan.tp = g.pick(divisors(m.n_heads));
    s.plan.pp = g.pick(divisors(m.layers));
    s.plan.ep = m.moe ? g.pick(divisors(m.moe->n_experts)) : 1;
    s.plan.dp = 1;
    s.plan.placement[DataClass::Weights] = g.pick(std::vector<std::string>{"fast", s.node.tiers.back().device.name});
    s.plan.placement[DataClass::KvCache] = "fast";
    s.plan.placement[DataClass::SlowContext] = "fast";
    s.topology.kind = g.coin() ? TopologyKind{FullyConnected{}} : TopologyKind{Tree{g.uint(2, 8), 0}};
    s.topology.in_network_collectives = std::holds_alternative<Tree>(s.topology.kind) && g.coin();
    s.knobs.overlap = g.coin() ? 0.0 : g.real(0, 1);
    return s;
}

inline rooflinesim::RequestSpec random_request(Gen &g)
{
    rooflinesim::RequestSpec r;
    r.input_len = g.uint(1, 4096);
    r.output_len = g.uint(0, 64);
    r.thought_len = g.uint(0, 16);
    r.batch = g.uint(1, 64);
    r.modality_flops_multiplier = g.coin(0.8) ? 1.0 : g.real(1, 3);
    return r;
}

}  // namespace testsupport
