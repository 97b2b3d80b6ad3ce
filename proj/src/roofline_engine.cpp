// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/roofline_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rooflinesim/error.hpp"

namespace rooflinesim
{

std::string_view to_string(Bottleneck b)
{
    switch (b)
    {
        case Bottleneck::Compute: return "Compute";
        case Bottleneck::MemoryBandwidth: return "MemoryBandwidth";
        case Bottleneck::Interconnect: return "Interconnect";
    }
    return "?";
}

std::string_view to_symbol(Mark m)
{
    switch (m)
    {
        case Mark::None: return "";
        case Mark::Derived: return "?";
        case Mark::Primary: return "✓";
    }
    return "";
}

void validate(const EngineKnobs &k)
{
    require(k.compute_utilization > 0 && k.compute_utilization <= 1, "compute utilization must be in (0, 1]",
            "overrides.compute_utilization");
    require(k.memory_utilization > 0 && k.memory_utilization <= 1, "memory utilization must be in (0, 1]",
            "overrides.memory_utilization");
    require(k.overlap >= 0 && k.overlap <= 1, "overlap must be in [0, 1]", "overrides.overlap");
}

double attainable_flops(double ai, double peak_flops, double bw)
{
    require(ai >= 0, "arithmetic intensity must be >= 0");
    return std::min(peak_flops, ai * bw);
}

double effective_read_bw(const MemoryDeviceSpec &dev, double avg_request_bytes)
{
    require(avg_request_bytes > 0, "request size must be > 0");
    const double g = static_cast<double>(dev.read_granularity_bytes);
    const double rounded = std::ceil(avg_request_bytes / g) * g;
    return dev.read_bw * (avg_request_bytes / rounded);
}

Bottleneck classify_label(double compute_time, double memory_time, double network_time)
{
    if (network_time > std::max(compute_time, memory_time))
        return Bottleneck::Interconnect;
    return compute_time > memory_time ? Bottleneck::Compute : Bottleneck::MemoryBandwidth;
}

namespace
{

PhaseEstimate finish(Phase phase, double compute, double memory, double network, double path_flops, double bytes,
                     double replica_flops)
{
    PhaseEstimate e;
    e.phase = phase;
    e.compute_time = compute;
    e.memory_time = memory;
    e.network_time = network;
    e.step_time = std::max(compute, memory) + network;
    e.flops = replica_flops;
    e.bytes = bytes;
    e.arithmetic_intensity = bytes > 0 ? path_flops / bytes : 0.0;
    e.bottleneck = classify_label(compute, memory, network);
    return e;
}

double divide_or_inf(double bytes, double bw)
{
    if (bytes == 0)
        return 0.0;
    return bw > 0 ? bytes / bw : std::numeric_limits<double>::infinity();
}

}  // namespace

PhaseModel::PhaseModel(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup) :
    model_(m), request_(r), setup_(setup)
{
    validate(m);
    validate(r);
    validate(setup.node);
    validate(setup.topology);
    validate(setup.knobs);
    const ShardingPlan &plan = setup.plan;
    placement_ = resolve_placement(plan.placement, m, r, setup.node);
    fabric_ = scale_topology(setup.topology, plan.chips());
    layout_ = shard_layout(m, r, plan);
    path_share_ = 1.0 / static_cast<double>(plan.tp * plan.ep);

    const double mu = setup.knobs.memory_utilization;
    const double experts_per_rank =
        expected_experts_touched(m, static_cast<double>(layout_.replica_batch)) / static_cast<double>(plan.ep);
    const double weight_bytes_step = layout_.dense_read_bytes + layout_.expert_read_bytes * experts_per_rank;
    const double kv_bytes_per_context =
        static_cast<double>(layout_.kv_path_bytes_per_token) * static_cast<double>(layout_.rank_batch);

    decode_traffic_.assign(setup.node.tiers.size(), {});
    for (std::size_t i = 0; i < setup.node.tiers.size(); ++i)
    {
        const TierSlot &tier = setup.node.tiers[i];
        const std::string &name = tier.device.name;
        if (placement_[DataClass::Weights] == name)
            decode_traffic_[i].fixed_seconds += divide_or_inf(weight_bytes_step, tier.read_bw() * mu);
        if (placement_[DataClass::KvCache] == name && kv_bytes_per_context > 0)
        {
            const double bw = effective_read_bw(tier.device, double(layout_.kv_record_bytes)) * tier.stack_count;
            decode_traffic_[i].per_context_seconds += kv_bytes_per_context / (bw * mu);
        }
    }
    decode_fixed_bytes_ = weight_bytes_step;
    decode_bytes_per_context_ = kv_bytes_per_context;

    // Network: per-call payloads of this rank, all calls of one step.
    auto network = [&](double tokens) {
        const std::uint64_t chips = plan.chips();
        const double row = static_cast<double>(m.d_model * m.dtype_bytes) * double(layout_.rank_batch) * tokens;
        const double layers = static_cast<double>(m.layers);
        double t = 0;
        if (plan.tp > 1)
            t += 2.0 * layers * collective_time(fabric_, CollectiveKind::AllReduce, row, plan.tp, chips);
        if (plan.ep > 1 && m.moe)
        {
            const double routed = row * static_cast<double>(m.moe->top_k);
            t += layers * (collective_time(fabric_, CollectiveKind::MoeDispatch, routed, plan.ep, chips) +
                           collective_time(fabric_, CollectiveKind::MoeCollect, routed, plan.ep, chips));
        }
        if (plan.pp > 1)
            t += static_cast<double>(plan.pp - 1) * message_time(fabric_, chips, row);
        return t * (1.0 - setup.knobs.overlap);
    };
    decode_network_ = network(1.0);
    prefill_network_ = network(static_cast<double>(r.input_len));
}

PhaseEstimate PhaseModel::decode_step(std::uint64_t context_len) const
{
    const double ctx = static_cast<double>(context_len);
    double memory = 0;
    for (const auto &t : decode_traffic_)
        memory += t.fixed_seconds + t.per_context_seconds * ctx;
    const double replica_flops = flops(model_, Phase::DecodeStep, context_len, 1, layout_.replica_batch,
                                       request_.modality_flops_multiplier);
    const double path_flops = replica_flops * path_share_;
    const double compute = path_flops / (setup_.node.peak_flops * setup_.knobs.compute_utilization);
    const double bytes = decode_fixed_bytes_ + decode_bytes_per_context_ * ctx;
    return finish(Phase::DecodeStep, compute, memory, decode_network_, path_flops, bytes, replica_flops);
}

PhaseEstimate PhaseModel::prefill() const
{
    const ModelSpec &m = model_;
    const ShardingPlan &plan = setup_.plan;
    const double mu = setup_.knobs.memory_utilization;
    const std::uint64_t input = request_.input_len;

    const double experts_per_rank =
        expected_experts_touched(m, double(layout_.replica_batch) * double(input)) / static_cast<double>(plan.ep);
    const double weight_bytes = layout_.dense_read_bytes + layout_.expert_read_bytes * experts_per_rank;
    const double kv_written = static_cast<double>(layout_.kv_path_bytes_per_token) * double(input) *
                              static_cast<double>(layout_.rank_batch);

    double memory = 0;
    for (const auto &tier : setup_.node.tiers)
    {
        const std::string &name = tier.device.name;
        if (placement_[DataClass::Weights] == name)
            memory += divide_or_inf(weight_bytes, tier.read_bw() * mu);
        if (placement_[DataClass::KvCache] == name)
            memory += divide_or_inf(kv_written, tier.write_bw() * mu);
    }
    const double replica_flops =
        flops(m, Phase::Prefill, input, input, layout_.replica_batch, request_.modality_flops_multiplier);
    const double path_flops = replica_flops * path_share_;
    const double compute = path_flops / (setup_.node.peak_flops * setup_.knobs.compute_utilization);
    (void)plan;
    return finish(Phase::Prefill, compute, memory, prefill_network_, path_flops, weight_bytes + kv_written,
                  replica_flops);
}

ScenarioTiming PhaseModel::scenario_timing() const
{
    ScenarioTiming out;
    const std::uint64_t input = request_.input_len;
    const std::uint64_t generated = request_.thought_len + request_.output_len;

    const double pre = prefill().step_time;
    double ttft = pre;
    for (std::uint64_t j = 0; j < request_.thought_len; ++j)
        ttft += decode_step(input + j).step_time;
    double done = ttft;
    for (std::uint64_t j = request_.thought_len; j < generated; ++j)
        done += decode_step(input + j).step_time;
    out.ttft = ttft;
    out.time_to_completion = done;

    const double batch = static_cast<double>(layout_.replica_batch);
    const double decode_time = done - pre;
    if (generated > 0 && decode_time > 0)
        out.decode_tokens_per_second = batch * static_cast<double>(generated) / decode_time;
    else
        out.decode_tokens_per_second = batch / decode_step(input).step_time;

    const double it_power = static_cast<double>(setup_.plan.chips()) * setup_.node.total_power_watts();
    const double tokens = static_cast<double>(request_.batch) * static_cast<double>(generated > 0 ? generated : input);
    out.energy_per_token = it_power * done / tokens;
    return out;
}

PhaseEstimate decode_step(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup,
                          std::uint64_t context_len)
{
    return PhaseModel(m, r, setup).decode_step(context_len);
}

PhaseEstimate prefill(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup)
{
    return PhaseModel(m, r, setup).prefill();
}

ScenarioTiming scenario_timing(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup)
{
    return PhaseModel(m, r, setup).scenario_timing();
}

BottleneckRow classify(const PhaseEstimate &e, bool capacity_pressure)
{
    BottleneckRow row;
    row.capacity = capacity_pressure ? Mark::Primary : Mark::None;
    row.bandwidth = e.memory_time >= e.compute_time ? Mark::Primary : Mark::None;
    row.compute = e.compute_time > e.memory_time ? Mark::Primary : Mark::None;
    if (e.bottleneck == Bottleneck::Interconnect)
        row.interconnect = Mark::Primary;
    else if (e.network_time > 0.1 * e.step_time || capacity_pressure)
        row.interconnect = Mark::Derived;
    return row;
}

}  // namespace rooflinesim
