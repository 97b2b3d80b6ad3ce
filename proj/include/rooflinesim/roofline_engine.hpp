// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rooflinesim/hardware_catalog.hpp"
#include "rooflinesim/interconnect_model.hpp"
#include "rooflinesim/sharding_plan.hpp"
#include "rooflinesim/workload_model.hpp"

namespace rooflinesim
{

enum class Bottleneck
{
    Compute,
    MemoryBandwidth,
    Interconnect,
};

std::string_view to_string(Bottleneck b);

/// Utilisation and overlap knobs. Defaults are placeholders, not measurements.
struct EngineKnobs
{
    double compute_utilization = 0.6;
    double memory_utilization = 0.8;
    double overlap = 0.0;  // share of network time hidden behind compute/memory

    bool operator==(const EngineKnobs &) const = default;
};

void validate(const EngineKnobs &k);

struct PhaseEstimate
{
    Phase phase = Phase::DecodeStep;
    double compute_time = 0;
    double memory_time = 0;
    double network_time = 0;  // after overlap
    double step_time = 0;     // max(compute, memory) + network
    double arithmetic_intensity = 0;  // FLOP per byte moved on the critical path
    double flops = 0;                 // whole replica
    double bytes = 0;                 // critical path
    Bottleneck bottleneck = Bottleneck::MemoryBandwidth;
};

struct ScenarioTiming
{
    double ttft = 0;
    double time_to_completion = 0;
    double decode_tokens_per_second = 0;  // one replica
    double energy_per_token = 0;          // J per generated token, IT power
};

/// Everything fixed for one evaluated system.
struct SystemSetup
{
    NodeSpec node;
    ShardingPlan plan;
    Topology topology;  // family; instantiated at plan.chips()
    EngineKnobs knobs;
};

double attainable_flops(double ai, double peak_flops, double bw);

/// read_bw scaled by the useful share of granularity-rounded requests.
double effective_read_bw(const MemoryDeviceSpec &dev, double avg_request_bytes);

/// Label rule: Interconnect if network exceeds max(compute, memory), else
/// Compute if compute > memory, else MemoryBandwidth (ties included).
Bottleneck classify_label(double compute_time, double memory_time, double network_time);

/// Precomputed per-plan model. Memory and compute times are affine in the
/// decode context length, so a step costs O(tiers).
class PhaseModel
{
   public:
    PhaseModel(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup);

    PhaseEstimate prefill() const;
    PhaseEstimate decode_step(std::uint64_t context_len) const;
    ScenarioTiming scenario_timing() const;

    const ShardLayout &layout() const { return layout_; }
    double decode_network_time() const { return decode_network_; }

   private:
    struct TierTraffic
    {
        double fixed_seconds = 0;      // weights
        double per_context_seconds = 0;  // KV re-read, per context token
    };

    ModelSpec model_;
    RequestSpec request_;
    SystemSetup setup_;
    Topology fabric_;
    ShardLayout layout_;
    Placement placement_;
    double path_share_ = 1;  // 1 / (tp * ep)
    std::vector<TierTraffic> decode_traffic_;
    double decode_fixed_bytes_ = 0;
    double decode_bytes_per_context_ = 0;
    double decode_network_ = 0;
    double prefill_network_ = 0;
};

PhaseEstimate decode_step(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup,
                          std::uint64_t context_len);
PhaseEstimate prefill(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup);
ScenarioTiming scenario_timing(const ModelSpec &m, const RequestSpec &r, const SystemSetup &setup);

enum class Mark
{
    None,
    Derived,  // '?'
    Primary,  // '✓'
};

std::string_view to_symbol(Mark m);

/// One row of a bottleneck matrix: capacity, bandwidth, compute, interconnect.
struct BottleneckRow
{
    Mark capacity = Mark::None;
    Mark bandwidth = Mark::None;
    Mark compute = Mark::None;
    Mark interconnect = Mark::None;
};

/// `capacity_pressure` is true when the model does not fit a single chip.
BottleneckRow classify(const PhaseEstimate &e, bool capacity_pressure);

}  // namespace rooflinesim
