// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "rooflinesim/hardware_catalog.hpp"
#include "rooflinesim/interconnect_model.hpp"
#include "rooflinesim/workload_model.hpp"

namespace rooflinesim
{

/// DataClass -> tier (device) name. Activations are never user-placed.
struct Placement
{
    std::array<std::optional<std::string>, 4> tier;

    const std::optional<std::string> &operator[](DataClass c) const { return tier[static_cast<std::size_t>(c)]; }
    std::optional<std::string> &operator[](DataClass c) { return tier[static_cast<std::size_t>(c)]; }

    bool operator==(const Placement &) const = default;
};

struct ShardingPlan
{
    std::uint64_t tp = 1;
    std::uint64_t pp = 1;
    std::uint64_t ep = 1;
    std::uint64_t dp = 1;
    Placement placement;
    bool shared_context = false;  // SlowContext split across all chips instead of per replica

    std::uint64_t replica_chips() const { return tp * pp * ep; }
    std::uint64_t chips() const { return tp * pp * ep * dp; }

    bool operator==(const ShardingPlan &) const = default;
};

/// Highest-bandwidth High-endurance tier; falls back to the fastest tier.
const TierSlot &activation_tier(const NodeSpec &node);

/// Placement with Activations filled in and every referenced tier checked.
/// Throws MissingPlacement / UnknownTier.
Placement resolve_placement(const Placement &p, const ModelSpec &m, const RequestSpec &r, const NodeSpec &node);

/// Byte layout of one chip under a plan.
///
/// A replica is tp*pp*ep chips. Embeddings, attention and any shared FFN are
/// split over tp*pp and replicated across ep; routed experts are split over
/// tp*pp*ep. The replica batch is divided among ep ranks for attention. KV is
/// split by layers over pp and by kv heads over tp (replicated once tp
/// exceeds the kv head count).
struct ShardLayout
{
    std::uint64_t replica_batch = 1;  // ceil(batch / dp)
    std::uint64_t rank_batch = 1;     // ceil(replica_batch / ep)

    MemoryDemand per_chip;  // resident bytes per class

    // Critical-path quantities for one token step (pipeline stages run in
    // sequence, so a path covers every layer).
    double dense_read_bytes = 0;   // non-embedding, non-expert weights / tp
    double expert_read_bytes = 0;  // one expert across all layers / tp
    std::uint64_t kv_path_bytes_per_token = 0;  // per sequence, all layers
    std::uint64_t kv_record_bytes = 0;          // one token's K+V in one layer
};

ShardLayout shard_layout(const ModelSpec &m, const RequestSpec &r, const ShardingPlan &plan);

/// Per-step communication of one replica, in bytes.
struct CommVolume
{
    double all_reduce = 0;
    double moe_dispatch = 0;
    double moe_collect = 0;
    double pipeline_p2p = 0;

    double operator[](CollectiveKind k) const;
};

/// Volumes for one decode step (tokens = 1) or one prefill (tokens = input).
CommVolume comm_volume_per_step(const ShardingPlan &plan, const ModelSpec &m, const RequestSpec &r,
                                std::uint64_t tokens = 1);

}  // namespace rooflinesim
