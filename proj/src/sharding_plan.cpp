// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/sharding_plan.hpp"

#include "rooflinesim/error.hpp"

namespace rooflinesim
{

namespace
{

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b)
{
    return a / b + (a % b != 0);
}

}  // namespace

const TierSlot &activation_tier(const NodeSpec &node)
{
    require(!node.tiers.empty(), "node has no memory tiers");
    const TierSlot *best = nullptr;
    for (const auto &t : node.tiers)
        if (t.device.write_endurance == WriteEndurance::High && (!best || t.read_bw() > best->read_bw()))
            best = &t;
    if (best)
        return *best;
    for (const auto &t : node.tiers)
        if (!best || t.read_bw() > best->read_bw())
            best = &t;
    return *best;
}

Placement resolve_placement(const Placement &p, const ModelSpec &m, const RequestSpec &r, const NodeSpec &node)
{
    (void)m;
    Placement out = p;
    out[DataClass::Activations] = activation_tier(node).device.name;

    auto need = [&](DataClass c, bool required) {
        const auto &name = out[c];
        const std::string field = "sharding.placement." + std::string(to_string(c));
        if (!name)
        {
            if (required)
                fail(ErrorKind::MissingPlacement, "placement for " + std::string(to_string(c)) + " is required", field);
            return;
        }
        if (!node.find_tier(*name))
            fail(ErrorKind::UnknownTier, "node '" + node.name + "' has no tier '" + *name + "'", field);
    };
    need(DataClass::Weights, true);
    need(DataClass::KvCache, !r.compute_only);
    need(DataClass::SlowContext, r.rag_corpus_bytes > 0);
    return out;
}

ShardLayout shard_layout(const ModelSpec &m, const RequestSpec &r, const ShardingPlan &plan)
{
    validate(m);
    validate(r);
    require(plan.tp >= 1 && plan.pp >= 1 && plan.ep >= 1 && plan.dp >= 1, "parallel degrees must be >= 1");

    ShardLayout s;
    s.replica_batch = ceil_div(r.batch, plan.dp);
    s.rank_batch = ceil_div(s.replica_batch, plan.ep);

    const std::uint64_t experts = m.moe ? m.moe->n_experts : 0;
    const std::uint64_t per_layer_dense = attention_params_per_layer(m) + shared_ffn_params(m) +
                                          (m.moe ? 0 : expert_params(m));
    const std::uint64_t dense_bytes = (embedding_params(m) + m.layers * per_layer_dense) * m.dtype_bytes;
    const std::uint64_t expert_bytes = m.layers * experts * expert_params(m) * m.dtype_bytes;
    const std::uint64_t tp_pp = plan.tp * plan.pp;

    const std::uint64_t kv_heads_per_chip = ceil_div(m.n_kv_heads, plan.tp);
    s.kv_record_bytes = 2 * kv_heads_per_chip * m.d_head * m.dtype_bytes;
    s.kv_path_bytes_per_token = r.compute_only ? 0 : m.layers * s.kv_record_bytes;
    const std::uint64_t kv_chip_per_token = ceil_div(m.layers, plan.pp) * s.kv_record_bytes;

    s.per_chip[DataClass::Weights] = ceil_div(dense_bytes, tp_pp) + ceil_div(expert_bytes, tp_pp * plan.ep);
    s.per_chip[DataClass::KvCache] = r.compute_only ? 0 : kv_chip_per_token * r.total_tokens() * s.rank_batch;
    s.per_chip[DataClass::SlowContext] =
        ceil_div(r.rag_corpus_bytes, plan.shared_context ? plan.chips() : plan.replica_chips());
    s.per_chip[DataClass::Activations] = s.rank_batch * m.d_model * m.dtype_bytes * kActivationMultiplier;

    s.dense_read_bytes = static_cast<double>(m.layers * per_layer_dense * m.dtype_bytes) / double(plan.tp);
    s.expert_read_bytes = m.moe ? static_cast<double>(m.layers * expert_params(m) * m.dtype_bytes) / double(plan.tp) : 0.0;
    return s;
}

double CommVolume::operator[](CollectiveKind k) const
{
    switch (k)
    {
        case CollectiveKind::AllReduce: return all_reduce;
        case CollectiveKind::MoeDispatch: return moe_dispatch;
        case CollectiveKind::MoeCollect: return moe_collect;
        case CollectiveKind::Broadcast: return 0.0;
    }
    return 0.0;
}

CommVolume comm_volume_per_step(const ShardingPlan &plan, const ModelSpec &m, const RequestSpec &r,
                                std::uint64_t tokens)
{
    validate(m);
    const double b = static_cast<double>(ceil_div(r.batch, plan.dp)) * static_cast<double>(tokens);
    const double row = static_cast<double>(m.d_model * m.dtype_bytes);
    CommVolume v;
    if (plan.tp > 1)
        v.all_reduce = 2.0 * double(m.layers) * b * row;  // after attention and after the FFN
    if (plan.ep > 1 && m.moe)
    {
        v.moe_dispatch = double(m.layers) * b * double(m.moe->top_k) * row;
        v.moe_collect = v.moe_dispatch;
    }
    if (plan.pp > 1)
        v.pipeline_p2p = double(plan.pp - 1) * b * row;
    return v;
}

}  // namespace rooflinesim
