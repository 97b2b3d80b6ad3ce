// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/workload_model.hpp"

#include <cmath>
#include <limits>

#include "rooflinesim/error.hpp"

namespace rooflinesim
{

namespace
{

constexpr std::uint64_t kMaxBytes = std::uint64_t(1) << 63;

std::uint64_t mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t out;
    if (__builtin_mul_overflow(a, b, &out))
        fail(ErrorKind::Overflow, "model size overflows 64-bit arithmetic");
    return out;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t out;
    if (__builtin_add_overflow(a, b, &out))
        fail(ErrorKind::Overflow, "model size overflows 64-bit arithmetic");
    return out;
}

}  // namespace

void validate(const ModelSpec &m)
{
    require(m.layers >= 1, "model.layers must be >= 1", "model.layers");
    require(m.d_model >= 1, "model.d_model must be >= 1", "model.d_model");
    require(m.n_heads >= 1, "model.n_heads must be >= 1", "model.n_heads");
    require(m.n_kv_heads >= 1, "model.n_kv_heads must be >= 1", "model.n_kv_heads");
    require(m.d_head >= 1, "model.d_head must be >= 1", "model.d_head");
    require(m.ffn_dim >= 1, "model.ffn_dim must be >= 1", "model.ffn_dim");
    require(m.vocab >= 1, "model.vocab must be >= 1", "model.vocab");
    require(m.dtype_bytes >= 1, "model.dtype_bytes must be >= 1", "model.dtype_bytes");
    require(m.n_heads % m.n_kv_heads == 0, "model.n_kv_heads must divide model.n_heads", "model.n_kv_heads");
    if (m.moe)
    {
        require(m.moe->n_experts >= 1, "model.moe.n_experts must be >= 1", "model.moe.n_experts");
        require(m.moe->top_k >= 1 && m.moe->top_k <= m.moe->n_experts,
                "model.moe.top_k must be in [1, n_experts]", "model.moe.top_k");
    }
}

void validate(const RequestSpec &r)
{
    require(r.input_len >= 1, "request.input_len must be >= 1", "request.input_len");
    require(r.batch >= 1, "request.batch must be >= 1", "request.batch");
    require(r.modality_flops_multiplier >= 1.0 && std::isfinite(r.modality_flops_multiplier),
            "request.modality_flops_multiplier must be >= 1", "request.modality_flops_multiplier");
}

std::string_view to_string(DataClass c)
{
    switch (c)
    {
        case DataClass::Weights: return "weights";
        case DataClass::KvCache: return "kv_cache";
        case DataClass::SlowContext: return "slow_context";
        case DataClass::Activations: return "activations";
    }
    return "?";
}

std::optional<DataClass> parse_data_class(std::string_view s)
{
    for (auto c : kAllDataClasses)
        if (to_string(c) == s)
            return c;
    return std::nullopt;
}

std::string_view to_string(Phase p)
{
    return p == Phase::Prefill ? "prefill" : "decode";
}

std::uint64_t embedding_params(const ModelSpec &m)
{
    return mul(m.vocab, m.d_model);
}

std::uint64_t attention_params_per_layer(const ModelSpec &m)
{
    std::uint64_t q = mul(m.d_model, mul(m.n_heads, m.d_head));
    std::uint64_t kv = mul(2, mul(m.d_model, mul(m.n_kv_heads, m.d_head)));
    std::uint64_t o = q;
    return add(add(q, kv), o);
}

std::uint64_t expert_params(const ModelSpec &m)
{
    return mul(m.gated ? 3 : 2, mul(m.d_model, m.ffn_dim));
}

std::uint64_t shared_ffn_params(const ModelSpec &m)
{
    if (!m.moe)
        return 0;
    return mul(m.gated ? 3 : 2, mul(m.d_model, m.moe->shared_ffn_dim));
}

std::uint64_t total_params(const ModelSpec &m)
{
    validate(m);
    std::uint64_t experts = m.moe ? m.moe->n_experts : 1;
    std::uint64_t per_layer = add(attention_params_per_layer(m), add(mul(experts, expert_params(m)), shared_ffn_params(m)));
    return add(embedding_params(m), mul(m.layers, per_layer));
}

std::uint64_t weight_bytes(const ModelSpec &m)
{
    std::uint64_t bytes = mul(total_params(m), m.dtype_bytes);
    if (bytes > kMaxBytes)
        fail(ErrorKind::Overflow, "weight bytes exceed 2^63");
    return bytes;
}

std::uint64_t active_params_per_token(const ModelSpec &m)
{
    validate(m);
    std::uint64_t experts = m.moe ? m.moe->top_k : 1;
    std::uint64_t per_layer = add(attention_params_per_layer(m), add(mul(experts, expert_params(m)), shared_ffn_params(m)));
    return mul(m.layers, per_layer);
}

std::uint64_t kv_bytes_per_token(const ModelSpec &m)
{
    validate(m);
    return mul(2, mul(m.layers, mul(m.n_kv_heads, mul(m.d_head, m.dtype_bytes))));
}

double flops(const ModelSpec &m, Phase phase, std::uint64_t context_len, std::uint64_t tokens_processed,
             std::uint64_t batch, double modality_flops_multiplier)
{
    if (phase == Phase::Prefill)
        require(context_len >= tokens_processed, "prefill context must cover the processed tokens");
    else
        require(tokens_processed <= 1, "a decode step processes one token per sequence");
    require(modality_flops_multiplier >= 1.0, "modality_flops_multiplier must be >= 1");

    // Exact integer totals, rounded to double once.
    using u128 = unsigned __int128;
    const u128 work = u128(tokens_processed) * batch;
    const u128 dense = u128(2) * active_params_per_token(m) * work;
    const u128 attention = u128(4) * m.layers * m.n_kv_heads * m.d_head * u128(context_len) * work;
    return static_cast<double>(dense + attention) * modality_flops_multiplier;
}

MemoryDemand memory_demand(const ModelSpec &m, const RequestSpec &r)
{
    validate(r);
    MemoryDemand d;
    d[DataClass::Weights] = weight_bytes(m);
    d[DataClass::KvCache] = r.compute_only ? 0 : mul(kv_bytes_per_token(m), mul(r.total_tokens(), r.batch));
    d[DataClass::SlowContext] = r.rag_corpus_bytes;
    d[DataClass::Activations] = mul(mul(r.batch, m.d_model), mul(m.dtype_bytes, kActivationMultiplier));
    return d;
}

double expected_experts_touched(const ModelSpec &m, double tokens)
{
    if (!m.moe)
        return 1.0;
    const double e = static_cast<double>(m.moe->n_experts);
    const double k = static_cast<double>(m.moe->top_k);
    if (tokens <= 0)
        return 0.0;
    return e * (1.0 - std::pow(1.0 - k / e, tokens));
}

}  // namespace rooflinesim
