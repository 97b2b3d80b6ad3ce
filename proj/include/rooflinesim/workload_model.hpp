// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace rooflinesim
{

struct MoeSpec
{
    std::uint64_t n_experts = 1;
    std::uint64_t top_k = 1;
    std::uint64_t shared_ffn_dim = 0;  // 0 means no shared expert

    bool operator==(const MoeSpec &) const = default;
};

/// Decoder-only transformer. For MoE models `ffn_dim` is the width of one
/// expert.
struct ModelSpec
{
    std::uint64_t layers = 1;
    std::uint64_t d_model = 1;
    std::uint64_t n_heads = 1;
    std::uint64_t n_kv_heads = 1;
    std::uint64_t d_head = 1;
    std::uint64_t ffn_dim = 1;
    std::uint64_t vocab = 1;
    std::uint64_t dtype_bytes = 2;
    bool gated = true;  // 3 FFN matrices when true, 2 otherwise
    std::optional<MoeSpec> moe;

    bool operator==(const ModelSpec &) const = default;
};

void validate(const ModelSpec &m);

struct RequestSpec
{
    std::uint64_t input_len = 1;
    std::uint64_t output_len = 0;
    std::uint64_t thought_len = 0;
    std::uint64_t batch = 1;
    std::uint64_t rag_corpus_bytes = 0;
    double modality_flops_multiplier = 1.0;
    bool compute_only = false;  // diffusion-style: no KV cache

    std::uint64_t total_tokens() const { return input_len + thought_len + output_len; }

    bool operator==(const RequestSpec &) const = default;
};

void validate(const RequestSpec &r);

enum class DataClass
{
    Weights,
    KvCache,
    SlowContext,
    Activations,
};

inline constexpr std::array<DataClass, 4> kAllDataClasses = {DataClass::Weights, DataClass::KvCache,
                                                             DataClass::SlowContext, DataClass::Activations};

std::string_view to_string(DataClass c);
std::optional<DataClass> parse_data_class(std::string_view s);

enum class Phase
{
    Prefill,
    DecodeStep,
};

std::string_view to_string(Phase p);

/// Per-token activation footprint in units of d_model elements.
inline constexpr std::uint64_t kActivationMultiplier = 8;

// Parameter counts.
std::uint64_t embedding_params(const ModelSpec &m);
std::uint64_t attention_params_per_layer(const ModelSpec &m);
std::uint64_t expert_params(const ModelSpec &m);  // one FFN of width ffn_dim
std::uint64_t shared_ffn_params(const ModelSpec &m);
std::uint64_t total_params(const ModelSpec &m);

/// Throws Overflow beyond 2^63 bytes.
std::uint64_t weight_bytes(const ModelSpec &m);
std::uint64_t active_params_per_token(const ModelSpec &m);
std::uint64_t kv_bytes_per_token(const ModelSpec &m);

/// Total FLOPs for `tokens_processed` new tokens per sequence attending to a
/// context of `context_len` tokens.
double flops(const ModelSpec &m, Phase phase, std::uint64_t context_len, std::uint64_t tokens_processed,
             std::uint64_t batch, double modality_flops_multiplier = 1.0);

struct MemoryDemand
{
    std::array<std::uint64_t, 4> bytes{};  // indexed by DataClass

    std::uint64_t operator[](DataClass c) const { return bytes[static_cast<std::size_t>(c)]; }
    std::uint64_t &operator[](DataClass c) { return bytes[static_cast<std::size_t>(c)]; }
};

MemoryDemand memory_demand(const ModelSpec &m, const RequestSpec &r);

/// Expected number of distinct experts per layer touched by `tokens`
/// independent uniform top-k routings.
double expected_experts_touched(const ModelSpec &m, double tokens);

}  // namespace rooflinesim
