// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace rooflinesim
{

struct FullyConnected
{
    bool operator==(const FullyConnected &) const = default;
};

/// Wrap-around grid. An empty `dims` with `ndims` set means "balanced
/// factorisation of whatever chip count the topology is instantiated at".
struct Torus
{
    std::vector<std::uint64_t> dims;
    std::uint32_t ndims = 0;

    bool operator==(const Torus &) const = default;
};

/// Switches are internal nodes, compute nodes are leaves filled left to
/// right. `levels` = 0 picks the smallest depth that fits.
struct Tree
{
    std::uint64_t fanout = 2;
    std::uint32_t levels = 0;

    bool operator==(const Tree &) const = default;
};

/// All-to-all inside a group; the single global link between groups a and b
/// joins member (b mod per_group) of a with member (a mod per_group) of b.
struct Dragonfly
{
    std::uint64_t groups = 1;
    std::uint64_t per_group = 1;

    bool operator==(const Dragonfly &) const = default;
};

using TopologyKind = std::variant<FullyConnected, Torus, Tree, Dragonfly>;

std::string_view kind_name(const TopologyKind &kind);

struct Topology
{
    TopologyKind kind = FullyConnected{};
    double link_bw = 100e9;            // bytes/s per link
    double per_hop_latency = 100e-9;   // s
    double per_message_overhead = 1e-6;  // s
    bool in_network_collectives = false;
    double overhead_reduction = 0.0;   // [0, 1) cut to per-message overhead
    double moe_skew = 1.0;             // hot-expert load multiplier, >= 1

    bool operator==(const Topology &) const = default;
};

void validate(const Topology &t);

enum class CollectiveKind
{
    AllReduce,
    Broadcast,
    MoeDispatch,
    MoeCollect,
};

std::string_view to_string(CollectiveKind k);

/// Mean shortest-path hop count over ordered pairs of distinct nodes.
/// Throws InconsistentNodes if `n_nodes` does not fit the topology.
double avg_hops(const Topology &t, std::uint64_t n_nodes);

/// Number of switch levels a leaf-to-root path crosses (Tree only).
std::uint32_t tree_depth(const Tree &tree, std::uint64_t n_nodes);

/// Concrete topology for `chips` nodes (see Torus/Tree/Dragonfly notes).
Topology scale_topology(const Topology &t, std::uint64_t chips);

double effective_message_overhead(const Topology &t);

/// overhead + avg_hops * hop latency + bytes / link_bw.
double message_time(const Topology &t, std::uint64_t n_nodes, double bytes);

// Individual algorithms, exposed for crossover analysis. `system_nodes`
// (0 = same as n_nodes) is the fabric size the group is embedded in; hop
// counts and tree depth come from the fabric.
double ring_all_reduce_time(const Topology &t, std::uint64_t n_nodes, double bytes, std::uint64_t system_nodes = 0);
double in_network_all_reduce_time(const Topology &t, std::uint64_t n_nodes, double bytes,
                                  std::uint64_t system_nodes = 0);
double binomial_broadcast_time(const Topology &t, std::uint64_t n_nodes, double bytes,
                               std::uint64_t system_nodes = 0);
double in_network_broadcast_time(const Topology &t, std::uint64_t n_nodes, double bytes,
                                 std::uint64_t system_nodes = 0);

/// With in-network collectives on a Tree, AllReduce and Broadcast take the
/// faster of the switch-aggregated and the host-based algorithm.
double collective_time(const Topology &t, CollectiveKind kind, double bytes_per_node, std::uint64_t n_nodes,
                       std::uint64_t system_nodes = 0);

}  // namespace rooflinesim
