// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/interconnect_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rooflinesim/error.hpp"

namespace rooflinesim
{

namespace
{

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};

std::uint64_t product(const std::vector<std::uint64_t> &dims)
{
    std::uint64_t p = 1;
    for (auto d : dims)
        p *= d;
    return p;
}

// Sum of ring distances from one position to all positions of a k-cycle.
std::uint64_t ring_distance_sum(std::uint64_t k)
{
    std::uint64_t s = 0;
    for (std::uint64_t d = 0; d < k; ++d)
        s += std::min(d, k - d);
    return s;
}

std::uint64_t ipow(std::uint64_t b, std::uint32_t e)
{
    std::uint64_t r = 1;
    for (std::uint32_t i = 0; i < e; ++i)
    {
        if (r > UINT64_MAX / b)
            return UINT64_MAX;
        r *= b;
    }
    return r;
}

[[noreturn]] void inconsistent(std::string_view kind, std::uint64_t n)
{
    fail(ErrorKind::InconsistentNodes,
         std::string(kind) + " topology cannot hold " + std::to_string(n) + " nodes");
}

// Each closed form accumulates the integer sum of hop counts over ordered
// pairs and divides once, so results match a graph search exactly.
double ordered_pair_mean(std::uint64_t total, std::uint64_t n)
{
    return static_cast<double>(total) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double torus_hops(const Torus &t, std::uint64_t n)
{
    if (product(t.dims) != n)
        inconsistent("torus", n);
    std::uint64_t total = 0;
    for (auto k : t.dims)
        total += n * (n / k) * ring_distance_sum(k);
    return ordered_pair_mean(total, n);
}

double tree_hops(const Tree &t, std::uint64_t n)
{
    const std::uint32_t levels = tree_depth(t, n);
    // Ordered leaf pairs whose lowest common switch sits at level h cross
    // 2h - 1 switches. same[h] counts ordered pairs sharing a level-h subtree.
    std::vector<std::uint64_t> same(levels + 1, 0);
    for (std::uint32_t h = 1; h <= levels; ++h)
    {
        const std::uint64_t block = std::min(ipow(t.fanout, h), n);
        const std::uint64_t full = n / block, rest = n % block;
        same[h] = full * block * (block - 1) + rest * (rest ? rest - 1 : 0);
    }
    std::uint64_t total = 0;
    for (std::uint32_t h = 1; h <= levels; ++h)
        total += (same[h] - same[h - 1]) * (2 * h - 1);
    return ordered_pair_mean(total, n);
}

double dragonfly_hops(const Dragonfly &d, std::uint64_t n)
{
    const std::uint64_t g = d.groups, p = d.per_group;
    if (g * p != n)
        inconsistent("dragonfly", n);
    std::vector<std::uint64_t> residue_count(p, 0);
    for (std::uint64_t c = 0; c < g; ++c)
        ++residue_count[c % p];
    std::uint64_t occupied = 0;
    for (auto c : residue_count)
        occupied += c > 0;

    std::uint64_t total = g * p * (p - 1);  // intra-group pairs, 1 hop
    for (std::uint64_t a = 0; a < g; ++a)
        for (std::uint64_t b = 0; b < g; ++b)
        {
            if (a == b)
                continue;
            // Direct route: walk to the gateway towards b, cross, walk away
            // from b's gateway.
            total += p * p + 2 * p * (p - 1);
            // When both gateways share residue r0, a pair (r, r) with r != r0
            // has a 2-hop detour through any third group with residue r.
            if (a % p == b % p)
                total -= occupied - (residue_count[a % p] > 0 ? 1 : 0);
        }
    return ordered_pair_mean(total, n);
}

std::vector<std::uint64_t> balanced_factorization(std::uint64_t n, std::uint32_t ndims)
{
    std::vector<std::uint64_t> primes;
    for (std::uint64_t f = 2; f * f <= n; ++f)
        while (n % f == 0)
        {
            primes.push_back(f);
            n /= f;
        }
    if (n > 1)
        primes.push_back(n);
    std::sort(primes.rbegin(), primes.rend());
    std::vector<std::uint64_t> bins(std::max<std::uint32_t>(ndims, 1), 1);
    for (auto f : primes)
        *std::min_element(bins.begin(), bins.end()) *= f;
    std::erase(bins, 1);
    std::sort(bins.rbegin(), bins.rend());
    return bins;
}

}  // namespace

std::string_view kind_name(const TopologyKind &kind)
{
    return std::visit(overloaded{[](const FullyConnected &) { return "fully_connected"; },
                                 [](const Torus &) { return "torus"; }, [](const Tree &) { return "tree"; },
                                 [](const Dragonfly &) { return "dragonfly"; }},
                      kind);
}

void validate(const Topology &t)
{
    require(t.link_bw > 0, "topology.link_bw must be > 0", "topology.link_bw_gbps");
    require(t.per_hop_latency > 0, "topology.per_hop_latency must be > 0", "topology.per_hop_latency_ns");
    require(t.per_message_overhead > 0, "topology.per_message_overhead must be > 0",
            "topology.per_message_overhead_ns");
    require(t.overhead_reduction >= 0 && t.overhead_reduction < 1, "topology.overhead_reduction must be in [0, 1)",
            "topology.overhead_reduction");
    require(t.moe_skew >= 1, "topology.moe_skew must be >= 1", "topology.moe_skew");
    std::visit(overloaded{[](const FullyConnected &) {},
                          [](const Torus &x) {
                              for (auto d : x.dims)
                                  require(d >= 2, "torus dims must be >= 2", "topology.dims");
                          },
                          [](const Tree &x) { require(x.fanout >= 2, "tree fanout must be >= 2", "topology.fanout"); },
                          [](const Dragonfly &x) {
                              require(x.groups >= 1 && x.per_group >= 1, "dragonfly groups/per_group must be >= 1",
                                      "topology.groups");
                          }},
               t.kind);
}

std::string_view to_string(CollectiveKind k)
{
    switch (k)
    {
        case CollectiveKind::AllReduce: return "all_reduce";
        case CollectiveKind::Broadcast: return "broadcast";
        case CollectiveKind::MoeDispatch: return "moe_dispatch";
        case CollectiveKind::MoeCollect: return "moe_collect";
    }
    return "?";
}

std::uint32_t tree_depth(const Tree &tree, std::uint64_t n_nodes)
{
    require(tree.fanout >= 2, "tree fanout must be >= 2");
    if (tree.levels > 0)
    {
        if (ipow(tree.fanout, tree.levels) < n_nodes)
            inconsistent("tree", n_nodes);
        return tree.levels;
    }
    std::uint32_t levels = 1;
    while (ipow(tree.fanout, levels) < n_nodes)
        ++levels;
    return levels;
}

double avg_hops(const Topology &t, std::uint64_t n_nodes)
{
    require(n_nodes >= 1, "avg_hops needs at least one node");
    if (n_nodes == 1)
        return 0.0;
    return std::visit(overloaded{[&](const FullyConnected &) { return 1.0; },
                                 [&](const Torus &x) { return torus_hops(x, n_nodes); },
                                 [&](const Tree &x) { return tree_hops(x, n_nodes); },
                                 [&](const Dragonfly &x) { return dragonfly_hops(x, n_nodes); }},
                      t.kind);
}

Topology scale_topology(const Topology &t, std::uint64_t chips)
{
    require(chips >= 1, "topology needs at least one chip");
    Topology out = t;
    if (auto *torus = std::get_if<Torus>(&out.kind))
    {
        if (!torus->dims.empty())
        {
            if (chips > 1 && product(torus->dims) != chips)
                inconsistent("torus", chips);
        }
        else if (chips > 1)
            torus->dims = balanced_factorization(chips, torus->ndims == 0 ? 2 : torus->ndims);
    }
    else if (auto *tree = std::get_if<Tree>(&out.kind))
    {
        tree_depth(*tree, chips);
    }
    else if (auto *df = std::get_if<Dragonfly>(&out.kind))
    {
        if (df->groups * df->per_group != chips)
        {
            std::uint64_t p = std::min(df->per_group, chips);
            while (chips % p != 0)
                --p;
            df->per_group = p;
            df->groups = chips / p;
        }
    }
    return out;
}

double effective_message_overhead(const Topology &t)
{
    return t.per_message_overhead * (1.0 - t.overhead_reduction);
}

double message_time(const Topology &t, std::uint64_t n_nodes, double bytes)
{
    require(bytes >= 0, "message size must be >= 0");
    return effective_message_overhead(t) + avg_hops(t, n_nodes) * t.per_hop_latency + bytes / t.link_bw;
}

namespace
{

// A group of `group` nodes communicating inside a fabric of `system` nodes:
// distances come from the whole fabric.
struct Span
{
    std::uint64_t group;
    std::uint64_t system;
};

Span span_of(std::uint64_t n_nodes, std::uint64_t system_nodes)
{
    Span s{n_nodes, system_nodes == 0 ? n_nodes : system_nodes};
    require(s.system >= s.group, "collective group larger than the system");
    return s;
}

double hop_message(const Topology &t, const Span &s, double bytes)
{
    return message_time(t, s.system, bytes);
}

const Tree &require_tree(const Topology &t, const char *what)
{
    const auto *tree = std::get_if<Tree>(&t.kind);
    if (!tree)
        fail(ErrorKind::Unsupported, std::string(what) + " needs a tree topology, got " +
                                         std::string(kind_name(t.kind)));
    return *tree;
}

}  // namespace

double ring_all_reduce_time(const Topology &t, std::uint64_t n_nodes, double bytes, std::uint64_t system_nodes)
{
    const Span s = span_of(n_nodes, system_nodes);
    if (s.group <= 1)
        return 0.0;
    const double n = static_cast<double>(s.group);
    return 2.0 * (n - 1.0) * hop_message(t, s, bytes / n);
}

double in_network_all_reduce_time(const Topology &t, std::uint64_t n_nodes, double bytes,
                                  std::uint64_t system_nodes)
{
    const Tree &tree = require_tree(t, "in-network all-reduce");
    const Span s = span_of(n_nodes, system_nodes);
    if (s.group <= 1)
        return 0.0;
    return 2.0 * tree_depth(tree, s.system) * t.per_hop_latency + 2.0 * bytes / t.link_bw;
}

double binomial_broadcast_time(const Topology &t, std::uint64_t n_nodes, double bytes, std::uint64_t system_nodes)
{
    const Span s = span_of(n_nodes, system_nodes);
    if (s.group <= 1)
        return 0.0;
    const double rounds = std::ceil(std::log2(static_cast<double>(s.group)));
    return rounds * hop_message(t, s, bytes);
}

double in_network_broadcast_time(const Topology &t, std::uint64_t n_nodes, double bytes,
                                 std::uint64_t system_nodes)
{
    const Tree &tree = require_tree(t, "in-network broadcast");
    const Span s = span_of(n_nodes, system_nodes);
    if (s.group <= 1)
        return 0.0;
    return tree_depth(tree, s.system) * t.per_hop_latency + bytes / t.link_bw;
}

double collective_time(const Topology &t, CollectiveKind kind, double bytes_per_node, std::uint64_t n_nodes,
                       std::uint64_t system_nodes)
{
    require(n_nodes >= 1, "collective needs at least one node");
    require(bytes_per_node >= 0, "collective size must be >= 0");
    const Span s = span_of(n_nodes, system_nodes);
    if (s.group == 1)
        return 0.0;
    const bool in_net = t.in_network_collectives;
    switch (kind)
    {
        case CollectiveKind::AllReduce:
        {
            double ring = ring_all_reduce_time(t, s.group, bytes_per_node, s.system);
            return in_net ? std::min(ring, in_network_all_reduce_time(t, s.group, bytes_per_node, s.system)) : ring;
        }
        case CollectiveKind::Broadcast:
        {
            double tree = binomial_broadcast_time(t, s.group, bytes_per_node, s.system);
            return in_net ? std::min(tree, in_network_broadcast_time(t, s.group, bytes_per_node, s.system)) : tree;
        }
        case CollectiveKind::MoeDispatch:
        case CollectiveKind::MoeCollect:
        {
            const double n = static_cast<double>(s.group);
            return (n - 1.0) * hop_message(t, s, t.moe_skew * bytes_per_node / n);
        }
    }
    return 0.0;
}

}  // namespace rooflinesim
