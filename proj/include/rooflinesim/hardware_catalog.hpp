// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rooflinesim
{

enum class WriteEndurance
{
    High,
    Low,
};

std::string_view to_string(WriteEndurance endurance);

/// One memory technology tier as packaged (one HBM stack, one DIMM, one card).
struct MemoryDeviceSpec
{
    std::string name;
    std::uint64_t capacity_bytes = 0;
    double read_bw = 0.0;   // bytes/s
    double write_bw = 0.0;  // bytes/s; 0 only allowed for Low endurance
    double power_watts = 0.0;
    double read_latency = 0.0;  // seconds
    std::uint64_t read_granularity_bytes = 0;
    WriteEndurance write_endurance = WriteEndurance::High;
    double cost_per_byte = 0.0;  // USD/byte
    double cost_per_bw = 0.0;    // USD/(byte/s)

    bool operator==(const MemoryDeviceSpec &) const = default;
};

void validate(const MemoryDeviceSpec &spec);

struct HbmGeneration
{
    std::string name;
    double pin_rate_gbps = 0.0;  // gigabits/s per pin
    std::uint32_t pins = 0;
    std::uint32_t dies_per_stack = 0;
    std::uint64_t capacity_per_die_bytes = 0;

    bool operator==(const HbmGeneration &) const = default;
};

void validate(const HbmGeneration &gen);

/// bytes/s delivered by one stack: pins * pin_rate / 8.
double stack_bandwidth(const HbmGeneration &gen);
std::uint64_t stack_capacity(const HbmGeneration &gen);

struct MemoryEfficiency
{
    double bw_per_watt = 0.0;   // (bytes/s)/W
    double cap_per_watt = 0.0;  // bytes/W
};

MemoryEfficiency derive_efficiency(const MemoryDeviceSpec &spec);

struct TierSlot
{
    MemoryDeviceSpec device;
    std::uint32_t stack_count = 0;

    std::uint64_t capacity_bytes() const { return device.capacity_bytes * stack_count; }
    double read_bw() const { return device.read_bw * stack_count; }
    double write_bw() const { return device.write_bw * stack_count; }
    double power_watts() const { return device.power_watts * stack_count; }
    double device_cost_usd() const;

    bool operator==(const TierSlot &) const = default;
};

/// An accelerator chip plus the memory stacks wired to it. Tier names are the
/// device names and must be unique within a node.
struct NodeSpec
{
    std::string name;
    double peak_flops = 0.0;  // at the model's data type
    std::uint64_t sram_bytes = 0;
    std::vector<TierSlot> tiers;
    std::uint32_t network_ports = 0;
    double chip_power_watts = 0.0;  // compute die only
    double capex_usd = 0.0;         // chip + board, memory excluded

    const TierSlot *find_tier(std::string_view tier_name) const;
    /// chip_power + sum(stack_count * device power)
    double total_power_watts() const;
    /// capex_usd plus the purchase price of every memory stack.
    double total_capex_usd() const;
    std::uint64_t total_memory_bytes() const;

    bool operator==(const NodeSpec &) const = default;
};

void validate(const NodeSpec &node);

struct Pnm
{
    double bw_multiplier = 2.0;
};
struct Stacked3D
{
    double power_divisor = 2.0;
};
struct HbfConversion
{
};

using VariantKind = std::variant<Pnm, Stacked3D, HbfConversion>;

inline constexpr std::uint64_t kFlashPageBytes = 4096;

/// Processing-near-memory scales bandwidth (2x-5x), compute-on-base-die
/// stacking keeps bandwidth and divides power (2x-3x), and the HBF conversion
/// turns a device into a page-read, low-endurance flash tier.
MemoryDeviceSpec apply_variant(const MemoryDeviceSpec &base, const VariantKind &kind);

class Catalog
{
   public:
    Catalog() = default;
    Catalog(std::map<std::string, MemoryDeviceSpec> devices,
            std::map<std::string, HbmGeneration> generations,
            std::map<std::string, NodeSpec> nodes);

    const std::map<std::string, MemoryDeviceSpec> &devices() const { return devices_; }
    const std::map<std::string, HbmGeneration> &generations() const { return generations_; }
    const std::map<std::string, NodeSpec> &nodes() const { return nodes_; }

    const MemoryDeviceSpec &device(std::string_view name) const;
    const HbmGeneration &generation(std::string_view name) const;
    const NodeSpec &node(std::string_view name) const;

    bool operator==(const Catalog &) const = default;

   private:
    std::map<std::string, MemoryDeviceSpec> devices_;
    std::map<std::string, HbmGeneration> generations_;
    std::map<std::string, NodeSpec> nodes_;
};

/// The built-in entries as a catalog document (units in key suffixes).
std::string_view builtin_catalog_document();

/// Parses a catalog document and merges it over the built-ins; user entries
/// shadow built-ins with the same name. Node tiers that reference devices by
/// name are resolved after the merge, so shadowing a device also affects
/// built-in nodes that use it.
Catalog load_catalog(std::string_view document);

/// Serializes every entry with base-unit keys; load_catalog(serialize_catalog(c)) == c.
std::string serialize_catalog(const Catalog &catalog);

}  // namespace rooflinesim
