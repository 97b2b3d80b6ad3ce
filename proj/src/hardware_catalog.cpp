// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/hardware_catalog.hpp"

#include <bit>
#include <cmath>
#include <set>

#include "catalog_json.hpp"
#include "json_fields.hpp"
#include "rooflinesim/units.hpp"

namespace rooflinesim
{

using detail::json;
using detail::ObjectReader;

std::string_view to_string(WriteEndurance endurance)
{
    return endurance == WriteEndurance::High ? "high" : "low";
}

void validate(const MemoryDeviceSpec &s)
{
    const std::string where = "memory device '" + s.name + "': ";
    require(!s.name.empty(), "memory device without a name");
    require(s.capacity_bytes > 0, where + "capacity must be > 0");
    require(s.read_bw > 0, where + "read bandwidth must be > 0");
    require(s.power_watts > 0, where + "power must be > 0");
    require(s.read_latency > 0, where + "read latency must be > 0");
    require(s.cost_per_byte > 0 && s.cost_per_bw > 0, where + "costs must be > 0");
    require(s.write_bw > 0 || (s.write_bw == 0 && s.write_endurance == WriteEndurance::Low),
            where + "write bandwidth may be 0 only for low-endurance devices");
    require(s.read_granularity_bytes > 0 && std::has_single_bit(s.read_granularity_bytes),
            where + "read granularity must be a power of two");
}

void validate(const HbmGeneration &g)
{
    require(g.pins == 1024 || g.pins == 2048, "HBM generation '" + g.name + "': pins must be 1024 or 2048");
    require(g.dies_per_stack >= 1, "HBM generation '" + g.name + "': dies_per_stack must be >= 1");
    require(g.pin_rate_gbps >= 0, "HBM generation '" + g.name + "': pin rate must be >= 0");
}

double stack_bandwidth(const HbmGeneration &gen)
{
    return static_cast<double>(gen.pins) * gen.pin_rate_gbps * 1e9 / 8.0;
}

std::uint64_t stack_capacity(const HbmGeneration &gen)
{
    return static_cast<std::uint64_t>(gen.dies_per_stack) * gen.capacity_per_die_bytes;
}

MemoryEfficiency derive_efficiency(const MemoryDeviceSpec &spec)
{
    if (!(spec.power_watts > 0))
        fail(ErrorKind::ZeroPower, "memory device '" + spec.name + "' has zero power");
    return {spec.read_bw / spec.power_watts, static_cast<double>(spec.capacity_bytes) / spec.power_watts};
}

double TierSlot::device_cost_usd() const
{
    return device.cost_per_byte * static_cast<double>(device.capacity_bytes) * stack_count;
}

const TierSlot *NodeSpec::find_tier(std::string_view tier_name) const
{
    for (const auto &t : tiers)
        if (t.device.name == tier_name)
            return &t;
    return nullptr;
}

double NodeSpec::total_power_watts() const
{
    double p = chip_power_watts;
    for (const auto &t : tiers)
        p += t.power_watts();
    return p;
}

double NodeSpec::total_capex_usd() const
{
    double c = capex_usd;
    for (const auto &t : tiers)
        c += t.device_cost_usd();
    return c;
}

std::uint64_t NodeSpec::total_memory_bytes() const
{
    std::uint64_t b = 0;
    for (const auto &t : tiers)
        b += t.capacity_bytes();
    return b;
}

void validate(const NodeSpec &node)
{
    const std::string where = "node '" + node.name + "': ";
    require(!node.tiers.empty(), where + "needs at least one memory tier");
    require(node.peak_flops > 0, where + "peak_flops must be > 0");
    require(node.chip_power_watts >= 0 && node.capex_usd >= 0, where + "power and capex must be >= 0");
    std::set<std::string> names;
    for (const auto &t : node.tiers)
    {
        validate(t.device);
        require(t.stack_count >= 1, where + "tier '" + t.device.name + "' needs stack_count >= 1");
        require(names.insert(t.device.name).second, where + "duplicate tier '" + t.device.name + "'");
    }
}

MemoryDeviceSpec apply_variant(const MemoryDeviceSpec &base, const VariantKind &kind)
{
    MemoryDeviceSpec out = base;
    if (const auto *pnm = std::get_if<Pnm>(&kind))
    {
        if (!(pnm->bw_multiplier >= 2.0 && pnm->bw_multiplier <= 5.0))
            fail(ErrorKind::VariantRange, "PNM bandwidth multiplier must be in [2, 5]");
        out.name = base.name + "-pnm";
        out.read_bw = base.read_bw * pnm->bw_multiplier;
        out.write_bw = base.write_bw * pnm->bw_multiplier;
        out.cost_per_bw = base.cost_per_bw / pnm->bw_multiplier;
    }
    else if (const auto *s3d = std::get_if<Stacked3D>(&kind))
    {
        if (!(s3d->power_divisor >= 2.0 && s3d->power_divisor <= 3.0))
            fail(ErrorKind::VariantRange, "3D stacking power divisor must be in [2, 3]");
        out.name = base.name + "-3d";
        out.power_watts = base.power_watts / s3d->power_divisor;
    }
    else
    {
        out.name = base.name + "-hbf";
        out.write_endurance = WriteEndurance::Low;
        out.read_granularity_bytes = kFlashPageBytes;
    }
    return out;
}

Catalog::Catalog(std::map<std::string, MemoryDeviceSpec> devices,
                 std::map<std::string, HbmGeneration> generations,
                 std::map<std::string, NodeSpec> nodes) :
    devices_(std::move(devices)), generations_(std::move(generations)), nodes_(std::move(nodes))
{
}

namespace
{

template <typename Map>
const typename Map::mapped_type &lookup(const Map &m, std::string_view name, const char *what)
{
    auto it = m.find(std::string(name));
    if (it == m.end())
        fail(ErrorKind::UnknownName, std::string("unknown ") + what + " '" + std::string(name) + "'");
    return it->second;
}

}  // namespace

const MemoryDeviceSpec &Catalog::device(std::string_view name) const { return lookup(devices_, name, "memory device"); }
const HbmGeneration &Catalog::generation(std::string_view name) const
{
    return lookup(generations_, name, "HBM generation");
}
const NodeSpec &Catalog::node(std::string_view name) const { return lookup(nodes_, name, "node"); }

// Table-derived built-ins. Values not given in the source tables are marked
// "default": HBF/flash write bandwidth (read/4), read latencies, and all
// costs and node-level figures.
std::string_view builtin_catalog_document()
{
    static constexpr std::string_view kDoc = R"({
  "hbm_generations": [
    {"name": "HBM",   "pin_rate_gbps": 1.0, "pins": 1024, "dies_per_stack": 4,  "capacity_per_die_gib": 1},
    {"name": "HBM2",  "pin_rate_gbps": 2.4, "pins": 1024, "dies_per_stack": 8,  "capacity_per_die_gib": 1},
    {"name": "HBM2E", "pin_rate_gbps": 3.6, "pins": 1024, "dies_per_stack": 12, "capacity_per_die_gib": 2},
    {"name": "HBM3",  "pin_rate_gbps": 6.4, "pins": 1024, "dies_per_stack": 12, "capacity_per_die_gib": 2},
    {"name": "HBM3E", "pin_rate_gbps": 9.8, "pins": 1024, "dies_per_stack": 16, "capacity_per_die_gib": 3},
    {"name": "HBM4",  "pin_rate_gbps": 8.0, "pins": 2048, "dies_per_stack": 16, "capacity_per_die_gib": 4}
  ],
  "memory_devices": [
    {"name": "HBF", "capacity_gb": 512, "read_bw_gbps": 1638, "write_bw_gbps": 409.5, "power_w": 80,
     "read_latency_ns": 2000, "read_granularity_bytes": 4096, "write_endurance": "low", "cost_per_gb_usd": 1.5},
    {"name": "HBM4", "capacity_gb": 48, "read_bw_gbps": 1638, "write_bw_gbps": 1638, "power_w": 40,
     "read_latency_ns": 100, "read_granularity_bytes": 32, "write_endurance": "high", "cost_per_gb_usd": 15},
    {"name": "DDR5", "capacity_gb": 64, "read_bw_gbps": 51, "write_bw_gbps": 51, "power_w": 12,
     "read_latency_ns": 100, "read_granularity_bytes": 64, "write_endurance": "high", "cost_per_gb_usd": 4},
    {"name": "LPDDR5", "capacity_gb": 16, "read_bw_gbps": 51, "write_bw_gbps": 51, "power_w": 3,
     "read_latency_ns": 100, "read_granularity_bytes": 64, "write_endurance": "high", "cost_per_gb_usd": 5},
    {"name": "FlashCard", "capacity_gb": 4096, "read_bw_gbps": 4, "write_bw_gbps": 1, "power_w": 50,
     "read_latency_ns": 20000, "read_granularity_bytes": 4096, "write_endurance": "low", "cost_per_gb_usd": 0.08}
  ],
  "nodes": [
    {"name": "hbm8", "peak_tflops": 2500, "sram_mib": 128, "network_ports": 4, "chip_power_w": 700,
     "capex_usd": 20000, "tiers": [{"device": "HBM4", "stack_count": 8}]},
    {"name": "hbm2-small", "peak_tflops": 1000, "sram_mib": 64, "network_ports": 4, "chip_power_w": 300,
     "capex_usd": 8000, "tiers": [{"device": "HBM4", "stack_count": 2}]},
    {"name": "hbm4-hbf4", "peak_tflops": 2500, "sram_mib": 128, "network_ports": 4, "chip_power_w": 700,
     "capex_usd": 20000, "tiers": [{"device": "HBM4", "stack_count": 4}, {"device": "HBF", "stack_count": 4}]},
    {"name": "hbm8-3d", "peak_tflops": 2500, "sram_mib": 128, "network_ports": 4, "chip_power_w": 700,
     "capex_usd": 20000,
     "tiers": [{"device": "HBM4", "stack_count": 8, "variant": {"kind": "stacked3d", "power_divisor": 2}}]},
    {"name": "ddr-pnm", "peak_tflops": 400, "sram_mib": 64, "network_ports": 2, "chip_power_w": 150,
     "capex_usd": 6000,
     "tiers": [{"device": "DDR5", "stack_count": 8, "variant": {"kind": "pnm", "bw_multiplier": 4}}]}
  ]
})";
    return kDoc;
}

namespace
{

constexpr double kGiBd = static_cast<double>(units::kGiB);

struct RawDocument
{
    std::map<std::string, MemoryDeviceSpec> devices;
    std::map<std::string, HbmGeneration> generations;
    std::map<std::string, json> nodes;  // resolved after the device merge
    std::map<std::string, std::string> node_paths;
};

MemoryDeviceSpec parse_device(const json &j, const std::string &path)
{
    ObjectReader r(j, path);
    MemoryDeviceSpec d;
    d.name = r.string("name");
    d.capacity_bytes = detail::to_bytes(
        r.quantity("capacity", {{"_bytes", 1.0}, {"_gb", units::kGB}, {"_gib", kGiBd}}), r.sub("capacity"));
    d.read_bw = r.quantity("read_bw", {{"_bytes_per_s", 1.0}, {"_gbps", units::kGB}});
    d.write_bw = r.quantity("write_bw", {{"_bytes_per_s", 1.0}, {"_gbps", units::kGB}});
    d.power_watts = r.number("power_w");
    d.read_latency = r.quantity("read_latency", {{"_s", 1.0}, {"_ns", units::kNano}, {"_us", units::kMicro}});
    d.read_granularity_bytes = r.count("read_granularity_bytes");
    std::string endurance = r.string("write_endurance");
    if (endurance == "high")
        d.write_endurance = WriteEndurance::High;
    else if (endurance == "low")
        d.write_endurance = WriteEndurance::Low;
    else
        detail::config_error(r.sub("write_endurance"), "expected \"high\" or \"low\"");
    d.cost_per_byte = r.quantity("cost_per", {{"_byte_usd", 1.0}, {"_gb_usd", 1.0 / units::kGB}});
    auto per_bw = r.quantity_opt("cost_per", {{"_bw_usd", 1.0}, {"_gbps_usd", 1.0 / units::kGB}});
    // Without an explicit bandwidth price, derive it from the purchase price.
    d.cost_per_bw = per_bw ? *per_bw : d.cost_per_byte * static_cast<double>(d.capacity_bytes) / d.read_bw;
    r.reject_unknown();
    try
    {
        validate(d);
    }
    catch (const Error &e)
    {
        detail::config_error(path, e.what());
    }
    return d;
}

HbmGeneration parse_generation(const json &j, const std::string &path)
{
    ObjectReader r(j, path);
    HbmGeneration g;
    g.name = r.string("name");
    g.pin_rate_gbps = r.number("pin_rate_gbps");
    g.pins = static_cast<std::uint32_t>(r.count("pins"));
    g.dies_per_stack = static_cast<std::uint32_t>(r.count("dies_per_stack"));
    g.capacity_per_die_bytes = detail::to_bytes(
        r.quantity("capacity_per_die", {{"_bytes", 1.0}, {"_gib", kGiBd}, {"_gb", units::kGB}}),
        r.sub("capacity_per_die"));
    r.reject_unknown();
    try
    {
        validate(g);
    }
    catch (const Error &e)
    {
        detail::config_error(path, e.what());
    }
    return g;
}

VariantKind parse_variant(const json &j, const std::string &path)
{
    ObjectReader r(j, path);
    std::string kind = r.string("kind");
    VariantKind v;
    if (kind == "pnm")
        v = Pnm{r.number("bw_multiplier")};
    else if (kind == "stacked3d")
        v = Stacked3D{r.number("power_divisor")};
    else if (kind == "hbf")
        v = HbfConversion{};
    else
        detail::config_error(r.sub("kind"), "expected \"pnm\", \"stacked3d\" or \"hbf\"");
    r.reject_unknown();
    return v;
}

std::string read_name(const json &j, const std::string &path)
{
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
        detail::config_error(detail::join_path(path, "name"), "missing required field");
    return j["name"].get<std::string>();
}

void read_document(const json &doc, RawDocument &out)
{
    ObjectReader root(doc, "");
    if (const json *arr = root.find("hbm_generations"))
    {
        if (!arr->is_array())
            detail::config_error("hbm_generations", "expected an array");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            auto path = detail::index_path("hbm_generations", i);
            auto g = parse_generation((*arr)[i], path);
            if (!seen.insert(g.name).second)
                fail(ErrorKind::DuplicateName, path + ": duplicate name '" + g.name + "'", path);
            out.generations[g.name] = g;
        }
    }
    if (const json *arr = root.find("memory_devices"))
    {
        if (!arr->is_array())
            detail::config_error("memory_devices", "expected an array");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            auto path = detail::index_path("memory_devices", i);
            auto d = parse_device((*arr)[i], path);
            if (!seen.insert(d.name).second)
                fail(ErrorKind::DuplicateName, path + ": duplicate name '" + d.name + "'", path);
            out.devices[d.name] = d;
        }
    }
    if (const json *arr = root.find("nodes"))
    {
        if (!arr->is_array())
            detail::config_error("nodes", "expected an array");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            auto path = detail::index_path("nodes", i);
            auto name = read_name((*arr)[i], path);
            if (!seen.insert(name).second)
                fail(ErrorKind::DuplicateName, path + ": duplicate name '" + name + "'", path);
            out.nodes[name] = (*arr)[i];
            out.node_paths[name] = path;
        }
    }
    root.reject_unknown();
}

}  // namespace

NodeSpec parse_node(const json &j, const std::string &path, const std::map<std::string, MemoryDeviceSpec> &devices)
{
    ObjectReader r(j, path);
    NodeSpec n;
    n.name = r.string("name");
    n.peak_flops = r.quantity("peak", {{"_flops", 1.0}, {"_tflops", 1e12}});
    n.sram_bytes = r.has("sram_mib") || r.has("sram_bytes")
                       ? detail::to_bytes(r.quantity("sram", {{"_bytes", 1.0}, {"_mib", double(units::kMiB)}}),
                                          r.sub("sram"))
                       : 0;
    n.network_ports = static_cast<std::uint32_t>(r.count_or("network_ports", 1));
    n.chip_power_watts = r.number("chip_power_w");
    n.capex_usd = r.number_or("capex_usd", 0.0);
    const json &tiers = r.at("tiers");
    if (!tiers.is_array())
        detail::config_error(r.sub("tiers"), "expected an array");
    for (std::size_t i = 0; i < tiers.size(); ++i)
    {
        auto tpath = detail::index_path(r.sub("tiers"), i);
        ObjectReader tr(tiers[i], tpath);
        TierSlot slot;
        const json &dev = tr.at("device");
        if (dev.is_string())
        {
            auto it = devices.find(dev.get<std::string>());
            if (it == devices.end())
                fail(ErrorKind::UnknownName, tr.sub("device") + ": unknown memory device '" + dev.get<std::string>() + "'",
                     tr.sub("device"));
            slot.device = it->second;
        }
        else
            slot.device = parse_device(dev, tr.sub("device"));
        if (const json *v = tr.find("variant"))
        {
            try
            {
                slot.device = apply_variant(slot.device, parse_variant(*v, tr.sub("variant")));
            }
            catch (const Error &e)
            {
                if (e.kind() == ErrorKind::VariantRange)
                    throw Error(e.kind(), tr.sub("variant") + ": " + e.what(), tr.sub("variant"));
                throw;
            }
        }
        slot.stack_count = static_cast<std::uint32_t>(tr.count("stack_count"));
        tr.reject_unknown();
        n.tiers.push_back(std::move(slot));
    }
    r.reject_unknown();
    try
    {
        validate(n);
    }
    catch (const Error &e)
    {
        detail::config_error(path, e.what());
    }
    return n;
}

Catalog load_catalog(std::string_view document)
{
    RawDocument merged;
    read_document(detail::parse_document(builtin_catalog_document(), "built-in catalog"), merged);

    bool blank = document.find_first_not_of(" \t\r\n") == std::string_view::npos;
    if (!blank)
    {
        RawDocument user;
        read_document(detail::parse_document(document, "catalog"), user);
        for (auto &[k, v] : user.devices)
            merged.devices[k] = v;
        for (auto &[k, v] : user.generations)
            merged.generations[k] = v;
        for (auto &[k, v] : user.nodes)
        {
            merged.nodes[k] = v;
            merged.node_paths[k] = user.node_paths[k];
        }
    }

    std::map<std::string, NodeSpec> nodes;
    for (const auto &[name, j] : merged.nodes)
        nodes[name] = parse_node(j, merged.node_paths[name], merged.devices);
    return Catalog(std::move(merged.devices), std::move(merged.generations), std::move(nodes));
}

json device_to_json(const MemoryDeviceSpec &d)
{
    return json{{"name", d.name},
                {"capacity_bytes", d.capacity_bytes},
                {"read_bw_bytes_per_s", d.read_bw},
                {"write_bw_bytes_per_s", d.write_bw},
                {"power_w", d.power_watts},
                {"read_latency_s", d.read_latency},
                {"read_granularity_bytes", d.read_granularity_bytes},
                {"write_endurance", std::string(to_string(d.write_endurance))},
                {"cost_per_byte_usd", d.cost_per_byte},
                {"cost_per_bw_usd", d.cost_per_bw}};
}

json node_to_json(const NodeSpec &n)
{
    json tiers = json::array();
    for (const auto &t : n.tiers)
        tiers.push_back({{"device", device_to_json(t.device)}, {"stack_count", t.stack_count}});
    return json{{"name", n.name},
                {"peak_flops", n.peak_flops},
                {"sram_bytes", n.sram_bytes},
                {"network_ports", n.network_ports},
                {"chip_power_w", n.chip_power_watts},
                {"capex_usd", n.capex_usd},
                {"tiers", tiers}};
}

std::string serialize_catalog(const Catalog &catalog)
{
    json doc;
    doc["memory_devices"] = json::array();
    for (const auto &[_, d] : catalog.devices())
        doc["memory_devices"].push_back(device_to_json(d));
    doc["hbm_generations"] = json::array();
    for (const auto &[_, g] : catalog.generations())
        doc["hbm_generations"].push_back({{"name", g.name},
                                          {"pin_rate_gbps", g.pin_rate_gbps},
                                          {"pins", g.pins},
                                          {"dies_per_stack", g.dies_per_stack},
                                          {"capacity_per_die_bytes", g.capacity_per_die_bytes}});
    doc["nodes"] = json::array();
    for (const auto &[_, n] : catalog.nodes())
        doc["nodes"].push_back(node_to_json(n));
    return doc.dump(2);
}

}  // namespace rooflinesim
