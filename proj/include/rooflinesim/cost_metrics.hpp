// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include "rooflinesim/hardware_catalog.hpp"

namespace rooflinesim
{

/// Placeholder defaults, overridable per scenario.
struct CostModel
{
    double electricity_usd_per_kwh = 0.08;
    double pue = 1.1;
    double grid_intensity_g_per_kwh = 200.0;
    double lifetime_hours = 4 * 8760.0;
    double embodied_kg_per_chip = 150.0;
    double embodied_kg_per_memory_gb = 0.3;

    bool operator==(const CostModel &) const = default;
};

void validate(const CostModel &c);

struct SystemSpec
{
    NodeSpec node;
    std::uint64_t chips = 1;
};

struct CostReport
{
    double system_power_watts = 0;  // facility power (PUE applied)
    double tco_rate = 0;            // USD per hour
    std::optional<double> tokens_per_usd;
    std::optional<double> tokens_per_joule;
    std::optional<double> co2e_per_token;  // grams
};

/// chips x (chip power + stack powers) x pue.
double system_power(const SystemSpec &system, const CostModel &cost);

/// Capex amortised over the lifetime plus energy, in USD per hour.
double tco_rate(double capex_usd, double facility_watts, const CostModel &cost);
double tco_rate(const SystemSpec &system, const CostModel &cost);

/// Embodied kgCO2e of the whole system.
double embodied_kg(const SystemSpec &system, const CostModel &cost);

/// `throughput` in tokens/s for the whole system. Ratios are absent when it is 0.
CostReport ratio_metrics(double throughput, const SystemSpec &system, const CostModel &cost);

}  // namespace rooflinesim
