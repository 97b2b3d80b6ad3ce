// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/cost_metrics.hpp"

#include <cmath>

#include "rooflinesim/error.hpp"
#include "rooflinesim/units.hpp"

namespace rooflinesim
{

void validate(const CostModel &c)
{
    require(c.electricity_usd_per_kwh >= 0, "cost_model.electricity_usd_per_kwh must be >= 0",
            "cost_model.electricity_usd_per_kwh");
    require(c.pue >= 1, "cost_model.pue must be >= 1", "cost_model.pue");
    require(c.grid_intensity_g_per_kwh >= 0, "cost_model.grid_intensity_g_per_kwh must be >= 0",
            "cost_model.grid_intensity_g_per_kwh");
    require(c.embodied_kg_per_chip >= 0 && c.embodied_kg_per_memory_gb >= 0, "embodied carbon must be >= 0",
            "cost_model.embodied_kg_per_chip");
    if (!(c.lifetime_hours > 0))
        fail(ErrorKind::ZeroLifetime, "cost_model.lifetime_hours must be > 0", "cost_model.lifetime_hours");
}

double system_power(const SystemSpec &system, const CostModel &cost)
{
    return static_cast<double>(system.chips) * system.node.total_power_watts() * cost.pue;
}

double tco_rate(double capex_usd, double facility_watts, const CostModel &cost)
{
    validate(cost);
    return capex_usd / cost.lifetime_hours + facility_watts / 1000.0 * cost.electricity_usd_per_kwh;
}

double tco_rate(const SystemSpec &system, const CostModel &cost)
{
    return tco_rate(static_cast<double>(system.chips) * system.node.total_capex_usd(), system_power(system, cost),
                    cost);
}

double embodied_kg(const SystemSpec &system, const CostModel &cost)
{
    const double memory_gb = static_cast<double>(system.node.total_memory_bytes()) / units::kGB;
    return static_cast<double>(system.chips) *
           (cost.embodied_kg_per_chip + cost.embodied_kg_per_memory_gb * memory_gb);
}

CostReport ratio_metrics(double throughput, const SystemSpec &system, const CostModel &cost)
{
    require(throughput >= 0 && std::isfinite(throughput), "throughput must be finite and >= 0");
    validate(cost);
    CostReport r;
    r.system_power_watts = system_power(system, cost);
    r.tco_rate = tco_rate(system, cost);
    if (throughput == 0)
        return r;

    if (r.tco_rate > 0)
        r.tokens_per_usd = throughput * units::kSecondsPerHour / r.tco_rate;
    if (r.system_power_watts > 0)
        r.tokens_per_joule = throughput / r.system_power_watts;
    const double operational = r.system_power_watts / 1000.0 * cost.grid_intensity_g_per_kwh /
                               units::kSecondsPerHour / throughput;
    const double embodied = embodied_kg(system, cost) * 1000.0 /
                            (cost.lifetime_hours * units::kSecondsPerHour * throughput);
    r.co2e_per_token = operational + embodied;
    return r;
}

}  // namespace rooflinesim
