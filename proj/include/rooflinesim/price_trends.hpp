// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rooflinesim
{

struct PricePoint
{
    double year = 0.0;  // fractional year
    double usd_per_gb = 0.0;
    std::optional<double> size_kb;
    std::optional<double> cost_usd;
    std::string description;
};

struct SkippedRow
{
    std::size_t row = 0;  // 1-based line number in the file, header is row 1
    std::string reason;
};

struct IngestResult
{
    std::vector<PricePoint> points;  // sorted by year (stable)
    std::vector<SkippedRow> skipped;  // only populated in lenient mode
};

/// Parses `year,usd_per_gb[,size_kb,cost_usd,description]` CSV (RFC 4180
/// quoting). Strict mode throws on the first malformed row with its number.
IngestResult ingest_price_history(std::string_view csv_text, bool lenient = false);

/// One (year, value) observation; the value is $/GB or $/(GB/s).
struct TrendSample
{
    double year = 0.0;
    double value = 0.0;
};

std::vector<TrendSample> capacity_series(const std::vector<PricePoint> &points);

/// $/(GB/s) per row, using the module count and DDR speed grade parsed from
/// the description ("2x 16GB DIMM DDR4-3200" is 2 x 25.6 GB/s). Rows without
/// a speed grade or cost are left out.
std::vector<TrendSample> bandwidth_series(const std::vector<PricePoint> &points);

/// Peak transfer rate in bytes/s of one module described by `description`.
std::optional<double> module_bandwidth(std::string_view description);

struct TrendFit
{
    double annual_factor = 1.0;
    double intercept_usd_per_gb = 0.0;  // fitted value at window start
    double r_squared = 1.0;
    double window_start = 0.0;
    double window_end = 0.0;
    std::size_t n_points = 0;
};

/// OLS of ln(value) on year over samples with year in [start, end].
TrendFit fit_trend(const std::vector<TrendSample> &samples, double window_start, double window_end);
TrendFit fit_trend(const std::vector<PricePoint> &points, double window_start, double window_end);

double project_cost(const TrendFit &fit, double year);

/// Normalised HBM $/GB anchors {2023: 1.00, 2025: 1.35}.
std::vector<PricePoint> builtin_hbm_index();

/// value(2025) / value(2023); both years must be present exactly.
double hbm_trend_check(const std::vector<PricePoint> &hbm_index);

}  // namespace rooflinesim
