// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/price_trends.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>

#include "rooflinesim/error.hpp"
#include "rooflinesim/units.hpp"

namespace rooflinesim
{

namespace
{

struct CsvRecord
{
    std::size_t line = 0;
    std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Blank lines are skipped.
std::vector<CsvRecord> read_csv(std::string_view text)
{
    std::vector<CsvRecord> out;
    CsvRecord rec;
    std::string field;
    bool quoted = false, any = false;
    std::size_t line = 1;
    rec.line = 1;

    auto end_field = [&] {
        rec.fields.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        bool blank = rec.fields.size() == 1 && rec.fields[0].empty() && !any;
        if (!blank)
            out.push_back(std::move(rec));
        rec = CsvRecord{};
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i)
    {
        char ch = text[i];
        if (quoted)
        {
            if (ch == '"')
            {
                if (i + 1 < text.size() && text[i + 1] == '"')
                {
                    field += '"';
                    ++i;
                }
                else
                    quoted = false;
            }
            else
            {
                if (ch == '\n')
                    ++line;
                field += ch;
            }
            continue;
        }
        switch (ch)
        {
            case '"':
                quoted = true;
                any = true;
                break;
            case ',':
                end_field();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                rec.line = ++line;
                break;
            default:
                field += ch;
        }
    }
    if (quoted)
        fail(ErrorKind::Parse, "row " + std::to_string(rec.line) + ": unterminated quoted field");
    if (!field.empty() || !rec.fields.empty() || any)
        end_record();
    return out;
}

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(const std::string &s)
{
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

}  // namespace

IngestResult ingest_price_history(std::string_view csv_text, bool lenient)
{
    auto records = read_csv(csv_text);
    if (records.empty())
        fail(ErrorKind::MissingColumn, "price history is empty: missing header with columns year, usd_per_gb");

    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < records[0].fields.size(); ++i)
        col.emplace(trim(records[0].fields[i]), i);
    for (const char *required : {"year", "usd_per_gb"})
        if (!col.count(required))
            fail(ErrorKind::MissingColumn, std::string("price history: missing column '") + required + "'",
                 required);

    auto column = [&](const char *name) -> std::optional<std::size_t> {
        auto it = col.find(name);
        return it == col.end() ? std::nullopt : std::optional<std::size_t>(it->second);
    };
    const std::size_t c_year = *column("year"), c_price = *column("usd_per_gb");
    const auto c_size = column("size_kb"), c_cost = column("cost_usd"), c_desc = column("description");

    IngestResult result;
    for (std::size_t r = 1; r < records.size(); ++r)
    {
        const auto &rec = records[r];
        auto cell = [&](std::size_t c) { return c < rec.fields.size() ? trim(rec.fields[c]) : std::string(); };
        std::string problem;

        auto year = parse_double(cell(c_year));
        auto price = parse_double(cell(c_price));
        if (!year)
            problem = "unparseable year '" + cell(c_year) + "'";
        else if (!price)
            problem = "unparseable usd_per_gb '" + cell(c_price) + "'";
        else if (*year < 1950 || *year > 2100)
            problem = "year out of range [1950, 2100]";
        else if (!(*price > 0))
            problem = "usd_per_gb must be > 0";

        PricePoint p;
        auto optional_number = [&](const std::optional<std::size_t> &c, const char *name) -> std::optional<double> {
            if (!c || cell(*c).empty())
                return std::nullopt;
            auto v = parse_double(cell(*c));
            if (!v && problem.empty())
                problem = std::string("unparseable ") + name + " '" + cell(*c) + "'";
            return v;
        };
        p.size_kb = optional_number(c_size, "size_kb");
        p.cost_usd = optional_number(c_cost, "cost_usd");

        if (!problem.empty())
        {
            if (!lenient)
                fail(ErrorKind::BadNumber, "price history row " + std::to_string(rec.line) + ": " + problem);
            result.skipped.push_back({rec.line, problem});
            continue;
        }
        p.year = *year;
        p.usd_per_gb = *price;
        if (c_desc)
            p.description = cell(*c_desc);
        result.points.push_back(std::move(p));
    }
    std::stable_sort(result.points.begin(), result.points.end(),
                     [](const PricePoint &a, const PricePoint &b) { return a.year < b.year; });
    return result;
}

std::vector<TrendSample> capacity_series(const std::vector<PricePoint> &points)
{
    std::vector<TrendSample> out;
    out.reserve(points.size());
    for (const auto &p : points)
        out.push_back({p.year, p.usd_per_gb});
    return out;
}

std::optional<double> module_bandwidth(std::string_view description)
{
    static const std::regex grade(R"(DDR([2-5])L?[- ]?(\d{3,4}))", std::regex::icase);
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(description.begin(), description.end(), m, grade))
        return std::nullopt;
    // MT/s on a 64-bit channel.
    double mts = std::stod(m[2].str());
    return mts * 1e6 * 8.0;
}

std::vector<TrendSample> bandwidth_series(const std::vector<PricePoint> &points)
{
    static const std::regex count(R"(^\s*(\d+)\s*x)", std::regex::icase);
    std::vector<TrendSample> out;
    for (const auto &p : points)
    {
        auto bw = module_bandwidth(p.description);
        if (!bw || !p.cost_usd || !(*p.cost_usd > 0))
            continue;
        std::smatch m;
        double modules = 1.0;
        if (std::regex_search(p.description, m, count))
            modules = std::stod(m[1].str());
        out.push_back({p.year, *p.cost_usd / (modules * *bw / units::kGB)});
    }
    return out;
}

TrendFit fit_trend(const std::vector<TrendSample> &samples, double window_start, double window_end)
{
    require(window_start <= window_end, "trend window start must not exceed its end");
    std::vector<TrendSample> in;
    for (const auto &s : samples)
        if (s.year >= window_start && s.year <= window_end)
        {
            if (!(s.value > 0))
                fail(ErrorKind::BadNumber, "trend values must be > 0");
            in.push_back(s);
        }
    if (in.size() < 2)
        fail(ErrorKind::InsufficientData,
             "need at least 2 points in the window, found " + std::to_string(in.size()));

    const double n = static_cast<double>(in.size());
    double mx = 0, my = 0;
    for (const auto &s : in)
    {
        mx += s.year;
        my += std::log(s.value);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto &s : in)
    {
        double dx = s.year - mx, dy = std::log(s.value) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0)
        fail(ErrorKind::DegenerateWindow, "all points in the window share one year");

    const double slope = sxy / sxx;
    TrendFit fit;
    fit.annual_factor = std::exp(slope);
    fit.intercept_usd_per_gb = std::exp(my + slope * (window_start - mx));
    fit.r_squared = syy == 0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    fit.window_start = window_start;
    fit.window_end = window_end;
    fit.n_points = in.size();
    return fit;
}

TrendFit fit_trend(const std::vector<PricePoint> &points, double window_start, double window_end)
{
    return fit_trend(capacity_series(points), window_start, window_end);
}

double project_cost(const TrendFit &fit, double year)
{
    require(year >= fit.window_start, "projection year precedes the fit window");
    return fit.intercept_usd_per_gb * std::pow(fit.annual_factor, year - fit.window_start);
}

std::vector<PricePoint> builtin_hbm_index()
{
    return {{2023.0, 1.00, std::nullopt, std::nullopt, "HBM $/GB index, normalised"},
            {2025.0, 1.35, std::nullopt, std::nullopt, "HBM $/GB index, normalised"}};
}

double hbm_trend_check(const std::vector<PricePoint> &hbm_index)
{
    auto value_at = [&](double year) {
        for (const auto &p : hbm_index)
            if (p.year == year)
                return p.usd_per_gb;
        fail(ErrorKind::MissingEndpoint, "HBM index has no entry for " + std::to_string(int(year)));
    };
    double v2023 = value_at(2023.0);
    double v2025 = value_at(2025.0);
    return v2025 / v2023;
}

}  // namespace rooflinesim
