// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Internal helpers for reading config/catalog objects with field-path
// diagnostics and unit-suffixed keys.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "json.hpp"
#include "rooflinesim/error.hpp"

namespace rooflinesim::detail
{

using json = nlohmann::json;

inline std::string join_path(const std::string &parent, const std::string &key)
{
    return parent.empty() ? key : parent + "." + key;
}

inline std::string index_path(const std::string &parent, std::size_t i)
{
    return parent + "[" + std::to_string(i) + "]";
}

[[noreturn]] inline void config_error(const std::string &path, const std::string &what)
{
    fail(ErrorKind::Parse, path + ": " + what, path);
}

// Wraps one JSON object and records which keys were consumed so unknown keys
// (usually typos) can be rejected.
class ObjectReader
{
   public:
    ObjectReader(const json &obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object())
            config_error(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const std::string &path() const { return path_; }
    const json &raw() const { return obj_; }

    bool has(const std::string &key) const { return obj_.contains(key); }

    const json *find(const std::string &key)
    {
        auto it = obj_.find(key);
        if (it == obj_.end())
            return nullptr;
        used_.insert(key);
        return &*it;
    }

    const json &at(const std::string &key)
    {
        const json *v = find(key);
        if (!v)
            config_error(join_path(path_, key), "missing required field");
        return *v;
    }

    std::string sub(const std::string &key) const { return join_path(path_, key); }

    double number(const std::string &key)
    {
        const json &v = at(key);
        if (!v.is_number())
            config_error(sub(key), "expected a number");
        double x = v.get<double>();
        if (!std::isfinite(x))
            config_error(sub(key), "expected a finite number");
        return x;
    }

    double number_or(const std::string &key, double fallback)
    {
        return has(key) ? number(key) : fallback;
    }

    std::uint64_t count(const std::string &key)
    {
        const json &v = at(key);
        if (v.is_number_unsigned())
            return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        if (v.is_number_float())
        {
            double d = v.get<double>();
            if (d >= 0 && d == std::floor(d) && d < 1.8e19)
                return static_cast<std::uint64_t>(d);
        }
        config_error(sub(key), "expected a non-negative integer");
    }

    std::uint64_t count_or(const std::string &key, std::uint64_t fallback)
    {
        return has(key) ? count(key) : fallback;
    }

    bool boolean_or(const std::string &key, bool fallback)
    {
        if (!has(key))
            return fallback;
        const json &v = at(key);
        if (!v.is_boolean())
            config_error(sub(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string &key)
    {
        const json &v = at(key);
        if (!v.is_string())
            config_error(sub(key), "expected a string");
        return v.get<std::string>();
    }

    // Exactly one of `base + suffix` must be present; the value is multiplied
    // by the suffix's scale into base units.
    std::optional<double> quantity_opt(const std::string &base,
                                       std::initializer_list<std::pair<const char *, double>> suffixes)
    {
        std::optional<double> out;
        std::string seen;
        for (const auto &[suffix, scale] : suffixes)
        {
            std::string key = base + suffix;
            if (!has(key))
                continue;
            if (out)
                config_error(sub(key), "conflicts with " + seen);
            out = number(key) * scale;
            seen = key;
        }
        return out;
    }

    double quantity(const std::string &base, std::initializer_list<std::pair<const char *, double>> suffixes)
    {
        auto v = quantity_opt(base, suffixes);
        if (!v)
        {
            std::string names;
            for (const auto &s : suffixes)
                names += (names.empty() ? "" : " | ") + base + s.first;
            config_error(sub(base), "missing required field (one of " + names + ")");
        }
        return *v;
    }

    void reject_unknown() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!used_.count(it.key()))
                config_error(sub(it.key()), "unknown field");
    }

   private:
    const json &obj_;
    std::string path_;
    std::set<std::string> used_;
};

// Converts a byte-quantity read as double into an exact integer.
inline std::uint64_t to_bytes(double v, const std::string &path)
{
    if (!(v >= 0) || v > 9.2e18)
        config_error(path, "byte quantity out of range");
    return static_cast<std::uint64_t>(std::llround(v));
}

// Parses text as JSON, turning syntax errors into line/column diagnostics.
inline json parse_document(std::string_view text, const std::string &what)
{
    try
    {
        return json::parse(text.begin(), text.end());
    }
    catch (const json::parse_error &e)
    {
        std::size_t line = 1, col = 1;
        std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < limit; ++i)
        {
            if (text[i] == '\n')
            {
                ++line;
                col = 1;
            }
            else
                ++col;
        }
        fail(ErrorKind::Parse,
             what + ": syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                 e.what());
    }
}

}  // namespace rooflinesim::detail
