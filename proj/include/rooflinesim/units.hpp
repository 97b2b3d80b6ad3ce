// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

// Everything inside the library is base SI: bytes, seconds, watts, USD.
// Decimal (GB) vs binary (GiB) conversions happen only at ingestion.
namespace rooflinesim::units
{

inline constexpr double kKB = 1e3;
inline constexpr double kGB = 1e9;
inline constexpr double kTB = 1e12;
inline constexpr std::uint64_t kKiB = 1ull << 10;
inline constexpr std::uint64_t kMiB = 1ull << 20;
inline constexpr std::uint64_t kGiB = 1ull << 30;

inline constexpr double kNano = 1e-9;
inline constexpr double kMicro = 1e-6;

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kHoursPerYear = 8760.0;

}  // namespace rooflinesim::units
