// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace slotwg {

// Lengths are nanometres throughout unless a name says otherwise.
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLightMps = 2.99792458e8;    // m/s
inline constexpr double kSpeedOfLightNmps = 2.99792458e17;  // nm/s

inline constexpr double ghz_to_hz(double ghz) { return ghz * 1e9; }
inline constexpr double hz_to_ghz(double hz) { return hz / 1e9; }

}  // namespace slotwg
