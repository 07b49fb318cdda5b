//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace molscale {

// Pretraining grid: eight model sizes (parameters) by four dataset budgets (tokens).
inline constexpr std::array<double, 8> kModelSizes = { 1e6,  4e6,  16e6,  43e6,
                                                       85e6, 152e6, 278e6, 650e6 };
inline constexpr std::array<double, 4> kTokenBudgets = { 100e6, 300e6, 1e9, 3e9 };
inline constexpr int kCheckpointsPerEpoch = 5;

// Default reporting window for compute-optimal tables.
inline constexpr double kReportCMin = 1e14;
inline constexpr double kReportCMax = 1.95e18;
inline constexpr int kReportLevels = 12;

// `levels` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_space(double lo, double hi, int levels) {
  std::vector<double> out;
  if (levels == 1) {
    out.push_back(lo);
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < levels; ++i)
    out.push_back(i + 1 == levels ? hi : std::pow(10.0, a + (b - a) * i / (levels - 1)));
  return out;
}

}  // namespace molscale
