#pragma once

#include <cstddef>

namespace pgfwass {

/// Numerical tolerances shared by every module.
struct Tolerances {
  /// |sum - 1| allowed for a valid distribution.
  double normalization = 1e-9;
  /// Entries below -negative_mass are rejected; entries in [-negative_mass, 0) are clamped.
  double negative_mass = 1e-12;
  /// Entries smaller than this in magnitude are stored as exact zeros.
  double clamp = 1e-15;
  /// Means closer than this count as equal (D_2 finiteness, equal-mean checks).
  double mean_equality = 1e-9;
  /// Equal-mean pair generator guarantee.
  double generated_mean_gap = 1e-12;
  /// An inequality instance is violated when rhs - lhs < -violation_slack.
  double violation_slack = 1e-9;
  /// Marginal reproduction of transport plans.
  double marginal = 1e-10;
};

inline constexpr Tolerances kTolerances{};

/// Knobs for maximizing |P(z)| of a polynomial over [0, 1].
struct SupremumOptions {
  std::size_t grid_size = 2048;
  double refine_tol = 1e-12;
};

}  // namespace pgfwass
