#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "config.hpp"
#include "numeric.hpp"

namespace pgfwass {

struct SupremumResult {
  double value = 0.0;
  double argmax = 0.0;
  std::size_t evaluations = 0;
};

/// max_{z in [0,1]} |P(z)| for P given by its monomial coefficients.
///
/// A uniform grid of grid_size cells (grid_size + 1 nodes, both endpoints
/// included) locates the best node; golden-section search on the two cells
/// around it then refines the location to refine_tol. The result never drops
/// below the best grid value.
inline SupremumResult max_abs_polynomial(std::span<const double> coeffs, const SupremumOptions& opt = {}) {
  const auto objective = [coeffs](double z) { return std::abs(horner(coeffs, z)); };
  const std::size_t cells = opt.grid_size < 1 ? 1 : opt.grid_size;
  const double h = 1.0 / static_cast<double>(cells);

  SupremumResult best;
  std::size_t best_node = 0;
  for (std::size_t i = 0; i <= cells; ++i) {
    const double z = i == cells ? 1.0 : static_cast<double>(i) * h;
    const double v = objective(z);
    ++best.evaluations;
    if (v > best.value || i == 0) {
      best.value = v;
      best.argmax = z;
      best_node = i;
    }
  }
  if (coeffs.size() <= 1) return best;

  double lo = best_node == 0 ? 0.0 : static_cast<double>(best_node - 1) * h;
  double hi = best_node >= cells ? 1.0 : std::min(1.0, static_cast<double>(best_node + 1) * h);
  constexpr double inv_phi = 0.6180339887498948482;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  best.evaluations += 2;
  while (hi - lo > opt.refine_tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
    ++best.evaluations;
  }
  const double z = 0.5 * (lo + hi);
  const double v = objective(z);
  ++best.evaluations;
  if (v > best.value) {
    best.value = v;
    best.argmax = z;
  }
  if (f1 > best.value) {
    best.value = f1;
    best.argmax = x1;
  }
  if (f2 > best.value) {
    best.value = f2;
    best.argmax = x2;
  }
  return best;
}

}  // namespace pgfwass
