#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "config.hpp"
#include "dist.hpp"
#include "error.hpp"
#include "supremum.hpp"

namespace pgfwass {

/// Value of a Fourier-based (Toscani) distance D_s on the non-negative integers.
struct ToscaniResult {
  double value = 0.0;             ///< >= 0, possibly +infinity
  std::optional<double> argmax_z; ///< present whenever value is finite
  std::size_t evaluations = 0;
};

namespace detail {

inline void check_order(int s) {
  if (s != 1 && s != 2) throw Error(ErrorKind::UnsupportedOrder, "order must be 1 or 2, got " + std::to_string(s));
}

/// Coefficients of the singularity-free series whose modulus equals
/// |f^(z) - g^(z)| / (1 - z)^s on (0, 1):
///   s = 1:  c_n = F_n - G_n
///   s = 2:  c_n = sum_{k<=n} (F_k - G_k)
/// Only indices n < K are returned (K = larger support bound); the s = 1
/// coefficients vanish from K on, the s = 2 ones are constant from K on and
/// equal mean(g) - mean(f). That constant tail is handled by the callers.
inline std::vector<double> singularity_free_coefficients(const DiscreteDist& f, const DiscreteDist& g, int s) {
  const std::size_t K = std::max(f.support_bound(), g.support_bound());
  std::vector<double> c(std::max<std::size_t>(K, 1), 0.0);
  double F = 0.0, G = 0.0, T = 0.0;
  for (std::size_t n = 0; n < K; ++n) {
    F += f[n];
    G += g[n];
    const double d = F - G;
    T += d;
    c[n] = s == 1 ? d : T;
  }
  return c;
}

inline bool means_match(const DiscreteDist& f, const DiscreteDist& g, const Tolerances& tol) {
  return std::abs(mean(f) - mean(g)) <= tol.mean_equality;
}

}  // namespace detail

/// D_s(f, g) = sup_{z in (0,1)} |f^(z) - g^(z)| / (1 - z)^s for s in {1, 2}.
///
/// The ratio is evaluated through the cumulative-sum series above, which is a
/// polynomial for finitely supported laws; its supremum over the open
/// interval is the maximum of the continuous extension on [0, 1]. For s = 2
/// with means further apart than tol.mean_equality the ratio diverges at
/// z -> 1 and the result is +infinity.
inline ToscaniResult toscani_distance(const DiscreteDist& f, const DiscreteDist& g, int s,
                                      const SupremumOptions& opt = {}, const Tolerances& tol = kTolerances) {
  detail::check_order(s);
  if (s == 2 && !detail::means_match(f, g, tol))
    return {std::numeric_limits<double>::infinity(), std::nullopt, 0};
  const auto coeffs = detail::singularity_free_coefficients(f, g, s);
  const SupremumResult sup = max_abs_polynomial(coeffs, opt);
  return {sup.value, sup.argmax, sup.evaluations};
}

/// |f^(z) - g^(z)| / (1 - z)^s at a single z in [0, 1], via the same series;
/// z = 1 is the continuous extension. For s = 2 and unequal means the
/// constant tail contributes T_K z^K / (1 - z), which is +infinity at z = 1.
inline double toscani_ratio(const DiscreteDist& f, const DiscreteDist& g, int s, double z,
                            const Tolerances& tol = kTolerances) {
  detail::check_order(s);
  if (!(z >= 0.0 && z <= 1.0)) throw Error(ErrorKind::DomainError, "z outside [0, 1]: " + format_g17(z));
  const auto coeffs = detail::singularity_free_coefficients(f, g, s);
  double value = horner(coeffs, z);
  if (s == 2 && !detail::means_match(f, g, tol)) {
    const std::size_t K = std::max(f.support_bound(), g.support_bound());
    const double tail = mean(g) - mean(f);
    if (z == 1.0) return std::numeric_limits<double>::infinity();
    value += tail * std::pow(z, static_cast<double>(K)) / (1.0 - z);
  }
  return std::abs(value);
}

/// (z, ratio) on grid_size equally spaced points of [0, 1], endpoints included.
inline std::vector<std::pair<double, double>> toscani_profile(const DiscreteDist& f, const DiscreteDist& g, int s,
                                                              std::size_t grid_size,
                                                              const Tolerances& tol = kTolerances) {
  detail::check_order(s);
  if (grid_size < 2) throw Error(ErrorKind::InvalidArgument, "profile grid needs at least 2 points");
  std::vector<std::pair<double, double>> out;
  out.reserve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double z = i + 1 == grid_size ? 1.0 : static_cast<double>(i) / static_cast<double>(grid_size - 1);
    out.emplace_back(z, toscani_ratio(f, g, s, z, tol));
  }
  return out;
}

/// l[a] = sup_{z in (0,1)} |sum_{n=1}^N a_n (1 + z + ... + z^{n-1})|.
/// a[0] holds a_1. Regrouped as sum_k (a_{k+1} + ... + a_N) z^k.
inline double ell_norm(std::span<const double> a, const SupremumOptions& opt = {}) {
  if (a.empty()) throw Error(ErrorKind::EmptyVector, "ell norm of an empty vector");
  std::vector<double> coeffs(a.size());
  double suffix = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) coeffs[k] = suffix += a[k];
  return max_abs_polynomial(coeffs, opt).value;
}

struct NormConstantOptions {
  /// Cheaper sup evaluation used only to steer hill climbing.
  SupremumOptions climb{256, 1e-9};
  /// Evaluation behind every reported ratio.
  SupremumOptions report{};
  double initial_step = 0.5;
  double min_step = 1e-4;
  int max_passes = 20;
};

/// Lower bound on C(N) = sup_{a != 0} ||a||_1 / l[a].
///
/// Each trial draws a Gaussian direction. Whenever a draw beats every earlier
/// draw it is also improved by coordinate-wise hill climbing. The estimate is
/// the running maximum of all reported ratios, so it is non-decreasing in the
/// number of trials for a fixed generator state. `on_sample`, if set, sees
/// every reported ratio.
inline double estimate_norm_constant(std::size_t N, std::size_t trials, Rng& rng,
                                     const std::function<void(double)>& on_sample = {},
                                     const NormConstantOptions& opt = {}) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be at least 1");
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trial");

  const auto ratio = [](std::span<const double> a, const SupremumOptions& sup) {
    double l1 = 0.0;
    for (double x : a) l1 += std::abs(x);
    if (l1 == 0.0) return 0.0;
    const double l = ell_norm(a, sup);
    return l > 0.0 ? l1 / l : 0.0;
  };

  const auto climb = [&](std::vector<double> x) {
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    for (double& v : x) v /= scale;
    double current = ratio(x, opt.climb);
    for (double step = opt.initial_step; step >= opt.min_step; step *= 0.5) {
      bool improved = true;
      for (int pass = 0; improved && pass < opt.max_passes; ++pass) {
        improved = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
          for (double sign : {1.0, -1.0}) {
            const double saved = x[i];
            x[i] += sign * step;
            const double r = ratio(x, opt.climb);
            if (r > current) {
              current = r;
              improved = true;
              break;
            }
            x[i] = saved;
          }
        }
      }
    }
    return x;
  };

  std::normal_distribution<double> gauss(0.0, 1.0);
  double estimate = 0.0;
  double best_draw = 0.0;
  std::vector<double> a(N);
  for (std::size_t t = 0; t < trials; ++t) {
    for (double& x : a) x = gauss(rng);
    const double r = ratio(a, opt.report);
    if (on_sample) on_sample(r);
    estimate = std::max(estimate, r);
    if (r > best_draw) {
      best_draw = r;
      const auto climbed = climb(a);
      const double rc = ratio(climbed, opt.report);
      if (on_sample) on_sample(rc);
      estimate = std::max(estimate, rc);
    }
  }
  return estimate;
}

}  // namespace pgfwass
