#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "numeric.hpp"

namespace pgfwass {

using Rng = std::mt19937_64;

/// Probability vector on {0, ..., K}. Immutable after construction; the only
/// way to obtain one is through a validating factory.
class DiscreteDist {
 public:
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  /// Largest retained index K.
  std::size_t support_bound() const noexcept { return probs_.size() - 1; }

  /// Mass at n, zero past the retained range.
  double operator[](std::size_t n) const noexcept { return n < probs_.size() ? probs_[n] : 0.0; }

  /// Mass discarded and redistributed by a truncating constructor (0 for
  /// user-supplied vectors, which are never repaired).
  double renormalization_defect() const noexcept { return defect_; }

  /// Equality of zero-padded vectors.
  friend bool operator==(const DiscreteDist& a, const DiscreteDist& b) noexcept {
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

 private:
  DiscreteDist(std::vector<double> probs, double defect) : probs_(std::move(probs)), defect_(defect) {}

  friend DiscreteDist make_dist(std::vector<double> probs, const Tolerances& tol);
  friend DiscreteDist poisson_dist(double mu, double tail_tol);

  std::vector<double> probs_;
  double defect_ = 0.0;
};

/// Validates and wraps a probability vector. Tiny entries (|x| < clamp) and
/// negative round-off (x >= -negative_mass) become exact zeros; anything else
/// that breaks the simplex is an error, never silently renormalized.
inline DiscreteDist make_dist(std::vector<double> probs, const Tolerances& tol = kTolerances) {
  if (probs.empty()) throw Error(ErrorKind::NotNormalized, "empty probability vector");
  CompensatedSum total;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    double& p = probs[n];
    if (!std::isfinite(p))
      throw Error(ErrorKind::InvalidArgument, "non-finite entry at index " + std::to_string(n));
    if (p < -tol.negative_mass)
      throw Error(ErrorKind::NegativeMass, "entry " + std::to_string(n) + " = " + format_g17(p));
    if (p < 0.0 || std::abs(p) < tol.clamp) p = 0.0;
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > tol.normalization)
    throw Error(ErrorKind::NotNormalized, "entries sum to " + format_g17(total.value()));
  return DiscreteDist(std::move(probs), 0.0);
}

inline DiscreteDist dirac(std::size_t k) {
  std::vector<double> p(k + 1, 0.0);
  p[k] = 1.0;
  return make_dist(std::move(p));
}

/// Poisson(mu) truncated at the first K whose omitted upper tail is below
/// tail_tol; the retained mass is renormalized and the defect recorded.
inline DiscreteDist poisson_dist(double mu, double tail_tol = 1e-12) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::InvalidArgument, "poisson mean must be positive");
  if (!(tail_tol > 0.0) || tail_tol > 1e-6)
    throw Error(ErrorKind::InvalidArgument, "poisson tail tolerance must lie in (0, 1e-6]");

  const auto log_pmf = [mu](double n) { return n * std::log(mu) - mu - std::lgamma(n + 1.0); };
  std::vector<double> probs;
  for (std::size_t n = 0;; ++n) {
    probs.push_back(std::exp(log_pmf(static_cast<double>(n))));
    // Past the mode the terms decay faster than geometrically with ratio
    // mu / (n + 2), which bounds the omitted tail.
    const double next = static_cast<double>(n + 1);
    if (next > mu) {
      const double ratio = mu / (next + 1.0);
      const double tail_bound = std::exp(log_pmf(next)) / (1.0 - ratio);
      if (tail_bound < tail_tol) break;
    }
  }
  CompensatedSum retained;
  for (double p : probs) retained.add(p);
  const double kept = retained.value();
  for (double& p : probs) {
    p /= kept;
    if (p < kTolerances.clamp) p = 0.0;
  }
  return DiscreteDist(std::move(probs), 1.0 - kept);
}

/// sum_n n^r f_n, with 0^0 = 1.
inline double moment(const DiscreteDist& f, double r) {
  double acc = 0.0;
  const auto p = f.probs();
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (p[n] == 0.0) continue;
    acc += std::pow(static_cast<double>(n), r) * p[n];
  }
  return acc;
}

inline double mean(const DiscreteDist& f) { return moment(f, 1.0); }

/// Running sums F_0 <= ... <= F_K (= 1).
class CdfVector {
 public:
  explicit CdfVector(const DiscreteDist& f) {
    values_.reserve(f.size());
    double acc = 0.0;
    for (double p : f.probs()) values_.push_back(acc += p);
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// F_n, equal to the final value for n past the support.
  double operator[](std::size_t n) const noexcept { return n < values_.size() ? values_[n] : values_.back(); }

 private:
  std::vector<double> values_;
};

inline CdfVector cdf(const DiscreteDist& f) { return CdfVector(f); }

inline double pgf_eval(const DiscreteDist& f, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw Error(ErrorKind::DomainError, "pgf argument outside [0, 1]: " + format_g17(z));
  return horner(f.probs(), z);
}

/// Half the l1 distance between the zero-padded vectors.
inline double total_variation(const DiscreteDist& f, const DiscreteDist& g) {
  const std::size_t n = std::max(f.size(), g.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(std::abs(f[i] - g[i]));
  return 0.5 * acc.value();
}

/// Uniform point of the simplex on {0, ..., K}: normalized i.i.d. Exp(1) draws.
inline DiscreteDist random_dist(std::size_t K, Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> p(K + 1);
  double total = 0.0;
  for (double& x : p) total += (x = exp1(rng));
  for (double& x : p) x /= total;
  return make_dist(std::move(p));
}

/// Two random distributions with exactly matched means: g is corrected by
/// moving mass between one index pair (i < j) drawn uniformly among the pairs
/// for which the transfer keeps g inside the simplex.
inline std::pair<DiscreteDist, DiscreteDist> random_equal_mean_pair(std::size_t K, Rng& rng,
                                                                     int max_attempts = 100) {
  if (K < 2) throw Error(ErrorKind::InvalidArgument, "equal-mean pairs need support bound K >= 2");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    DiscreteDist f = random_dist(K, rng);
    DiscreteDist g = random_dist(K, rng);
    const double gap = mean(f) - mean(g);
    std::vector<double> q(g.probs().begin(), g.probs().end());

    // gap > 0: move delta from i up to j; gap < 0: move delta from j down to i.
    std::vector<std::pair<std::size_t, std::size_t>> feasible;
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = i + 1; j <= K; ++j) {
        const double delta = std::abs(gap) / static_cast<double>(j - i);
        const double donor = gap > 0 ? q[i] : q[j];
        if (delta <= donor) feasible.emplace_back(i, j);
      }
    if (feasible.empty()) continue;

    std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
    const auto [i, j] = feasible[pick(rng)];
    const double delta = std::abs(gap) / static_cast<double>(j - i);
    if (gap > 0) {
      q[i] = std::max(0.0, q[i] - delta);
      q[j] += delta;
    } else {
      q[j] = std::max(0.0, q[j] - delta);
      q[i] += delta;
    }
    DiscreteDist h = make_dist(std::move(q));
    if (std::abs(mean(f) - mean(h)) < kTolerances.generated_mean_gap) return {std::move(f), std::move(h)};
  }
  throw Error(ErrorKind::GenerationFailed,
              "no equal-mean pair after " + std::to_string(max_attempts) + " attempts (K=" + std::to_string(K) + ")");
}

}  // namespace pgfwass
