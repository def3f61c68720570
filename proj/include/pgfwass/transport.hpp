#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "config.hpp"
#include "dist.hpp"
#include "error.hpp"
#include "numeric.hpp"

namespace pgfwass {

struct CouplingEntry {
  std::size_t source;
  std::size_t target;
  double mass;
};

/// Sparse transport plan pi_{i,j} between two distributions on the integers.
class Coupling {
 public:
  Coupling(DiscreteDist source, DiscreteDist target, std::vector<CouplingEntry> entries)
      : source_(std::move(source)), target_(std::move(target)), entries_(std::move(entries)) {}

  const DiscreteDist& source_marginal() const noexcept { return source_; }
  const DiscreteDist& target_marginal() const noexcept { return target_; }
  const std::vector<CouplingEntry>& entries() const noexcept { return entries_; }

  std::vector<double> row_sums() const {
    std::vector<double> rows(source_.size(), 0.0);
    for (const auto& e : entries_) rows[e.source] += e.mass;
    return rows;
  }
  std::vector<double> column_sums() const {
    std::vector<double> cols(target_.size(), 0.0);
    for (const auto& e : entries_) cols[e.target] += e.mass;
    return cols;
  }

  /// Largest deviation of either marginal from its prescribed distribution.
  double marginal_error() const {
    double err = 0.0;
    const auto rows = row_sums();
    for (std::size_t i = 0; i < rows.size(); ++i) err = std::max(err, std::abs(rows[i] - source_[i]));
    const auto cols = column_sums();
    for (std::size_t j = 0; j < cols.size(); ++j) err = std::max(err, std::abs(cols[j] - target_[j]));
    return err;
  }

 private:
  DiscreteDist source_;
  DiscreteDist target_;
  std::vector<CouplingEntry> entries_;
};

/// W_1 through cumulative distribution functions: sum_n |F_n - G_n|.
inline double wasserstein1_cdf(const DiscreteDist& f, const DiscreteDist& g) {
  const std::size_t K = std::max(f.support_bound(), g.support_bound());
  CompensatedSum acc;
  double F = 0.0, G = 0.0;
  for (std::size_t n = 0; n < K; ++n) {
    F += f[n];
    G += g[n];
    acc.add(std::abs(F - G));
  }
  return acc.value();
}

/// Quantile (north-west corner on sorted atoms) coupling: the lowest unmatched
/// mass of f always goes to the lowest unmatched mass of g. Optimal for every
/// convex cost |i - j|^p on the line.
inline Coupling monotone_coupling(const DiscreteDist& f, const DiscreteDist& g) {
  std::vector<CouplingEntry> entries;
  const auto fp = f.probs();
  const auto gp = g.probs();
  std::size_t i = 0, j = 0;
  const auto skip_empty = [](std::span<const double> p, std::size_t k) {
    while (k < p.size() && p[k] == 0.0) ++k;
    return k;
  };
  i = skip_empty(fp, i);
  j = skip_empty(gp, j);
  double rf = i < fp.size() ? fp[i] : 0.0;
  double rg = j < gp.size() ? gp[j] : 0.0;
  while (i < fp.size() && j < gp.size()) {
    if (rf < rg) {
      entries.push_back({i, j, rf});
      rg -= rf;
      i = skip_empty(fp, i + 1);
      rf = i < fp.size() ? fp[i] : 0.0;
    } else if (rg < rf) {
      entries.push_back({i, j, rg});
      rf -= rg;
      j = skip_empty(gp, j + 1);
      rg = j < gp.size() ? gp[j] : 0.0;
    } else {
      entries.push_back({i, j, rf});
      i = skip_empty(fp, i + 1);
      j = skip_empty(gp, j + 1);
      rf = i < fp.size() ? fp[i] : 0.0;
      rg = j < gp.size() ? gp[j] : 0.0;
    }
  }
  // Whatever remains on one side is round-off of the normalization.
  return Coupling(f, g, std::move(entries));
}

/// (sum mass * |i - j|^p)^(1/p).
inline double coupling_cost(const Coupling& c, double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "cost exponent must be >= 1");
  CompensatedSum acc;
  for (const auto& e : c.entries()) {
    const double d = e.source > e.target ? double(e.source - e.target) : double(e.target - e.source);
    acc.add(e.mass * std::pow(d, p));
  }
  return std::pow(acc.value(), 1.0 / p);
}

inline double wasserstein_p(const DiscreteDist& f, const DiscreteDist& g, double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "Wasserstein exponent must be >= 1");
  return coupling_cost(monotone_coupling(f, g), p);
}

/// A feasible but generally suboptimal plan: source atoms are visited in
/// random order and each pours its mass into randomly chosen target atoms
/// that still have capacity.
inline Coupling random_feasible_coupling(const DiscreteDist& f, const DiscreteDist& g, Rng& rng) {
  std::vector<std::size_t> sources;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] > 0.0) sources.push_back(i);
  std::shuffle(sources.begin(), sources.end(), rng);

  std::vector<double> capacity(g.probs().begin(), g.probs().end());
  std::vector<std::size_t> open;
  for (std::size_t j = 0; j < capacity.size(); ++j)
    if (capacity[j] > 0.0) open.push_back(j);

  std::vector<CouplingEntry> entries;
  for (std::size_t i : sources) {
    double remaining = f[i];
    while (remaining > 0.0 && !open.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
      const std::size_t slot = pick(rng);
      const std::size_t j = open[slot];
      const double m = std::min(remaining, capacity[j]);
      entries.push_back({i, j, m});
      remaining -= m;
      capacity[j] -= m;
      if (capacity[j] <= 0.0) {
        open[slot] = open.back();
        open.pop_back();
      }
    }
    if (remaining > 0.0 && !entries.empty()) {
      // Normalization round-off: every target is full.
      entries.back().mass += remaining;
    }
  }
  std::erase_if(entries, [](const CouplingEntry& e) { return !(e.mass > 0.0); });
  return Coupling(f, g, std::move(entries));
}

}  // namespace pgfwass
