#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "dist.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "numeric.hpp"
#include "transport.hpp"

namespace pgfwass {

// ---------------------------------------------------------------------------
// Mean-field collision operator
// ---------------------------------------------------------------------------

/// Rows of the Binomial(s, 1/2) pmf for s = 0..max_total, built by repeated
/// halving of Pascal's triangle (no factorials, no overflow).
class BinomialHalfTable {
 public:
  explicit BinomialHalfTable(std::size_t max_total) : rows_(max_total + 1) {
    rows_[0] = {1.0};
    for (std::size_t s = 1; s <= max_total; ++s) {
      const auto& prev = rows_[s - 1];
      auto& row = rows_[s];
      row.assign(s + 1, 0.0);
      for (std::size_t n = 0; n <= s; ++n) {
        const double left = n > 0 ? prev[n - 1] : 0.0;
        const double right = n < s ? prev[n] : 0.0;
        row[n] = 0.5 * (left + right);
      }
    }
  }

  std::size_t max_total() const noexcept { return rows_.size() - 1; }
  std::span<const double> row(std::size_t s) const { return rows_[s]; }

 private:
  std::vector<std::vector<double>> rows_;
};

namespace detail {

/// r_s = sum_{k + l = s} p_k p_l for s = 0..2(len-1).
inline std::vector<double> self_convolution(std::span<const double> p) {
  std::vector<double> r(2 * p.size() - 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    for (std::size_t l = 0; l < p.size(); ++l) r[k + l] += p[k] * p[l];
  }
  return r;
}

/// Writes Q[p]_n for n < out.size() and returns the gain that lands beyond
/// out.size() - 1 (mass the truncated state cannot represent).
///
/// The loss term is p_n times the total mass m of p. On the simplex this is
/// just p_n, but with a bare p_n the mass obeys dm/dt = m^2 - m, whose fixed
/// point m = 1 is repelling: round-off in the mass then grows like e^t. With
/// the bilinear loss dm/dt = 0 and the mean is likewise neutral.
inline double collision_into(std::span<const double> p, std::span<double> out, const BinomialHalfTable& table) {
  CompensatedSum total;
  for (double x : p) total.add(x);
  const double mass = total.value();
  const auto r = self_convolution(p);
  std::fill(out.begin(), out.end(), 0.0);
  double overflow = 0.0;
  for (std::size_t s = 0; s < r.size(); ++s) {
    if (r[s] == 0.0) continue;
    const auto row = table.row(s);
    const std::size_t top = std::min(s, out.size() - 1);
    for (std::size_t n = 0; n <= top; ++n) out[n] += row[n] * r[s];
    for (std::size_t n = top + 1; n <= s; ++n) overflow += row[n] * r[s];
  }
  for (std::size_t n = 0; n < out.size(); ++n) out[n] -= n < p.size() ? mass * p[n] : 0.0;
  return overflow;
}

}  // namespace detail

/// Q[p]_n = sum_{k,l} C(k+l, n) 2^{-(k+l)} p_k p_l 1{n <= k+l} - p_n on
/// n = 0..2K, which is where the gain term lives for a law supported on
/// {0..K}. The (0,0) pair returns its (zero) wealth to state 0, i.e. C(0,0)
/// counts as 1, so mass and mean are conserved exactly.
inline std::vector<double> collision_operator(const DiscreteDist& p) {
  const std::size_t K = p.support_bound();
  BinomialHalfTable table(2 * K);
  std::vector<double> q(2 * K + 1);
  detail::collision_into(p.probs(), q, table);
  return q;
}

// ---------------------------------------------------------------------------
// Mean-field ODE
// ---------------------------------------------------------------------------

struct OdeConfig {
  double mu = 1.0;
  double dt = 0.02;
  double t_end = 10.0;
  double sample_every = 0.1;
  /// Lower bound on the truncation index; the effective n_max is never below
  /// 4 mu + 40 nor the Poisson(mu) truncation at tail_tol.
  std::size_t n_max_override = 0;
  double tail_tol = 1e-12;
  SupremumOptions sup{};
};

struct MeanFieldState {
  std::vector<double> p;  ///< law on {0..n_max}
  double t = 0.0;
  double mass_defect = 0.0;
  double mean = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  double d2 = 0.0;  ///< D_2(p(t), p*)
  double w1 = 0.0;
  double w2 = 0.0;
  double mass_defect = 0.0;
  double mean = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::string config_digest;
  std::size_t n_max = 0;
  MeanFieldState final_state;
};

/// Integration failure carrying the offending time and magnitude.
class IntegrationError : public Error {
 public:
  IntegrationError(ErrorKind kind, double t, double magnitude)
      : Error(kind, "at t=" + format_g17(t) + ", magnitude " + format_g17(magnitude)), t_(t), magnitude_(magnitude) {}
  double time() const noexcept { return t_; }
  double magnitude() const noexcept { return magnitude_; }

 private:
  double t_;
  double magnitude_;
};

inline std::size_t ode_truncation(const OdeConfig& cfg, std::size_t initial_support) {
  const auto floor_index = static_cast<std::size_t>(std::ceil(4.0 * cfg.mu)) + 40;
  const std::size_t poisson_len = poisson_dist(cfg.mu, cfg.tail_tol).support_bound();
  return std::max({floor_index, poisson_len, cfg.n_max_override, initial_support});
}

inline std::string ode_digest(const OdeConfig& cfg, const DiscreteDist& p0) {
  Fnv1a h;
  h.update(std::string_view("ode")).update(cfg.mu).update(cfg.dt).update(cfg.t_end).update(cfg.sample_every);
  h.update(static_cast<double>(cfg.n_max_override)).update(cfg.tail_tol);
  for (double x : p0.probs()) h.update(x);
  return h.hex();
}

namespace detail {

/// Clamps round-off negatives and divides by the total so that metrics see a
/// valid law; the raw defect is tracked separately.
inline DiscreteDist as_distribution(std::span<const double> p) {
  std::vector<double> q(p.begin(), p.end());
  CompensatedSum total;
  for (double& x : q) total.add(x = std::max(x, 0.0));
  for (double& x : q) x /= total.value();
  while (q.size() > 1 && q.back() == 0.0) q.pop_back();
  return make_dist(std::move(q));
}

}  // namespace detail

/// Classical RK4 on dp/dt = Q[p] with a fixed step, sampling distances to the
/// truncated Poisson(mu) equilibrium. Aborts on mass leak (> 1e-6), negative
/// entries (< -1e-10) or mean drift (> 1e-6).
inline Trajectory integrate_ode(const DiscreteDist& p0, const OdeConfig& cfg) {
  if (!(cfg.mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "mu must be positive");
  if (!(cfg.dt > 0.0 && cfg.dt <= 0.1)) throw Error(ErrorKind::InvalidArgument, "dt must lie in (0, 0.1]");
  if (!(cfg.t_end >= 0.0)) throw Error(ErrorKind::InvalidArgument, "t_end must be non-negative");
  if (!(cfg.sample_every > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample interval must be positive");
  const double m0 = mean(p0);
  if (std::abs(m0 - cfg.mu) > kTolerances.mean_equality)
    throw Error(ErrorKind::UnequalMeans, "initial mean " + format_g17(m0) + " differs from mu " + format_g17(cfg.mu));

  const std::size_t n_max = ode_truncation(cfg, p0.support_bound());
  const DiscreteDist equilibrium = poisson_dist(cfg.mu, cfg.tail_tol);
  const BinomialHalfTable table(2 * n_max);
  const std::size_t len = n_max + 1;

  Trajectory traj;
  traj.config_digest = ode_digest(cfg, p0);
  traj.n_max = n_max;

  std::vector<double> p(len, 0.0);
  std::copy(p0.probs().begin(), p0.probs().end(), p.begin());
  std::vector<double> k1(len), k2(len), k3(len), k4(len), tmp(len);

  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.sample_every / cfg.dt)));

  const auto diagnostics = [&](double t) {
    CompensatedSum mass, first;
    double most_negative = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
      mass.add(p[n]);
      first.add(static_cast<double>(n) * p[n]);
      most_negative = std::min(most_negative, p[n]);
    }
    MeanFieldState s{{}, t, std::abs(1.0 - mass.value()), first.value()};
    if (most_negative < -1e-10) throw IntegrationError(ErrorKind::NegativeProbability, t, most_negative);
    if (s.mass_defect > 1e-6) throw IntegrationError(ErrorKind::MassLeak, t, s.mass_defect);
    if (std::abs(s.mean - m0) > 1e-6) throw IntegrationError(ErrorKind::MeanDrift, t, s.mean - m0);
    return s;
  };

  const auto record = [&](double t) {
    const MeanFieldState s = diagnostics(t);
    const DiscreteDist law = detail::as_distribution(p);
    TrajectorySample row;
    row.t = t;
    row.d2 = toscani_distance(law, equilibrium, 2, cfg.sup).value;
    row.w1 = wasserstein1_cdf(law, equilibrium);
    row.w2 = wasserstein_p(law, equilibrium, 2.0);
    row.mass_defect = s.mass_defect;
    row.mean = s.mean;
    traj.samples.push_back(row);
  };

  record(0.0);
  for (std::size_t step = 1; step <= steps; ++step) {
    const double h = cfg.dt;
    detail::collision_into(p, k1, table);
    for (std::size_t n = 0; n < len; ++n) tmp[n] = p[n] + 0.5 * h * k1[n];
    detail::collision_into(tmp, k2, table);
    for (std::size_t n = 0; n < len; ++n) tmp[n] = p[n] + 0.5 * h * k2[n];
    detail::collision_into(tmp, k3, table);
    for (std::size_t n = 0; n < len; ++n) tmp[n] = p[n] + h * k3[n];
    detail::collision_into(tmp, k4, table);
    for (std::size_t n = 0; n < len; ++n) p[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);

    const double t = static_cast<double>(step) * h;
    if (step % stride == 0 || step == steps)
      record(t);
    else
      diagnostics(t);
  }

  traj.final_state = diagnostics(static_cast<double>(steps) * cfg.dt);
  traj.final_state.p = p;
  return traj;
}

// ---------------------------------------------------------------------------
// N-agent binomial reshuffling
// ---------------------------------------------------------------------------

/// Binomial(n, 1/2) as the number of set bits among n fair random bits.
inline std::uint64_t binomial_half(std::uint64_t n, Rng& rng) {
  std::uint64_t count = 0;
  while (n >= 64) {
    count += static_cast<std::uint64_t>(std::popcount(rng()));
    n -= 64;
  }
  if (n > 0) {
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    count += static_cast<std::uint64_t>(std::popcount(rng() & mask));
  }
  return count;
}

struct AgentSnapshot {
  double t = 0.0;
  std::vector<std::uint64_t> counts;  ///< counts[n] = agents holding n dollars
  std::uint64_t total = 0;            ///< total wealth at the snapshot
  DiscreteDist empirical() const {
    const std::uint64_t agents = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    std::vector<double> p(counts.size());
    for (std::size_t n = 0; n < counts.size(); ++n) p[n] = static_cast<double>(counts[n]) / static_cast<double>(agents);
    return make_dist(std::move(p));
  }
};

struct AgentConfig {
  std::size_t agents = 1000;
  std::uint64_t mu = 5;
  double t_end = 10.0;
  std::vector<double> snapshot_times;
};

namespace detail {

inline AgentSnapshot snapshot_of(const std::vector<std::uint64_t>& wealth, double t) {
  AgentSnapshot snap;
  snap.t = t;
  const std::uint64_t top = *std::max_element(wealth.begin(), wealth.end());
  snap.counts.assign(top + 1, 0);
  for (std::uint64_t x : wealth) {
    ++snap.counts[x];
    snap.total += x;
  }
  return snap;
}

}  // namespace detail

/// Event-driven simulation: a Poisson clock of rate N triggers exchanges; each
/// picks an unordered pair uniformly and redraws X_i ~ Binomial(X_i + X_j, 1/2),
/// X_j taking the remainder. Snapshots at time s include every event with
/// time <= s.
inline std::vector<AgentSnapshot> agent_sim(const AgentConfig& cfg, Rng& rng) {
  if (cfg.agents < 2) throw Error(ErrorKind::InvalidArgument, "need at least two agents");
  if (cfg.mu < 1) throw Error(ErrorKind::InvalidArgument, "mu must be a positive integer");
  std::vector<double> times = cfg.snapshot_times;
  std::sort(times.begin(), times.end());
  for (double s : times)
    if (!(s >= 0.0 && s <= cfg.t_end))
      throw Error(ErrorKind::InvalidArgument, "snapshot time " + format_g17(s) + " outside [0, t_end]");

  std::vector<std::uint64_t> wealth(cfg.agents, cfg.mu);
  std::exponential_distribution<double> clock(static_cast<double>(cfg.agents));
  std::uniform_int_distribution<std::size_t> first(0, cfg.agents - 1);
  std::uniform_int_distribution<std::size_t> second(0, cfg.agents - 2);

  std::vector<AgentSnapshot> out;
  out.reserve(times.size());
  std::size_t next_snap = 0;
  double t = 0.0;
  while (next_snap < times.size()) {
    const double t_event = t + clock(rng);
    while (next_snap < times.size() && times[next_snap] < t_event)
      out.push_back(detail::snapshot_of(wealth, times[next_snap++]));
    if (t_event > cfg.t_end) break;
    t = t_event;
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    const std::uint64_t pooled = wealth[i] + wealth[j];
    wealth[i] = binomial_half(pooled, rng);
    wealth[j] = pooled - wealth[i];
  }
  return out;
}

/// Independent replicates r = 0..R-1 seeded with derive_seed(seed, r),
/// returned in replicate order.
inline std::vector<std::vector<AgentSnapshot>> agent_replicates(const AgentConfig& cfg, std::size_t replicates,
                                                                std::uint64_t seed, unsigned workers = 0) {
  std::vector<std::vector<AgentSnapshot>> results(replicates);
  std::vector<std::exception_ptr> errors(replicates);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t r = next.fetch_add(1); r < replicates; r = next.fetch_add(1)) {
      try {
        Rng rng(derive_seed(seed, r));
        results[r] = agent_sim(cfg, rng);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  unsigned n = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, replicates));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

// ---------------------------------------------------------------------------
// Decay fits
// ---------------------------------------------------------------------------

enum class DecayMetric { D2, W2 };

struct DecayFit {
  /// D2: exponential rate (minus the slope of log D2 against t).
  /// W2: power exponent (slope of log W2 against log t).
  double rate = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Ordinary least squares of log(y) against x (or log x).
inline DecayFit fit_log_linear(std::span<const double> x, std::span<const double> y, bool log_x) {
  const std::size_t n = x.size();
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = log_x ? std::log(x[i]) : x[i];
    v[i] = std::log(y[i]);
  }
  const double mu_u = std::accumulate(u.begin(), u.end(), 0.0) / double(n);
  const double mu_v = std::accumulate(v.begin(), v.end(), 0.0) / double(n);
  double suu = 0.0, suv = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    suu += (u[i] - mu_u) * (u[i] - mu_u);
    suv += (u[i] - mu_u) * (v[i] - mu_v);
    svv += (v[i] - mu_v) * (v[i] - mu_v);
  }
  DecayFit fit;
  fit.samples = n;
  fit.slope = suu > 0.0 ? suv / suu : 0.0;
  fit.intercept = mu_v - fit.slope * mu_u;
  fit.r_squared = svv > 0.0 ? (suv * suv) / (suu * svv) : 1.0;
  return fit;
}

/// Fits the decay of D2 (log-linear in t) or W2 (log-log) over [t_lo, t_hi].
inline DecayFit fit_decay_rate(const Trajectory& traj, DecayMetric metric, double t_lo, double t_hi) {
  if (metric == DecayMetric::W2 && !(t_lo > 0.0))
    throw Error(ErrorKind::InvalidArgument, "power-law fit needs a window with t > 0");
  std::vector<double> x, y;
  std::size_t in_window = 0;
  for (const auto& s : traj.samples) {
    if (s.t < t_lo || s.t > t_hi) continue;
    ++in_window;
    const double value = metric == DecayMetric::D2 ? s.d2 : s.w2;
    if (!(value > 1e-13) || !std::isfinite(value)) continue;
    x.push_back(s.t);
    y.push_back(value);
  }
  if (in_window < 10)
    throw Error(ErrorKind::InsufficientSamples, std::to_string(in_window) + " samples in fit window");
  if (x.size() < 10)
    throw Error(ErrorKind::MetricUnderflow, "only " + std::to_string(x.size()) + " samples above 1e-13 in fit window");
  DecayFit fit = fit_log_linear(x, y, metric == DecayMetric::W2);
  fit.rate = metric == DecayMetric::D2 ? -fit.slope : fit.slope;
  return fit;
}

}  // namespace pgfwass
