#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "config.hpp"
#include "dist.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "numeric.hpp"
#include "transport.hpp"

namespace pgfwass {

enum class Inequality { Part1, Part2, Part3, W1W2 };

constexpr std::string_view to_string(Inequality which) {
  switch (which) {
    case Inequality::Part1: return "part1";
    case Inequality::Part2: return "part2";
    case Inequality::Part3: return "part3";
    case Inequality::W1W2: return "w1w2";
  }
  return "unknown";
}

inline Inequality parse_inequality(std::string_view name) {
  for (auto which : {Inequality::Part1, Inequality::Part2, Inequality::Part3, Inequality::W1W2})
    if (name == to_string(which)) return which;
  throw Error(ErrorKind::InvalidArgument, "unknown inequality '" + std::string(name) + "'");
}

/// One evaluated instance of lhs <= rhs.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
  bool satisfied = true;
  std::string inputs_digest;
};

/// Empirical witness of the constant in W_2^2 <= C D_2^{alpha/(1+alpha)}.
struct Part3Record {
  double w2_squared = 0.0;
  double d2_power = 0.0;
  double ratio = 0.0;
  bool skipped = false;  ///< D_2 vanishes; ratio undefined
};

inline std::string pair_digest(const DiscreteDist& f, const DiscreteDist& g) {
  Fnv1a h;
  for (double p : f.probs()) h.update(p);
  h.update(std::string_view("|"));
  for (double p : g.probs()) h.update(p);
  return h.hex();
}

namespace detail {

inline InequalityReport make_report(std::string_view name, double lhs, double rhs, std::string digest,
                                    const Tolerances& tol) {
  InequalityReport r{std::string(name), lhs, rhs, rhs - lhs, true, std::move(digest)};
  r.satisfied = r.slack >= -tol.violation_slack;
  return r;
}

inline void require_equal_means(const DiscreteDist& f, const DiscreteDist& g, const Tolerances& tol) {
  const double gap = std::abs(mean(f) - mean(g));
  if (gap > tol.mean_equality) throw Error(ErrorKind::UnequalMeans, "means differ by " + format_g17(gap));
}

}  // namespace detail

/// D_1(f, g) <= W_1(f, g).
inline InequalityReport check_part1(const DiscreteDist& f, const DiscreteDist& g, const Tolerances& tol = kTolerances) {
  const double lhs = toscani_distance(f, g, 1).value;
  const double rhs = wasserstein1_cdf(f, g);
  return detail::make_report(to_string(Inequality::Part1), lhs, rhs, pair_digest(f, g), tol);
}

/// For equal means: D_2 <= W_2^2 / 2 + min(m_2(f), m_2(g))^{1/2} W_2.
inline InequalityReport check_part2(const DiscreteDist& f, const DiscreteDist& g, const Tolerances& tol = kTolerances) {
  detail::require_equal_means(f, g, tol);
  const double lhs = toscani_distance(f, g, 2, {}, tol).value;
  const double w2 = wasserstein_p(f, g, 2.0);
  const double m2 = std::min(moment(f, 2.0), moment(g, 2.0));
  const double rhs = 0.5 * w2 * w2 + std::sqrt(m2) * w2;
  return detail::make_report(to_string(Inequality::Part2), lhs, rhs, pair_digest(f, g), tol);
}

/// W_2^2 against D_2^{alpha/(1+alpha)} for equal-mean pairs. A vanishing D_2
/// is a skip unless W_2 stays positive, which would contradict the bound.
inline Part3Record check_part3(const DiscreteDist& f, const DiscreteDist& g, double alpha,
                               const Tolerances& tol = kTolerances) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  detail::require_equal_means(f, g, tol);
  const double d2 = toscani_distance(f, g, 2, {}, tol).value;
  const double w2 = wasserstein_p(f, g, 2.0);
  Part3Record rec;
  rec.w2_squared = w2 * w2;
  if (!std::isfinite(d2) || d2 <= 1e-14) {
    if (w2 > 1e-9)
      throw Error(ErrorKind::DegenerateDistance,
                  "D_2 = " + format_g17(d2) + " while W_2 = " + format_g17(w2) + " (" + pair_digest(f, g) + ")");
    rec.skipped = true;
    return rec;
  }
  rec.d2_power = std::pow(d2, alpha / (1.0 + alpha));
  rec.ratio = rec.w2_squared / rec.d2_power;
  return rec;
}

/// Prefactor 2^{(2+a)/(1+a)} (a^{1/(1+a)} + a^{-a/(1+a)}) of the W_1 -> W_2 comparison.
inline double w1w2_prefactor(double alpha) {
  const double e = 1.0 + alpha;
  return std::pow(2.0, (2.0 + alpha) / e) * (std::pow(alpha, 1.0 / e) + std::pow(alpha, -alpha / e));
}

/// W_2^2 <= prefactor(alpha) m_{2+alpha}^{1/(1+alpha)} W_1^{alpha/(1+alpha)}.
inline InequalityReport check_w1w2_interpolation(const DiscreteDist& f, const DiscreteDist& g, double alpha,
                                                 const Tolerances& tol = kTolerances) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  const double w2 = wasserstein_p(f, g, 2.0);
  const double w1 = wasserstein1_cdf(f, g);
  const double m = std::max(moment(f, 2.0 + alpha), moment(g, 2.0 + alpha));
  const double e = 1.0 + alpha;
  const double rhs = w1w2_prefactor(alpha) * std::pow(m, 1.0 / e) * std::pow(w1, alpha / e);
  return detail::make_report(to_string(Inequality::W1W2), w2 * w2, rhs, pair_digest(f, g), tol);
}

struct SweepConfig {
  Inequality which = Inequality::Part1;
  std::size_t trials = 1000;
  std::size_t support = 10;  ///< support bound K of the random pairs
  double alpha = 1.0;        ///< used by part3 and w1w2
  std::uint64_t seed = 0;
  unsigned workers = 0;      ///< 0 = hardware concurrency
};

struct SweepReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  std::optional<double> min_slack;  ///< pass/fail inequalities only
  std::optional<double> max_ratio;  ///< part3 only
  std::size_t worst_case_trial = 0;
  std::uint64_t worst_case_seed = 0;
  std::string worst_case;           ///< digest of the worst pair
  double elapsed_sec = 0.0;
};

namespace detail {

struct TrialOutcome {
  double score = 0.0;  // slack, or ratio for part3
  bool violated = false;
  bool skipped = false;
  std::string digest;
};

inline TrialOutcome run_trial(const SweepConfig& cfg, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  TrialOutcome out;
  switch (cfg.which) {
    case Inequality::Part1:
    case Inequality::W1W2: {
      const DiscreteDist f = random_dist(cfg.support, rng);
      const DiscreteDist g = random_dist(cfg.support, rng);
      const auto rep = cfg.which == Inequality::Part1 ? check_part1(f, g) : check_w1w2_interpolation(f, g, cfg.alpha);
      out.score = rep.slack;
      out.violated = !rep.satisfied;
      out.digest = rep.inputs_digest;
      break;
    }
    case Inequality::Part2: {
      const auto [f, g] = random_equal_mean_pair(cfg.support, rng);
      const auto rep = check_part2(f, g);
      out.score = rep.slack;
      out.violated = !rep.satisfied;
      out.digest = rep.inputs_digest;
      break;
    }
    case Inequality::Part3: {
      const auto [f, g] = random_equal_mean_pair(cfg.support, rng);
      const auto rec = check_part3(f, g, cfg.alpha);
      out.score = rec.ratio;
      out.skipped = rec.skipped;
      out.digest = pair_digest(f, g);
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Runs `trials` independent randomized checks. Trial t draws its pair from a
/// generator seeded with derive_seed(seed, t), so the report does not depend
/// on how trials are spread over worker threads. Part3 sweeps report the
/// largest observed ratio instead of violations.
inline SweepReport sweep(const SweepConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one trial");
  if (cfg.which != Inequality::Part1 && cfg.which != Inequality::W1W2 && cfg.support < 2)
    throw Error(ErrorKind::InvalidArgument, "equal-mean sweeps need support bound >= 2");
  const auto start = std::chrono::steady_clock::now();

  std::vector<detail::TrialOutcome> outcomes(cfg.trials);
  std::vector<std::exception_ptr> errors(cfg.trials);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1)) {
      try {
        outcomes[t] = detail::run_trial(cfg, derive_seed(cfg.seed, t));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.trials));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  SweepReport rep;
  rep.name = std::string(to_string(cfg.which));
  rep.trials = cfg.trials;
  const bool ratio_study = cfg.which == Inequality::Part3;
  bool have_worst = false;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const auto& o = outcomes[t];
    if (o.skipped) {
      ++rep.skipped;
      continue;
    }
    if (o.violated) ++rep.violations;
    const bool worse = !have_worst || (ratio_study ? o.score > outcomes[rep.worst_case_trial].score
                                                   : o.score < outcomes[rep.worst_case_trial].score);
    if (worse) {
      have_worst = true;
      rep.worst_case_trial = t;
    }
  }
  if (have_worst) {
    const double score = outcomes[rep.worst_case_trial].score;
    (ratio_study ? rep.max_ratio : rep.min_slack) = score;
    rep.worst_case_seed = derive_seed(cfg.seed, rep.worst_case_trial);
    rep.worst_case = outcomes[rep.worst_case_trial].digest;
  }
  rep.elapsed_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace pgfwass
