#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dist.hpp"
#include "error.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "numeric.hpp"
#include "reshuffle.hpp"
#include "transport.hpp"
#include "verify.hpp"

namespace pgfwass::cli {

enum ExitCode : int {
  kOk = 0,
  kMalformedInput = 1,
  kPrecondition = 2,
  kViolation = 3,
  kIntegrationFailure = 4,
};

/// Everything a subcommand needs. Defaults double as the documented CLI defaults.
struct RunConfig {
  std::string command;
  std::string dist_a;
  std::string dist_b;
  std::string out;  ///< empty: write to the output stream
  std::uint64_t seed = 0;

  std::string kind = "w1";      // metric: d1 | d2 | w1 | w2
  std::string which = "part1";  // verify: part1 | part2 | part3 | w1w2
  std::size_t trials = 1000;
  std::size_t support = 10;
  double alpha = 1.0;
  std::size_t dim = 2;

  double mu = 5.0;
  std::string init = "dirac";  // dirac | poisson | file:PATH
  double dt = 0.02;
  double t_end = 10.0;
  double sample_every = 0.1;
  std::size_t n_max = 0;

  std::size_t agents = 1000;
  std::string snapshots;  // comma separated times; empty means {t_end}
  std::size_t replicates = 1;

  int order = 1;
  std::size_t grid = 2048;

  bool allow_infinite = false;
  bool with_timing = false;
  bool random_plan = false;
  unsigned workers = 0;
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::NotNormalized:
    case ErrorKind::NegativeMass:
      return kMalformedInput;
    case ErrorKind::MassLeak:
    case ErrorKind::NegativeProbability:
    case ErrorKind::MeanDrift:
      return kIntegrationFailure;
    case ErrorKind::DegenerateDistance:
      return kViolation;
    default:
      return kPrecondition;
  }
}

/// Digest of the knobs that determine a command's output (paths and
/// scheduling excluded; input distributions enter through their contents).
inline std::string config_digest(const RunConfig& c, const std::vector<const DiscreteDist*>& inputs = {}) {
  std::ostringstream canon;
  canon << c.command << ';' << c.seed << ';' << c.kind << ';' << c.which << ';' << c.trials << ';' << c.support << ';'
        << format_g17(c.alpha) << ';' << c.dim << ';' << format_g17(c.mu) << ';' << c.init << ';' << format_g17(c.dt)
        << ';' << format_g17(c.t_end) << ';' << format_g17(c.sample_every) << ';' << c.n_max << ';' << c.agents << ';'
        << c.snapshots << ';' << c.replicates << ';' << c.order << ';' << c.grid << ';' << c.allow_infinite << ';'
        << c.random_plan;
  Fnv1a h;
  h.update(canon.str());
  for (const auto* d : inputs)
    for (double p : d->probs()) h.update(p);
  return h.hex();
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

inline std::vector<double> parse_times(const std::string& text) {
  std::vector<double> times;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorKind::ParseError, "bad snapshot time '" + item + "'");
    times.push_back(v);
  }
  return times;
}

/// Sends the body to cfg.out (or the stream when no path is given).
inline void emit(const RunConfig& cfg, std::ostream& stream, const std::function<void(std::ostream&)>& body) {
  if (cfg.out.empty()) {
    body(stream);
    return;
  }
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) throw Error(ErrorKind::ParseError, "cannot write " + cfg.out);
  body(file);
}

inline bool is_positive_integer(double x) { return x >= 1.0 && std::floor(x) == x; }

inline int run_metric(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const DiscreteDist a = read_dist_json(cfg.dist_a);
  const DiscreteDist b = read_dist_json(cfg.dist_b);
  double value = 0.0;
  if (cfg.kind == "d1") {
    value = toscani_distance(a, b, 1).value;
  } else if (cfg.kind == "d2") {
    value = toscani_distance(a, b, 2).value;
    if (std::isinf(value) && !cfg.allow_infinite) {
      err << "UnequalMeans: D_2 diverges for means " << format_g17(mean(a)) << " and " << format_g17(mean(b))
          << " (pass --allow-infinite to print inf)\n";
      return kPrecondition;
    }
  } else if (cfg.kind == "w1") {
    value = wasserstein1_cdf(a, b);
  } else if (cfg.kind == "w2") {
    value = wasserstein_p(a, b, 2.0);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown metric kind '" + cfg.kind + "'");
  }
  out << format_g17(value) << '\n';
  return kOk;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.trials >= 1, "--trials must be at least 1");
  require(cfg.alpha > 0.0, "--alpha must be positive");
  SweepConfig sc;
  sc.which = parse_inequality(cfg.which);
  sc.trials = cfg.trials;
  sc.support = cfg.support;
  sc.alpha = cfg.alpha;
  sc.seed = cfg.seed;
  sc.workers = cfg.workers;
  const SweepReport rep = sweep(sc);

  auto doc = sweep_to_json(rep, cfg.with_timing);
  doc["support"] = cfg.support;
  doc["alpha"] = cfg.alpha;
  doc["seed"] = cfg.seed;
  doc["config_digest"] = config_digest(cfg);
  emit(cfg, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  err << rep.name << ": " << rep.violations << " violations in " << rep.trials << " trials ("
      << format_g17(rep.elapsed_sec) << " s)\n";
  return rep.violations == 0 ? kOk : kViolation;
}

inline int run_constant(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(cfg.dim >= 1, "--dim must be at least 1");
  require(cfg.trials >= 1, "--trials must be at least 1");
  Rng rng(cfg.seed);
  out << format_g17(estimate_norm_constant(cfg.dim, cfg.trials, rng)) << '\n';
  return kOk;
}

inline int run_ode(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.mu > 0.0, "--mu must be positive");
  DiscreteDist p0 = [&] {
    if (cfg.init == "dirac") {
      require(is_positive_integer(cfg.mu), "--init dirac needs an integer --mu");
      return dirac(static_cast<std::size_t>(cfg.mu));
    }
    if (cfg.init == "poisson") return poisson_dist(cfg.mu, 1e-12);
    if (cfg.init.rfind("file:", 0) == 0) return read_dist_json(cfg.init.substr(5));
    throw Error(ErrorKind::InvalidArgument, "unknown --init '" + cfg.init + "'");
  }();
  OdeConfig oc;
  oc.mu = cfg.mu;
  oc.dt = cfg.dt;
  oc.t_end = cfg.t_end;
  oc.sample_every = cfg.sample_every;
  oc.n_max_override = cfg.n_max;
  try {
    const Trajectory traj = integrate_ode(p0, oc);
    emit(cfg, out, [&](std::ostream& os) {
      write_csv_preamble(os, {{"command", "ode"},
                              {"seed", std::to_string(cfg.seed)},
                              {"config_digest", config_digest(cfg, {&p0})},
                              {"trajectory_digest", traj.config_digest},
                              {"n_max", std::to_string(traj.n_max)}});
      write_trajectory_csv(os, traj);
    });
  } catch (const IntegrationError& e) {
    err << e.what() << '\n';
    return kIntegrationFailure;
  }
  return kOk;
}

inline int run_abm(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(is_positive_integer(cfg.mu), "--mu must be a positive integer for the agent model");
  require(cfg.agents >= 2, "--agents must be at least 2");
  require(cfg.replicates >= 1, "--replicates must be at least 1");
  require(cfg.t_end >= 0.0, "--t-end must be non-negative");
  AgentConfig ac;
  ac.agents = cfg.agents;
  ac.mu = static_cast<std::uint64_t>(cfg.mu);
  ac.t_end = cfg.t_end;
  ac.snapshot_times = parse_times(cfg.snapshots);
  if (ac.snapshot_times.empty()) ac.snapshot_times = {cfg.t_end};
  const auto reps = agent_replicates(ac, cfg.replicates, cfg.seed, cfg.workers);
  emit(cfg, out, [&](std::ostream& os) {
    write_csv_preamble(os, {{"command", "abm"},
                            {"seed", std::to_string(cfg.seed)},
                            {"config_digest", config_digest(cfg)},
                            {"replicates", std::to_string(cfg.replicates)}});
    write_snapshots_csv(os, reps);
  });
  return kOk;
}

inline int run_profile(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(cfg.grid >= 2, "--grid must be at least 2");
  const DiscreteDist a = read_dist_json(cfg.dist_a);
  const DiscreteDist b = read_dist_json(cfg.dist_b);
  const auto profile = toscani_profile(a, b, cfg.order, cfg.grid);
  emit(cfg, out, [&](std::ostream& os) {
    write_csv_preamble(os, {{"command", "profile"},
                            {"seed", std::to_string(cfg.seed)},
                            {"config_digest", config_digest(cfg, {&a, &b})}});
    write_profile_csv(os, profile);
  });
  return kOk;
}

inline int run_coupling(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const DiscreteDist a = read_dist_json(cfg.dist_a);
  const DiscreteDist b = read_dist_json(cfg.dist_b);
  Rng rng(cfg.seed);
  const Coupling plan = cfg.random_plan ? random_feasible_coupling(a, b, rng) : monotone_coupling(a, b);
  emit(cfg, out, [&](std::ostream& os) {
    write_csv_preamble(os, {{"command", "coupling"},
                            {"seed", std::to_string(cfg.seed)},
                            {"config_digest", config_digest(cfg, {&a, &b})}});
    write_coupling_csv(os, plan);
  });
  return kOk;
}

}  // namespace detail

/// Executes one subcommand; returns the process exit status.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (cfg.command == "metric") return detail::run_metric(cfg, out, err);
    if (cfg.command == "verify") return detail::run_verify(cfg, out, err);
    if (cfg.command == "constant") return detail::run_constant(cfg, out, err);
    if (cfg.command == "ode") return detail::run_ode(cfg, out, err);
    if (cfg.command == "abm") return detail::run_abm(cfg, out, err);
    if (cfg.command == "profile") return detail::run_profile(cfg, out, err);
    if (cfg.command == "coupling") return detail::run_coupling(cfg, out, err);
    err << "unknown command '" << cfg.command << "'\n";
    return kMalformedInput;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.kind());
  }
}

}  // namespace pgfwass::cli
