// Command-line front end for the pgfwass library.

#include <CLI11.hpp>

#include <pgfwass/cli.hpp>

int main(int argc, char** argv) {
  using pgfwass::cli::RunConfig;
  RunConfig cfg;

  CLI::App app{"Fourier-based (PGF) and Wasserstein distances on the non-negative integers"};
  app.require_subcommand(1);

  const auto add_pair = [&](CLI::App* sub) {
    sub->add_option("--dist-a", cfg.dist_a, "First distribution (JSON {\"probs\": [...]})")->required();
    sub->add_option("--dist-b", cfg.dist_b, "Second distribution (JSON)")->required();
  };
  const auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  };
  const auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output file (default: standard output)");
  };

  auto* metric = app.add_subcommand("metric", "Distance between two distribution files");
  add_pair(metric);
  metric->add_option("--kind", cfg.kind, "d1 | d2 | w1 | w2")
      ->check(CLI::IsMember({"d1", "d2", "w1", "w2"}))
      ->capture_default_str();
  metric->add_flag("--allow-infinite", cfg.allow_infinite, "Print inf instead of failing when D_2 diverges");

  auto* verify = app.add_subcommand("verify", "Randomized sweep of one inequality");
  verify->add_option("--which", cfg.which, "part1 | part2 | part3 | w1w2")
      ->check(CLI::IsMember({"part1", "part2", "part3", "w1w2"}))
      ->capture_default_str();
  verify->add_option("--trials", cfg.trials, "Number of random pairs")->capture_default_str();
  verify->add_option("--support", cfg.support, "Support bound K of the random pairs")->capture_default_str();
  verify->add_option("--alpha", cfg.alpha, "Moment exponent offset for part3 / w1w2")->capture_default_str();
  verify->add_option("--workers", cfg.workers, "Worker threads (0 = all cores)")->capture_default_str();
  verify->add_flag("--with-timing", cfg.with_timing, "Include elapsed_sec in the report");
  add_seed(verify);
  add_out(verify);

  auto* constant = app.add_subcommand("constant", "Lower bound on the l1 / ell equivalence constant");
  constant->add_option("--dim", cfg.dim, "Dimension N")->capture_default_str();
  constant->add_option("--trials", cfg.trials, "Random directions")->capture_default_str();
  add_seed(constant);

  auto* ode = app.add_subcommand("ode", "Integrate the mean-field reshuffling dynamics");
  ode->add_option("--mu", cfg.mu, "Mean wealth")->capture_default_str();
  ode->add_option("--init", cfg.init, "dirac | poisson | file:PATH")->capture_default_str();
  ode->add_option("--dt", cfg.dt, "RK4 step")->capture_default_str();
  ode->add_option("--t-end", cfg.t_end, "Horizon")->capture_default_str();
  ode->add_option("--sample-every", cfg.sample_every, "Sampling interval")->capture_default_str();
  ode->add_option("--n-max", cfg.n_max, "Minimum truncation index")->capture_default_str();
  add_seed(ode);
  add_out(ode);

  auto* abm = app.add_subcommand("abm", "N-agent binomial reshuffling simulation");
  abm->add_option("--agents", cfg.agents, "Number of agents")->capture_default_str();
  abm->add_option("--mu", cfg.mu, "Initial dollars per agent")->capture_default_str();
  abm->add_option("--t-end", cfg.t_end, "Horizon")->capture_default_str();
  abm->add_option("--snapshots", cfg.snapshots, "Comma separated snapshot times (default: t-end)");
  abm->add_option("--replicates", cfg.replicates, "Independent replicates pooled in the output")->capture_default_str();
  abm->add_option("--workers", cfg.workers, "Worker threads (0 = all cores)")->capture_default_str();
  add_seed(abm);
  add_out(abm);

  auto* profile = app.add_subcommand("profile", "Ratio |f^-g^|/(1-z)^s on a grid of z");
  add_pair(profile);
  profile->add_option("--order", cfg.order, "1 | 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  profile->add_option("--grid", cfg.grid, "Grid points on [0, 1]")->capture_default_str();
  add_out(profile);

  auto* coupling = app.add_subcommand("coupling", "Transport plan between two distributions");
  add_pair(coupling);
  coupling->add_flag("--random", cfg.random_plan, "Random feasible plan instead of the monotone one");
  add_seed(coupling);
  add_out(coupling);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pgfwass::cli::kMalformedInput;
  }

  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  return pgfwass::cli::run(cfg);
}
