#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <pgfwass/cli.hpp>

using namespace pgfwass;
using namespace pgfwass::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("pgfwass_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& body) {
  const auto path = scratch() / name;
  std::ofstream(path) << body;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(const RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = run(cfg, out, err);
  return {code, out.str(), err.str()};
}

// Runs the built binary; returns its exit status and captured stdout.
Outcome shell(const std::string& args) {
  const auto out_path = (scratch() / "stdout.txt").string();
  const std::string cmd = std::string(PGFWASS_CLI_PATH) + " " + args + " > " + out_path + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out_path), {}};
}

const std::string kDirac0 = R"({"probs": [1]})";
const std::string kDirac1 = R"({"probs": [0, 1]})";
const std::string kHalf02 = R"({"probs": [0.5, 0, 0.5]})";

}  // namespace

TEST_CASE("metric subcommand", "[cli]") {
  RunConfig cfg;
  cfg.command = "metric";
  cfg.dist_a = write_file("d1.json", kDirac1);
  cfg.dist_b = write_file("h.json", kHalf02);

  cfg.kind = "d2";
  auto r = call(cfg);
  CHECK(r.code == kOk);
  CHECK(r.out == "0.5\n");

  cfg.kind = "w2";
  CHECK(call(cfg).out == "1\n");
  cfg.kind = "w1";
  CHECK(call(cfg).out == "1\n");

  cfg.dist_a = write_file("d0.json", kDirac0);
  cfg.kind = "d1";
  CHECK(call(cfg).out == "1\n");  // ratio (1 + z)/2, largest at z = 1

  cfg.dist_b = write_file("d1.json", kDirac1);
  cfg.kind = "d2";
  r = call(cfg);
  CHECK(r.code == kPrecondition);
  CHECK(r.out.empty());
  CHECK(r.err.find("--allow-infinite") != std::string::npos);
  cfg.allow_infinite = true;
  r = call(cfg);
  CHECK(r.code == kOk);
  CHECK(r.out == "inf\n");
}

TEST_CASE("malformed inputs exit 1", "[cli]") {
  RunConfig cfg;
  cfg.command = "metric";
  cfg.dist_a = write_file("bad_sum.json", R"({"probs": [0.5, 0.6]})");
  cfg.dist_b = write_file("d0.json", kDirac0);
  CHECK(call(cfg).code == kMalformedInput);
  cfg.dist_a = write_file("neg.json", R"({"probs": [1.1, -0.1]})");
  CHECK(call(cfg).code == kMalformedInput);
  cfg.dist_a = write_file("garbage.json", "{probs");
  CHECK(call(cfg).code == kMalformedInput);
  cfg.dist_a = (scratch() / "missing.json").string();
  CHECK(call(cfg).code == kMalformedInput);
}

TEST_CASE("exit code table", "[cli]") {
  CHECK(exit_code_for(ErrorKind::ParseError) == 1);
  CHECK(exit_code_for(ErrorKind::NotNormalized) == 1);
  CHECK(exit_code_for(ErrorKind::NegativeMass) == 1);
  CHECK(exit_code_for(ErrorKind::UnequalMeans) == 2);
  CHECK(exit_code_for(ErrorKind::InvalidArgument) == 2);
  CHECK(exit_code_for(ErrorKind::DegenerateDistance) == 3);
  CHECK(exit_code_for(ErrorKind::MassLeak) == 4);
  CHECK(exit_code_for(ErrorKind::NegativeProbability) == 4);
  CHECK(exit_code_for(ErrorKind::MeanDrift) == 4);
}

TEST_CASE("verify subcommand", "[cli]") {
  RunConfig cfg;
  cfg.command = "verify";
  cfg.which = "part1";
  cfg.trials = 50;
  cfg.support = 8;
  cfg.seed = 3;
  const auto a = call(cfg);
  CHECK(a.code == kOk);
  const auto doc = nlohmann::json::parse(a.out);
  CHECK(doc["name"] == "part1");
  CHECK(doc["trials"] == 50);
  CHECK(doc["violations"] == 0);
  CHECK(doc["seed"] == 3);
  CHECK(doc.contains("config_digest"));
  CHECK_FALSE(doc.contains("elapsed_sec"));
  CHECK(call(cfg).out == a.out);

  cfg.trials = 0;
  CHECK(call(cfg).code == kPrecondition);
}

TEST_CASE("ode subcommand", "[cli]") {
  RunConfig cfg;
  cfg.command = "ode";
  cfg.mu = 3.0;
  cfg.t_end = 1.0;
  cfg.sample_every = 0.5;
  const auto r = call(cfg);
  REQUIRE(r.code == kOk);
  std::istringstream lines(r.out);
  std::string preamble, header;
  std::getline(lines, preamble);
  std::getline(lines, header);
  CHECK(preamble.rfind("# command=ode seed=0 config_digest=", 0) == 0);
  CHECK(header == "t,D2,W1,W2,mass_defect,mean");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 3);

  cfg.mu = 2.5;  // no integer Dirac with this mean
  CHECK(call(cfg).code == kPrecondition);
  cfg.init = "poisson";
  CHECK(call(cfg).code == kOk);
  cfg.init = "file:" + write_file("d1.json", kDirac1);
  CHECK(call(cfg).code == kPrecondition);  // mean 1 against mu 2.5
  cfg.mu = 1.0;
  CHECK(call(cfg).code == kOk);
}

TEST_CASE("abm, profile, constant and coupling subcommands", "[cli]") {
  RunConfig abm;
  abm.command = "abm";
  abm.agents = 100;
  abm.mu = 2.0;
  abm.t_end = 2.0;
  abm.snapshots = "0,1,2";
  abm.replicates = 2;
  const auto a = call(abm);
  REQUIRE(a.code == kOk);
  CHECK(a.out.find("t,n,count,fraction\n") != std::string::npos);
  CHECK(a.out.find("\n0,2,200,1\n") != std::string::npos);  // both replicates at t = 0
  CHECK(call(abm).out == a.out);
  abm.snapshots = "1,x";
  CHECK(call(abm).code == kMalformedInput);

  RunConfig prof;
  prof.command = "profile";
  prof.dist_a = write_file("d1.json", kDirac1);
  prof.dist_b = write_file("h.json", kHalf02);
  prof.order = 2;
  prof.grid = 3;
  const auto p = call(prof);
  REQUIRE(p.code == kOk);
  CHECK(p.out.find("z,ratio\n0,0.5\n0.5,0.5\n1,0.5\n") != std::string::npos);

  RunConfig cst;
  cst.command = "constant";
  cst.dim = 1;
  cst.trials = 10;
  CHECK(call(cst).out == "1\n");

  RunConfig cpl;
  cpl.command = "coupling";
  cpl.dist_a = prof.dist_a;
  cpl.dist_b = prof.dist_b;
  const auto c = call(cpl);
  REQUIRE(c.code == kOk);
  CHECK(c.out.find("i,j,mass\n1,0,0.5\n1,2,0.5\n") != std::string::npos);
}

TEST_CASE("outputs carry seed and config digest", "[cli]") {
  RunConfig a;
  a.command = "abm";
  a.agents = 10;
  a.t_end = 1.0;
  a.seed = 42;
  const auto out = call(a).out;
  CHECK(out.find("seed=42") != std::string::npos);
  CHECK(out.find("config_digest=" + config_digest(a)) != std::string::npos);
  RunConfig b = a;
  b.seed = 43;
  CHECK(config_digest(a) != config_digest(b));
  RunConfig c = a;
  c.out = "elsewhere.csv";
  c.workers = 7;
  CHECK(config_digest(a) == config_digest(c));
}

TEST_CASE("binary: exit codes and repeatable output", "[cli][binary]") {
  const auto d0 = write_file("d0.json", kDirac0);
  const auto d1 = write_file("d1.json", kDirac1);
  const auto h = write_file("h.json", kHalf02);
  const auto bad = write_file("bad_sum.json", R"({"probs": [0.5, 0.6]})");

  auto r = shell("metric --dist-a " + d1 + " --dist-b " + h + " --kind d2");
  CHECK(r.code == 0);
  CHECK(r.out == "0.5\n");
  CHECK(shell("metric --dist-a " + d0 + " --dist-b " + d1 + " --kind d2").code == 2);
  CHECK(shell("metric --dist-a " + d0 + " --dist-b " + d1 + " --kind d2 --allow-infinite").out == "inf\n");
  CHECK(shell("metric --dist-a " + bad + " --dist-b " + d1).code == 1);
  CHECK(shell("metric --dist-a " + d0).code == 1);
  CHECK(shell("metric --dist-a " + d0 + " --dist-b " + d1 + " --kind d3").code == 1);
  CHECK(shell("nonsense").code == 1);
  CHECK(shell("ode --mu 5 --t-end 1 --dt 0.5").code == 2);

  const std::string commands[] = {
      "verify --which part2 --trials 40 --support 6 --seed 9",
      "constant --dim 3 --trials 50 --seed 2",
      "ode --mu 2 --t-end 1 --sample-every 0.25",
      "abm --agents 50 --mu 3 --t-end 2 --snapshots 1,2 --replicates 3 --seed 5",
      "profile --dist-a " + d1 + " --dist-b " + h + " --order 1 --grid 9",
      "coupling --dist-a " + d0 + " --dist-b " + h + " --random --seed 4",
  };
  for (const auto& args : commands) {
    const auto first = shell(args);
    const auto second = shell(args);
    INFO(args);
    CHECK(first.code == 0);
    CHECK_FALSE(first.out.empty());
    CHECK(first.out == second.out);
  }

  const auto file = (scratch() / "traj.csv").string();
  CHECK(shell("ode --mu 2 --t-end 1 --out " + file).code == 0);
  CHECK(slurp(file).rfind("# command=ode", 0) == 0);
}
