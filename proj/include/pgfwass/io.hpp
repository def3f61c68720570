#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dist.hpp"
#include "error.hpp"
#include "numeric.hpp"
#include "reshuffle.hpp"
#include "transport.hpp"
#include "verify.hpp"

namespace pgfwass {

// Distribution files: {"probs": [p0, p1, ...]}

inline DiscreteDist parse_dist_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object() || !doc.contains("probs") || !doc["probs"].is_array())
    throw Error(ErrorKind::ParseError, "expected an object with a \"probs\" array");
  std::vector<double> probs;
  for (const auto& v : doc["probs"]) {
    if (!v.is_number()) throw Error(ErrorKind::ParseError, "\"probs\" entries must be numbers");
    probs.push_back(v.get<double>());
  }
  return make_dist(std::move(probs));
}

inline DiscreteDist read_dist_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dist_json(buf.str());
}

inline std::string dist_to_json(const DiscreteDist& f) {
  nlohmann::json doc;
  doc["probs"] = std::vector<double>(f.probs().begin(), f.probs().end());
  return doc.dump();
}

// Sweep reports

inline nlohmann::ordered_json sweep_to_json(const SweepReport& r, bool with_elapsed) {
  nlohmann::ordered_json doc;
  doc["name"] = r.name;
  doc["trials"] = r.trials;
  doc["violations"] = r.violations;
  doc["min_slack"] = r.min_slack ? nlohmann::ordered_json(*r.min_slack) : nlohmann::ordered_json(nullptr);
  doc["worst_case_seed"] = r.worst_case_seed;
  if (with_elapsed) doc["elapsed_sec"] = r.elapsed_sec;
  doc["max_ratio"] = r.max_ratio ? nlohmann::ordered_json(*r.max_ratio) : nlohmann::ordered_json(nullptr);
  doc["skipped"] = r.skipped;
  doc["worst_case_trial"] = r.worst_case_trial;
  doc["worst_case_digest"] = r.worst_case;
  return doc;
}

// CSV writers; every value carries 17 significant digits.

/// Header comment embedding provenance, e.g. "# command=ode seed=0 config_digest=...".
inline void write_csv_preamble(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& fields) {
  out << '#';
  for (const auto& [k, v] : fields) out << ' ' << k << '=' << v;
  out << '\n';
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,D2,W1,W2,mass_defect,mean\n";
  for (const auto& s : traj.samples)
    out << format_g17(s.t) << ',' << format_g17(s.d2) << ',' << format_g17(s.w1) << ',' << format_g17(s.w2) << ','
        << format_g17(s.mass_defect) << ',' << format_g17(s.mean) << '\n';
}

/// Rows (t, n, count, fraction). Several replicates of the same times are
/// pooled: counts add up and fractions are taken over all pooled agents.
inline void write_snapshots_csv(std::ostream& out, const std::vector<std::vector<AgentSnapshot>>& replicates) {
  out << "t,n,count,fraction\n";
  if (replicates.empty()) return;
  for (std::size_t k = 0; k < replicates.front().size(); ++k) {
    std::vector<std::uint64_t> pooled;
    std::uint64_t agents = 0;
    for (const auto& rep : replicates) {
      const auto& counts = rep[k].counts;
      if (pooled.size() < counts.size()) pooled.resize(counts.size(), 0);
      for (std::size_t n = 0; n < counts.size(); ++n) {
        pooled[n] += counts[n];
        agents += counts[n];
      }
    }
    const double t = replicates.front()[k].t;
    for (std::size_t n = 0; n < pooled.size(); ++n)
      out << format_g17(t) << ',' << n << ',' << pooled[n] << ','
          << format_g17(static_cast<double>(pooled[n]) / static_cast<double>(agents)) << '\n';
  }
}

inline void write_profile_csv(std::ostream& out, const std::vector<std::pair<double, double>>& profile) {
  out << "z,ratio\n";
  for (const auto& [z, r] : profile) out << format_g17(z) << ',' << format_g17(r) << '\n';
}

inline void write_coupling_csv(std::ostream& out, const Coupling& c) {
  out << "i,j,mass\n";
  for (const auto& e : c.entries()) out << e.source << ',' << e.target << ',' << format_g17(e.mass) << '\n';
}

}  // namespace pgfwass
