#pragma once

// JSON summaries and CSV field files. Every artifact carries the config hash.

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "sgm/barriers.hpp"
#include "sgm/error.hpp"
#include "sgm/grid.hpp"
#include "sgm/operator.hpp"
#include "sgm/solver.hpp"
#include "sgm/verify.hpp"

namespace sgm {

using json = nlohmann::ordered_json;

inline json to_json(const CheckRecord& c) {
  json j;
  j["name"] = c.name;
  j["claim"] = c.claim;
  j["status"] = to_string(c.status);
  j["pass"] = c.ok();
  if (c.worst_node == CheckRecord::no_node) j["worst_node"] = nullptr;
  else j["worst_node"] = c.worst_node;
  j["slack"] = c.slack;
  j["tolerance"] = c.tolerance;
  j["detail"] = c.detail;
  json m = json::object();
  for (const auto& [k, v] : c.metrics) m[k] = v;
  j["metrics"] = m;
  return j;
}

inline json to_json(const VerificationReport& r, const std::string& config_hash) {
  json j;
  j["config_hash"] = config_hash;
  j["overall_pass"] = r.overall_pass();
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = checks;
  return j;
}

inline json barrier_summary(const BarrierSet& b, const std::string& config_hash) {
  json j;
  j["config_hash"] = config_hash;
  j["c"] = b.c;
  j["C"] = b.C;
  j["delta"] = b.delta;
  j["worst_node_slack"] = {{"node", b.certificate.worst_node},
                           {"slack", b.certificate.worst_slack},
                           {"chain", b.certificate.worst_chain}};
  j["nodes_checked"] = b.certificate.nodes_checked;
  return j;
}

inline json eigen_summary(const EigenPair& p, double rayleigh, const std::string& config_hash) {
  json j;
  j["config_hash"] = config_hash;
  j["lambda1"] = p.lambda;
  j["iterations"] = p.iterations;
  j["rayleigh_phi1"] = rayleigh;
  return j;
}

/// Per-solve run summary. `box_check` is the bounds check of the result.
inline json solve_summary(const SolveResult& r, const BarrierSet& b, const CheckRecord& box_check,
                          const std::string& config_hash) {
  json j;
  j["config_hash"] = config_hash;
  j["branch"] = to_string(r.branch);
  j["eps"] = r.eps;
  j["iterations"] = r.iterations;
  j["residual_sup"] = r.residual_sup;
  j["status"] = to_string(r.status);
  j["classification"] = to_string(r.sign.kind);
  j["synchronous_fraction"] = r.sign.synchronous_fraction;
  j["box_check"] = {{"pass", box_check.ok()}, {"slack", box_check.slack}};
  j["C"] = b.C;
  j["c"] = b.c;
  return j;
}

inline json continuation_summary(const ContinuationTrace& t, const std::string& config_hash) {
  json j;
  j["config_hash"] = config_hash;
  j["completed"] = t.completed;
  j["stopped_early"] = t.stopped_early;
  j["failure"] = t.failure;
  json stages = json::array();
  for (std::size_t k = 0; k < t.results.size(); ++k) {
    const auto& r = t.results[k];
    json s = {{"eps", t.eps_schedule[k]},
              {"iterations", r.iterations},
              {"residual_sup", r.residual_sup},
              {"status", to_string(r.status)},
              {"classification", to_string(r.sign.kind)}};
    if (k < t.cold_iterations.size()) s["cold_iterations"] = t.cold_iterations[k];
    stages.push_back(s);
  }
  j["stages"] = stages;
  json diffs = json::array();
  for (const auto& [du, dv] : t.h1_diffs) diffs.push_back(json::array({du, dv}));
  j["h1_diffs"] = diffs;
  return j;
}

inline SolveStatus parse_status(const std::string& s) {
  if (s == "converged") return SolveStatus::converged;
  if (s == "iteration_cap") return SolveStatus::iteration_cap;
  if (s == "box_violation") return SolveStatus::box_violation;
  throw InvalidArgument("unknown solve status '" + s + "'");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read '" + path.string() + "'");
  return json::parse(f);
}

inline void write_field(const std::filesystem::path& path, const Field& f, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << '\n';
  write_csv(os, f);
  write_text(path, os.str());
}

inline Field read_field(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read '" + path.string() + "'");
  return read_csv(f, std::move(grid));
}

}  // namespace sgm
