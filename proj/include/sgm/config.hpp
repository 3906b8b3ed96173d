#pragma once

// Flat key=value run configuration. Lines are `dotted.key = value`; '#' starts
// a comment. Unknown and duplicate keys are rejected with the offending line.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/grid.hpp"
#include "sgm/nonlinearity.hpp"
#include "sgm/solver.hpp"

namespace sgm {

struct RunConfig {
  Domain domain = Domain::interval(1.0);
  std::size_t n = 201;
  double alpha1 = 0.0, alpha2 = 0.0, beta1 = 0.0, beta2 = 0.0;
  double delta = 0.0;  // 0 selects 4 h

  double eps = 0.0;  // constant-sign branches
  double omega = 0.5;
  double tol_update = 1e-10;
  double tol_residual = 1e-10;
  std::size_t max_iter = 5000;
  bool clip = true;
  std::vector<Branch> branches{Branch::positive, Branch::negative, Branch::nodal};

  double nodal_eps = 0.125;  // single nodal solve outside continuation
  double nodal_box_scale = 1.001;
  double nodal_seed_amplitude = 0.1;
  bool nodal_odd_symmetry = true;

  int continuation_k_min = 1;
  int continuation_k_max = 26;
  double continuation_early_stop = 1e-8;

  double eigen_tol = 1e-13;

  std::size_t verify_n_starts = 10;
  double verify_agreement_tol = 1e-6;
  double verify_tol_sign_rel = 1e-6;
  double verify_max_near_zero_fraction = 0.02;
  double verify_final_h1_tol = 1e-6;
  double verify_mirror_tol = 1e-7;
  double verify_residual_tol = 1e-8;

  std::uint64_t seed = 42;

  Exponents exponents() const { return validate_exponents(alpha1, alpha2, beta1, beta2); }

  SolveConfig solve_config(Branch b) const {
    SolveConfig c;
    c.branch = b;
    c.eps = b == Branch::nodal ? nodal_eps : eps;
    c.omega = omega;
    c.tol_update = tol_update;
    c.tol_residual = tol_residual;
    c.max_iter = max_iter;
    c.clip_to_box = clip;
    c.nodal_box_scale = nodal_box_scale;
    c.nodal_seed_amplitude = nodal_seed_amplitude;
    c.odd_symmetry = nodal_odd_symmetry;
    return c;
  }

  /// Canonical serialization of every effective setting, used for hashing.
  std::string canonical_text() const;
  /// 64-bit FNV-1a of canonical_text(), as 16 hex digits.
  std::string hash() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, std::size_t line, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, line, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, line, "expected a number, got '" + v + "'");
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, std::size_t line, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key, line, "expected a nonnegative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key, line, "integer out of range: '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, std::size_t line, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, line, "expected true or false, got '" + v + "'");
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

inline std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  auto put = [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
  auto num = [](double v) { return format_double(v); };
  put("domain.kind", domain.kind == DomainKind::interval ? "interval" : "rectangle");
  put("domain.lx", num(domain.extents[0]));
  if (domain.kind == DomainKind::rectangle) put("domain.ly", num(domain.extents[1]));
  put("grid.n", std::to_string(n));
  put("exponents.alpha1", num(alpha1));
  put("exponents.alpha2", num(alpha2));
  put("exponents.beta1", num(beta1));
  put("exponents.beta2", num(beta2));
  put("barriers.delta", num(delta));
  put("solver.eps", num(eps));
  put("solver.omega", num(omega));
  put("solver.tol_update", num(tol_update));
  put("solver.tol_residual", num(tol_residual));
  put("solver.max_iter", std::to_string(max_iter));
  put("solver.clip", clip ? "true" : "false");
  std::string br;
  for (Branch b : branches) br += (br.empty() ? "" : ",") + std::string(to_string(b));
  put("solver.branches", br);
  put("nodal.eps", num(nodal_eps));
  put("nodal.box_scale", num(nodal_box_scale));
  put("nodal.seed_amplitude", num(nodal_seed_amplitude));
  put("nodal.odd_symmetry", nodal_odd_symmetry ? "true" : "false");
  put("continuation.k_min", std::to_string(continuation_k_min));
  put("continuation.k_max", std::to_string(continuation_k_max));
  put("continuation.early_stop", num(continuation_early_stop));
  put("eigen.tol", num(eigen_tol));
  put("verify.n_starts", std::to_string(verify_n_starts));
  put("verify.agreement_tol", num(verify_agreement_tol));
  put("verify.tol_sign_rel", num(verify_tol_sign_rel));
  put("verify.max_near_zero_fraction", num(verify_max_near_zero_fraction));
  put("verify.final_h1_tol", num(verify_final_h1_tol));
  put("verify.mirror_tol", num(verify_mirror_tol));
  put("verify.residual_tol", num(verify_residual_tol));
  put("run.seed", std::to_string(seed));
  return os.str();
}

inline std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(canonical_text())));
  return buf;
}

/// Parses configuration text. Required keys: exponents.alpha1/alpha2/beta1/beta2.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string kind = "interval";
  double length = 1.0, lx = 1.0, ly = 1.0;
  bool has_length = false, has_lx = false, has_ly = false;

  using Setter = std::function<void(const std::string&, std::size_t, const std::string&)>;
  auto dbl = [](double& dst) -> Setter {
    return [&dst](const std::string& k, std::size_t l, const std::string& v) { dst = detail::parse_double(k, l, v); };
  };
  auto size = [](std::size_t& dst) -> Setter {
    return [&dst](const std::string& k, std::size_t l, const std::string& v) {
      dst = static_cast<std::size_t>(detail::parse_uint(k, l, v));
    };
  };
  auto integer = [](int& dst) -> Setter {
    return [&dst](const std::string& k, std::size_t l, const std::string& v) {
      dst = static_cast<int>(detail::parse_uint(k, l, v));
    };
  };
  auto flag = [](bool& dst) -> Setter {
    return [&dst](const std::string& k, std::size_t l, const std::string& v) { dst = detail::parse_bool(k, l, v); };
  };

  const std::map<std::string, Setter> setters = {
      {"domain.kind",
       [&](const std::string& k, std::size_t l, const std::string& v) {
         if (v != "interval" && v != "rectangle") throw ConfigError(k, l, "expected interval or rectangle");
         kind = v;
       }},
      {"domain.length", [&](const std::string& k, std::size_t l, const std::string& v) {
         length = detail::parse_double(k, l, v);
         has_length = true;
       }},
      {"domain.lx", [&](const std::string& k, std::size_t l, const std::string& v) {
         lx = detail::parse_double(k, l, v);
         has_lx = true;
       }},
      {"domain.ly", [&](const std::string& k, std::size_t l, const std::string& v) {
         ly = detail::parse_double(k, l, v);
         has_ly = true;
       }},
      {"grid.n", size(cfg.n)},
      {"exponents.alpha1", dbl(cfg.alpha1)},
      {"exponents.alpha2", dbl(cfg.alpha2)},
      {"exponents.beta1", dbl(cfg.beta1)},
      {"exponents.beta2", dbl(cfg.beta2)},
      {"barriers.delta", dbl(cfg.delta)},
      {"solver.eps", dbl(cfg.eps)},
      {"solver.omega", dbl(cfg.omega)},
      {"solver.tol_update", dbl(cfg.tol_update)},
      {"solver.tol_residual", dbl(cfg.tol_residual)},
      {"solver.max_iter", size(cfg.max_iter)},
      {"solver.clip", flag(cfg.clip)},
      {"solver.branches",
       [&](const std::string& k, std::size_t l, const std::string& v) {
         cfg.branches.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           try {
             cfg.branches.push_back(parse_branch(detail::trim(item)));
           } catch (const InvalidArgument& ex) {
             throw ConfigError(k, l, ex.what());
           }
         }
         if (cfg.branches.empty()) throw ConfigError(k, l, "no branches listed");
       }},
      {"nodal.eps", dbl(cfg.nodal_eps)},
      {"nodal.box_scale", dbl(cfg.nodal_box_scale)},
      {"nodal.seed_amplitude", dbl(cfg.nodal_seed_amplitude)},
      {"nodal.odd_symmetry", flag(cfg.nodal_odd_symmetry)},
      {"continuation.k_min", integer(cfg.continuation_k_min)},
      {"continuation.k_max", integer(cfg.continuation_k_max)},
      {"continuation.early_stop", dbl(cfg.continuation_early_stop)},
      {"eigen.tol", dbl(cfg.eigen_tol)},
      {"verify.n_starts", size(cfg.verify_n_starts)},
      {"verify.agreement_tol", dbl(cfg.verify_agreement_tol)},
      {"verify.tol_sign_rel", dbl(cfg.verify_tol_sign_rel)},
      {"verify.max_near_zero_fraction", dbl(cfg.verify_max_near_zero_fraction)},
      {"verify.final_h1_tol", dbl(cfg.verify_final_h1_tol)},
      {"verify.mirror_tol", dbl(cfg.verify_mirror_tol)},
      {"verify.residual_tol", dbl(cfg.verify_residual_tol)},
      {"run.seed",
       [&](const std::string& k, std::size_t l, const std::string& v) { cfg.seed = detail::parse_uint(k, l, v); }},
  };

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, lineno, "expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, lineno, "unknown key");
    if (auto prev = seen.find(key); prev != seen.end())
      throw ConfigError(key, lineno, "duplicate key (first set on line " + std::to_string(prev->second) + ")");
    seen[key] = lineno;
    it->second(key, lineno, value);
  }

  for (const char* req : {"exponents.alpha1", "exponents.alpha2", "exponents.beta1", "exponents.beta2"}) {
    if (!seen.count(req)) throw ConfigError(req, 0, "required key missing");
  }
  if (kind == "interval") {
    if (has_ly) throw ConfigError("domain.ly", seen["domain.ly"], "not allowed for an interval");
    cfg.domain = Domain::interval(has_length ? length : (has_lx ? lx : 1.0));
  } else {
    if (has_length) throw ConfigError("domain.length", seen["domain.length"], "use domain.lx/domain.ly for a rectangle");
    cfg.domain = Domain::rectangle(lx, ly);
  }
  for (int a = 0; a < cfg.domain.dimension(); ++a) {
    if (!(cfg.domain.extents[a] > 0.0)) throw ConfigError("domain", 0, "extents must be positive");
  }
  if (cfg.n < 3) throw ConfigError("grid.n", seen.count("grid.n") ? seen["grid.n"] : 0, "need at least 3 nodes");
  try {
    (void)cfg.exponents();
  } catch (const InvalidArgument& ex) {
    throw ConfigError("exponents", seen["exponents.alpha1"], ex.what());
  }
  if (cfg.delta < 0.0) throw ConfigError("barriers.delta", seen["barriers.delta"], "must be nonnegative");
  if (!(cfg.omega > 0.0 && cfg.omega <= 1.0))
    throw ConfigError("solver.omega", seen.count("solver.omega") ? seen["solver.omega"] : 0, "must lie in (0,1]");
  if (cfg.continuation_k_min < 1 || cfg.continuation_k_max < cfg.continuation_k_min)
    throw ConfigError("continuation.k_max", 0, "need 1 <= k_min <= k_max");
  if (!(cfg.nodal_box_scale > 1.0))
    throw ConfigError("nodal.box_scale", seen.count("nodal.box_scale") ? seen["nodal.box_scale"] : 0, "must exceed 1");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("--config", 0, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace sgm
