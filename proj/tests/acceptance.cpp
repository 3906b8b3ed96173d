// One PASS/FAIL line per acceptance criterion. Criteria 5-11 drive the
// command-line tool end to end on the canonical configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "sgm/sgm.hpp"

using namespace sgm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << detail << std::endl;
  if (!ok) ++failures;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double torsion_error(std::size_t n, double* seconds = nullptr) {
  auto g = build_grid(Domain::interval(1.0), n);
  const auto t0 = std::chrono::steady_clock::now();
  EllipticOperator op(g);
  Field u = op.solve(Field(g, 1.0));
  if (seconds) *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double err = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) {
    const double x = g->coord(k)[0];
    err = std::max(err, std::abs(u[k] - (1.0 - std::cosh(x - 0.5) / std::cosh(0.5))));
  }
  return err;
}

void criterion_1() {
  double secs = 0.0;
  const double e201 = torsion_error(201, &secs);
  const double e401 = torsion_error(401);
  const double ratio = e201 / e401;
  report(1, "resolvent oracle", e201 <= 1e-4 && std::abs(ratio - 4.0) <= 0.4 && secs < 1.0,
         "sup error " + sci(e201) + " at n=201, ratio to n=401 " + sci(ratio) + ", solve time " + sci(secs) + " s");
}

void criterion_2() {
  auto g = build_grid(Domain::interval(1.0), 401);
  EllipticOperator op(g);
  EigenPair p = principal_eigenpair(op);
  const double exact = 1.0 + std::numbers::pi * std::numbers::pi;
  bool positive = true;
  for (auto k : g->interior_ids()) positive = positive && p.phi[k] > 0.0;
  const double rq = std::abs(rayleigh_quotient(op, p.phi) - p.lambda);
  report(2, "eigenvalue oracle", std::abs(p.lambda - exact) <= 5e-3 && positive && rq <= 1e-10,
         "lambda1 " + format_double(p.lambda) + " vs " + format_double(exact) + ", phi1 positive " +
             (positive ? "yes" : "no") + ", |Rayleigh - lambda1| " + sci(rq));
}

void criterion_3() {
  auto g = build_grid(Domain::interval(1.0), 201);
  EllipticOperator op(g);
  const Field d = Field::distance(g);
  bool ok = true;
  std::string detail;
  for (const Exponents& e : {Exponents{-0.4, -0.3, 0.5, 0.4}, Exponents{0.3, 0.2, 0.5, 0.6}}) {
    validate_exponents(e.alpha1, e.alpha2, e.beta1, e.beta2);
    double worst = std::numeric_limits<double>::infinity();
    double c = 0.0;
    for (int i : {1, 2}) {
      Field y = solve_y(op, e, i);
      Field z = solve_z(op, e, default_delta(*g), i);
      const double ci = estimate_c(y, z, d);
      c = std::max(c, ci);
      for (auto k : g->interior_ids()) worst = std::min({worst, z[k] - d[k] / ci, y[k] - z[k], ci * d[k] - y[k]});
    }
    ok = ok && worst >= 0.0;
    detail += (detail.empty() ? "" : "; ") + std::string("alpha=(") + brief(e.alpha1) + "," + brief(e.alpha2) + ") c=" + sci(c) + " min slack " + sci(worst);
  }
  report(3, "barrier ordering", ok, detail);
}

void criterion_4(const RunConfig& cfg) {
  auto g = build_grid(cfg.domain, cfg.n);
  EllipticOperator op(g);
  const Exponents e = cfg.exponents();
  try {
    BarrierSet b = build_barriers(op, e, cfg.delta > 0 ? cfg.delta : default_delta(*g));
    CheckRecord r = check_calibration(b, e);
    report(4, "calibration", r.ok() && std::isfinite(b.C),
           "C=" + format_double(b.C) + ", worst relative slack " + sci(r.metrics[1].second) + " at C and " +
               sci(r.metrics[2].second) + " at 2C, " + std::to_string(b.certificate.nodes_checked) + " nodes");
  } catch (const BarrierError& ex) {
    report(4, "calibration", false, ex.what());
  }
}

const json* find_check(const json& rep, const std::string& name) {
  for (const auto& c : rep["checks"])
    if (c["name"] == name) return &c;
  return nullptr;
}

bool check_ok(const json& rep, const std::string& name) {
  const json* c = find_check(rep, name);
  return c && (*c)["pass"].get<bool>();
}

double metric(const json& rep, const std::string& name, const std::string& key) {
  const json* c = find_check(rep, name);
  if (!c || !(*c)["metrics"].contains(key)) return std::nan("");
  return (*c)["metrics"][key].get<double>();
}

int run_cli(const fs::path& out) {
  fs::remove_all(out);
  const std::string cmd = std::string("\"") + SGM_CLI_PATH + "\" --config \"" + SGM_CANONICAL_CONFIG + "\" --out \"" +
                          out.string() + "\" --command all > \"" + out.string() + ".log\" 2>&1";
  return std::system(cmd.c_str());
}

void criteria_5_to_11(const RunConfig& cfg) {
  const fs::path a = fs::absolute("acceptance_run_a"), b = fs::absolute("acceptance_run_b");
  const auto t0 = std::chrono::steady_clock::now();
  const int status_a = run_cli(a);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int status_b = run_cli(b);
  if (!fs::exists(a / "report.json")) {
    for (int id = 5; id <= 11; ++id) report(id, "end-to-end run", false, "no report written; see " + a.string() + ".log");
    return;
  }
  std::cout << "canonical 'all' run: exit status " << status_a << ", " << sci(secs) << " s" << std::endl;
  const json rep = read_json(a / "report.json");
  const json pos = read_json(a / "summary" / "solve_positive.json");
  const json cont = read_json(a / "summary" / "continuation.json");

  const double res = metric(rep, "residual_positive", "resolvent");
  report(5, "positive solution",
         check_ok(rep, "residual_positive") && check_ok(rep, "bounds_positive") && res <= 1e-8 &&
             pos["status"] == "converged",
         "residual " + sci(res) + ", strict box slack " + sci((*find_check(rep, "bounds_positive"))["slack"].get<double>()) +
             " with C=" + format_double(pos["C"].get<double>()));

  const double mu = metric(rep, "mirror", "sup|u- + u+|"), mv = metric(rep, "mirror", "sup|v- + v+|");
  report(6, "mirror", check_ok(rep, "mirror") && mu <= 1e-7 && mv <= 1e-7,
         "sup|u- + u+| " + sci(mu) + ", sup|v- + v+| " + sci(mv));

  report(7, "uniqueness", check_ok(rep, "uniqueness_positive") && check_ok(rep, "uniqueness_negative"),
         "starts " + sci(metric(rep, "uniqueness_positive", "starts")) + ", max pairwise sup " +
             sci(metric(rep, "uniqueness_positive", "max_pairwise_sup")) + " (positive), " +
             sci(metric(rep, "uniqueness_negative", "max_pairwise_sup")) + " (negative)");

  bool stages_ok = true;
  std::size_t through_14 = 0;
  for (const auto& s : cont["stages"]) {
    stages_ok = stages_ok && s["status"] == "converged";
    if (s["eps"].get<double>() >= std::ldexp(1.0, -14)) ++through_14;
  }
  const double scale = metric(rep, "bounds_nodal", "C");
  const double admissible = metric(rep, "bounds_nodal", "largest_admissible_scale");
  const double frac = metric(rep, "near_zero_set", "near_zero_fraction");
  const bool nodal_ok = stages_ok && through_14 == 14 && check_ok(rep, "continuation_stages") &&
                        check_ok(rep, "bounds_nodal") && check_ok(rep, "synchronous_sign") &&
                        check_ok(rep, "near_zero_set") && frac <= 0.02;
  report(8, "nodal solution", nodal_ok,
         std::to_string(cont["stages"].size()) + " stages converged (" + std::to_string(through_14) +
             " down to 2^-14), box [-z_i/" + brief(scale) + ", z_i/" + brief(scale) +
             "] holds (largest admissible divisor " + brief(admissible) + "; the certified C=" +
             brief(pos["C"].get<double>()) + (admissible >= pos["C"].get<double>() ? " fits" : " does not fit") +
             "), synchronous fraction " +
             sci(metric(rep, "synchronous_sign", "synchronous_fraction")) + ", near-zero fraction " + sci(frac));

  std::string at_14 = "n/a";
  if (cont["h1_diffs"].size() > 12) {
    const auto& d = cont["h1_diffs"][12];
    at_14 = sci(std::max(d[0].get<double>(), d[1].get<double>()));
  }
  report(9, "eps-convergence", check_ok(rep, "eps_convergence"),
         "difference at eps=2^-14 " + at_14 + ", final H1 difference " + sci(metric(rep, "eps_convergence", "final_h1_diff")) + " at eps=2^-" +
             std::to_string(cfg.continuation_k_max) + ", worst tail ratio " +
             sci(metric(rep, "eps_convergence", "worst_tail_ratio")));

  report(10, "distinctness", check_ok(rep, "distinctness"),
         "min pairwise " +
             sci(std::min({metric(rep, "distinctness", "pos_neg"), metric(rep, "distinctness", "pos_nodal"),
                           metric(rep, "distinctness", "neg_nodal"), metric(rep, "distinctness", "minus_pos_nodal")})) +
             " vs threshold " + sci(metric(rep, "distinctness", "threshold")));

  const bool same_report = fs::exists(b / "report.json") && slurp(a / "report.json") == slurp(b / "report.json");
  bool same_all = same_report;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path other = b / fs::relative(entry.path(), a);
    same_all = same_all && fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  report(11, "determinism", same_report && status_a == 0 && status_b == 0,
         std::string("report.json ") + (same_report ? "byte-identical" : "differs") + ", all artifacts " +
             (same_all ? "byte-identical" : "differ") + ", exit statuses " + std::to_string(status_a) + "/" +
             std::to_string(status_b));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load_config(SGM_CANONICAL_CONFIG);
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4(cfg);
    criteria_5_to_11(cfg);
  } catch (const std::exception& ex) {
    std::cout << "FAIL acceptance aborted: " << ex.what() << std::endl;
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "total acceptance time " << sci(secs) << " s; " << failures << " criterion failure(s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
