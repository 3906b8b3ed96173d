#pragma once

// Batch driver behind the command-line tool. Layout under the output directory:
//   fields/*.csv, summary/*.json, report.json

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgm/barriers.hpp"
#include "sgm/config.hpp"
#include "sgm/error.hpp"
#include "sgm/grid.hpp"
#include "sgm/io.hpp"
#include "sgm/nonlinearity.hpp"
#include "sgm/operator.hpp"
#include "sgm/solver.hpp"
#include "sgm/verify.hpp"

namespace sgm {

class Pipeline {
public:
  Pipeline(RunConfig cfg, std::filesystem::path out)
      : cfg_(std::move(cfg)),
        out_(std::move(out)),
        hash_(cfg_.hash()),
        grid_(build_grid(cfg_.domain, cfg_.n)),
        op_(grid_),
        exponents_(cfg_.exponents()) {}

  const RunConfig& config() const noexcept { return cfg_; }
  const std::string& config_hash() const noexcept { return hash_; }
  const EllipticOperator& op() const noexcept { return op_; }
  const Exponents& exponents() const noexcept { return exponents_; }
  const std::filesystem::path& out_dir() const noexcept { return out_; }

  double delta() const { return cfg_.delta > 0.0 ? cfg_.delta : default_delta(*grid_); }

  const BarrierSet& barrier_set() {
    if (!barriers_) barriers_ = build_barriers(op_, exponents_, delta());
    return *barriers_;
  }

  void run_barriers(std::ostream& log) {
    const BarrierSet& b = barrier_set();
    write_field(field_path("y1"), b.y1, hash_);
    write_field(field_path("y2"), b.y2, hash_);
    write_field(field_path("z1"), b.z1, hash_);
    write_field(field_path("z2"), b.z2, hash_);
    write_json(summary_path("barriers"), barrier_summary(b, hash_));
    log << "barriers: c=" << format_double(b.c) << " C=" << format_double(b.C) << " delta=" << format_double(b.delta)
        << '\n';
  }

  EigenPair run_eigen(std::ostream& log) {
    EigenPair p = principal_eigenpair(op_, cfg_.eigen_tol);
    const double rq = rayleigh_quotient(op_, p.phi);
    write_field(field_path("phi1"), p.phi, hash_);
    write_json(summary_path("eigen"), eigen_summary(p, rq, hash_));
    log << "eigen: lambda1=" << format_double(p.lambda) << " iterations=" << p.iterations << '\n';
    return p;
  }

  SolveResult run_solve(Branch branch, std::ostream& log) {
    const BarrierSet& b = barrier_set();
    SolveResult r = solve_branch(cfg_.solve_config(branch), op_, b, exponents_);
    write_result(to_string(branch), r, log);
    return r;
  }

  ContinuationTrace run_continuation(std::ostream& log) {
    const BarrierSet& b = barrier_set();
    ContinuationOptions opts;
    opts.early_stop = cfg_.continuation_early_stop;
    const auto schedule = geometric_schedule(cfg_.continuation_k_min, cfg_.continuation_k_max);
    ContinuationTrace t = continuation(schedule, cfg_.solve_config(Branch::nodal), op_, b, exponents_, opts);
    write_json(summary_path("continuation"), continuation_summary(t, hash_));
    if (!t.results.empty()) {
      write_field(field_path("nodal_final_u"), t.final_result().u, hash_);
      write_field(field_path("nodal_final_v"), t.final_result().v, hash_);
    }
    log << "continuation: " << t.results.size() << " stages, " << (t.completed ? "completed" : "FAILED: " + t.failure)
        << '\n';
    return t;
  }

  /// Loads the branch results and continuation written by earlier stages and
  /// runs every check. Uniqueness is recomputed by fresh multi-start solves.
  VerificationReport run_verify(std::ostream& log) {
    const BarrierSet& b = barrier_set();
    const SolveResult pos = load_result("positive");
    const SolveResult neg = load_result("negative");
    const ContinuationTrace trace = load_continuation();
    const SolveResult& nodal = trace.final_result();

    VerificationReport rep;
    const double res_tol = cfg_.verify_residual_tol;
    rep.checks.push_back(check_ordering(b));
    rep.checks.push_back(check_calibration(b, exponents_));
    rep.checks.push_back(check_residual(pos, op_, exponents_, res_tol));
    rep.checks.push_back(check_bounds(pos.u, pos.v, Branch::positive, b, cfg_.nodal_box_scale));
    rep.checks.push_back(check_box_preservation(pos, op_, b, exponents_, cfg_.nodal_box_scale));
    rep.checks.push_back(check_residual(neg, op_, exponents_, res_tol));
    rep.checks.push_back(check_bounds(neg.u, neg.v, Branch::negative, b, cfg_.nodal_box_scale));
    rep.checks.push_back(check_mirror(pos, neg, cfg_.verify_mirror_tol));

    UniquenessOptions uo;
    uo.n_starts = cfg_.verify_n_starts;
    uo.seed = cfg_.seed;
    uo.agreement_tol = cfg_.verify_agreement_tol;
    const SolveConfig base = cfg_.solve_config(Branch::positive);
    rep.checks.push_back(check_uniqueness(Branch::positive, base, op_, b, exponents_, uo));
    rep.checks.push_back(check_uniqueness(Branch::negative, base, op_, b, exponents_, uo));

    rep.checks.push_back(check_continuation_stages(trace));
    rep.checks.push_back(check_residual(nodal, op_, exponents_, res_tol));
    CheckRecord nb = check_bounds(nodal.u, nodal.v, Branch::nodal, b, cfg_.nodal_box_scale);
    nb.metrics.push_back({"largest_admissible_scale", largest_nodal_scale(nodal.u, nodal.v, b)});
    rep.checks.push_back(nb);
    const double tol_sign = cfg_.verify_tol_sign_rel *
                            std::max(norm(nodal.u, NormKind::sup), norm(nodal.v, NormKind::sup));
    if (exponents_.alpha_nonpositive()) {
      rep.checks.push_back(check_synchronous_sign(nodal.u, nodal.v, tol_sign));
    } else {
      CheckRecord skip;
      skip.name = "synchronous_sign";
      skip.claim = "u v > 0 away from an explicit near-zero set; both components change sign";
      skip.status = CheckStatus::skipped;
      skip.detail = "hypothesis not met: some alpha_i > 0";
      rep.checks.push_back(skip);
    }
    rep.checks.push_back(check_near_zero_set(nodal.u, nodal.v, tol_sign, cfg_.verify_max_near_zero_fraction));
    rep.checks.push_back(check_convergence(trace, cfg_.verify_final_h1_tol));
    rep.checks.push_back(check_distinctness(pos, neg, nodal));

    write_json(out_ / "report.json", to_json(rep, hash_));
    print_report(log, rep);
    return rep;
  }

  /// Runs one command; returns the process exit status.
  int run(const std::string& command, std::ostream& log) {
    if (command == "barriers") {
      run_barriers(log);
      return 0;
    }
    if (command == "eigen") {
      run_eigen(log);
      return 0;
    }
    if (command == "solve") {
      bool ok = true;
      for (Branch br : cfg_.branches) ok = run_solve(br, log).converged() && ok;
      return ok ? 0 : 1;
    }
    if (command == "continuation") return run_continuation(log).completed ? 0 : 1;
    if (command == "verify") return run_verify(log).overall_pass() ? 0 : 1;
    if (command == "all") {
      run_barriers(log);
      run_eigen(log);
      for (Branch br : {Branch::positive, Branch::negative, Branch::nodal}) run_solve(br, log);
      run_continuation(log);
      return run_verify(log).overall_pass() ? 0 : 1;
    }
    throw InvalidArgument("unknown command '" + command + "'");
  }

private:
  std::filesystem::path field_path(const std::string& name) const { return out_ / "fields" / (name + ".csv"); }
  std::filesystem::path summary_path(const std::string& name) const { return out_ / "summary" / (name + ".json"); }

  void write_result(const std::string& name, const SolveResult& r, std::ostream& log) {
    const BarrierSet& b = barrier_set();
    const CheckRecord box = check_bounds(r.u, r.v, r.branch, b, cfg_.nodal_box_scale);
    write_field(field_path(name + "_u"), r.u, hash_);
    write_field(field_path(name + "_v"), r.v, hash_);
    write_json(summary_path("solve_" + name), solve_summary(r, b, box, hash_));
    log << "solve " << name << ": " << to_string(r.status) << " after " << r.iterations
        << " iterations, residual=" << format_double(r.residual_sup) << ", " << to_string(r.sign.kind) << '\n';
  }

  SolveResult load_result(const std::string& name) {
    const json j = read_json(summary_path("solve_" + name));
    check_hash(j, "solve_" + name);
    SolveResult r;
    r.branch = parse_branch(j.at("branch").get<std::string>());
    r.eps = j.at("eps").get<double>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.residual_sup = j.at("residual_sup").get<double>();
    r.status = parse_status(j.at("status").get<std::string>());
    r.u = read_field(field_path(name + "_u"), grid_);
    r.v = read_field(field_path(name + "_v"), grid_);
    r.sign = classify(r.u, r.v, default_tol_sign(r.u, r.v));
    return r;
  }

  ContinuationTrace load_continuation() {
    const json j = read_json(summary_path("continuation"));
    check_hash(j, "continuation");
    ContinuationTrace t;
    t.completed = j.at("completed").get<bool>();
    t.stopped_early = j.at("stopped_early").get<bool>();
    t.failure = j.at("failure").get<std::string>();
    for (const auto& s : j.at("stages")) {
      SolveResult r;
      r.branch = Branch::nodal;
      r.eps = s.at("eps").get<double>();
      r.iterations = s.at("iterations").get<std::size_t>();
      r.residual_sup = s.at("residual_sup").get<double>();
      r.status = parse_status(s.at("status").get<std::string>());
      t.eps_schedule.push_back(r.eps);
      t.results.push_back(std::move(r));
    }
    for (const auto& d : j.at("h1_diffs")) t.h1_diffs.emplace_back(d.at(0).get<double>(), d.at(1).get<double>());
    if (t.results.empty()) throw Error("continuation summary has no stages");
    SolveResult& last = t.results.back();
    last.u = read_field(field_path("nodal_final_u"), grid_);
    last.v = read_field(field_path("nodal_final_v"), grid_);
    last.sign = classify(last.u, last.v, default_tol_sign(last.u, last.v));
    return t;
  }

  void check_hash(const json& j, const std::string& what) const {
    if (j.value("config_hash", std::string{}) != hash_)
      throw Error("artifact '" + what + "' was produced by a different configuration");
  }

  RunConfig cfg_;
  std::filesystem::path out_;
  std::string hash_;
  GridPtr grid_;
  EllipticOperator op_;
  Exponents exponents_;
  std::optional<BarrierSet> barriers_;
};

}  // namespace sgm
