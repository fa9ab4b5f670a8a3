#include "mildsolve/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "mildsolve/verify.hpp"

namespace mildsolve {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& x) {
  out << "t";
  for (int i = 1; i <= x.space().dim(); ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t n = 0; n < x.size(); ++n) {
    out << format_double(x.grid()[n]);
    for (Eigen::Index i = 0; i < x.values().rows(); ++i)
      out << ',' << format_double(x.values()(i, static_cast<Eigen::Index>(n)));
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& x) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_trajectory_csv(out, x);
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

json certificate_json(const WindowCertificate& c) {
  return {{"t_start", c.t_start},
          {"tau", c.tau},
          {"R", c.R},
          {"M_alpha", c.M_alpha},
          {"alpha", c.alpha},
          {"psi_2R2", c.psi_2R2},
          {"F0_norm", c.F0_norm},
          {"contraction_factor_bound", c.contraction_factor_bound},
          {"ball_bound", c.ball_bound}};
}

json window_json(const WindowRecord& w) {
  json j = certificate_json(w.certificate);
  j["iterations"] = w.iterations;
  j["final_update_norm"] = w.final_update_norm;
  j["defect"] = w.defect;
  j["max_iterate_norm"] = w.max_iterate_norm;
  j["max_contraction_ratio"] =
      w.contraction_ratios.empty() ? 0.0 : *std::max_element(w.contraction_ratios.begin(), w.contraction_ratios.end());
  j["junction_jump"] = w.junction_jump;
  j["end_norm"] = w.end_norm;
  if (w.uniqueness || w.perturbation || w.accuracy) {
    json c = json::object();
    if (w.uniqueness) c["uniqueness"] = {{"distance", w.uniqueness->distance}, {"passed", w.uniqueness->passed}};
    if (w.perturbation) {
      const auto& p = *w.perturbation;
      c["perturbation"] = {{"lhs", p.lhs},     {"defect_sup", p.defect_sup}, {"psi_at_sum", p.psi_at_sum},
                           {"bound", p.bound}, {"slack", p.slack},           {"margin", p.margin},
                           {"passed", p.passed}};
    }
    if (w.accuracy)
      c["accuracy"] = {{"error_bound", w.accuracy->error_bound},
                       {"slack", w.accuracy->slack},
                       {"passed", w.accuracy->passed}};
    j["certificates"] = c;
  }
  return j;
}

}  // namespace

json report_to_json(const SolveReport& r, const ProblemSpec* spec) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["problem_id"] = r.problem_id;
  j["horizon"] = r.horizon;
  j["t_end"] = r.t_end;
  j["stop_reason"] = to_string(r.stop_reason);
  const auto& c = r.classification;
  json outcome = {{"kind", to_string(c.outcome)},
                  {"norm_at_stop", c.norm_at_stop},
                  {"terminal_growth_flag", c.terminal_growth_flag},
                  {"rationale", c.rationale}};
  if (c.outcome == Outcome::BlowUp) {
    outcome["t_estimate"] = c.t_estimate;
    outcome["fitted_blowup"] = c.fitted_blowup;
  }
  j["outcome"] = outcome;

  json hyp = {{"M_alpha", r.M_alpha}, {"F0_norm", r.F0_norm}, {"semigroup_restart", r.semigroup_restart}};
  if (spec) {
    hyp["alpha"] = spec->alpha;
    hyp["rho"] = spec->rho;
    hyp["kernel"] = spec->kernel_json;
    hyp["kernel_description"] = spec->kernel.describe();
    hyp["nonlinearity"] = spec->nonlinearity_json;
    hyp["holder"] = {{"c_rho", spec->holder.c_rho}, {"coarse", spec->holder.coarse},
                     {"diverging", spec->holder.diverging}};
    hyp["psi_audit"] = {{"radius", spec->psi_audit_radius},
                        {"psi", spec->psi_audit.psi},
                        {"max_observed_ratio", spec->psi_audit.max_observed_ratio},
                        {"violated", spec->psi_audit.violated}};
  }
  j["hypotheses"] = hyp;

  json windows = json::array();
  for (const auto& w : r.windows) windows.push_back(window_json(w));
  j["windows"] = windows;

  json trace = json::array();
  for (const auto& s : r.criterion_trace) trace.push_back({s.s, s.value});
  j["criterion_trace"] = trace;

  j["global_defect"] = r.global_defect ? json(*r.global_defect) : json(nullptr);
  j["defect_within_budget"] = r.defect_within_budget;
  j["warnings"] = r.warnings;
  bool any_certs = false;
  for (const auto& w : r.windows) any_certs = any_certs || w.uniqueness.has_value();
  if (any_certs) j["certificates_passed"] = certificates_passed(r);
  return j;
}

json error_to_json(const Error& e, const SolveReport* partial) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = {{"kind", e.kind()}, {"message", e.what()}};
  if (partial) j["partial_report"] = report_to_json(*partial);
  return j;
}

namespace {

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_plot_csv(const std::filesystem::path& path, const SolveReport& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "s,criterion,norm\n";
  for (const auto& s : r.criterion_trace) {
    const double norm = s.value - 1.0 / (r.horizon - s.s);
    out << format_double(s.s) << ',' << format_double(s.value) << ',' << format_double(norm) << '\n';
  }
}

}  // namespace

RunResult run_problem(const ProblemSpec& spec, const std::filesystem::path& outdir, const RunOptions& opts) {
  RunResult result;
  std::filesystem::create_directories(outdir);
  const auto base = outdir / spec.id;
  try {
    SolverConfig cfg = spec.solver;
    cfg.retain_window_paths = opts.verify;
    auto report = std::make_shared<SolveReport>(
        solve_maximal(spec.kernel, spec.nonlinearity, spec.forcing, spec.quadrature, cfg, spec.id));
    if (opts.verify) certify_report(*report, spec.kernel, spec.nonlinearity, spec.quadrature, spec.solver);
    result.report_json = report_to_json(*report, &spec);
    result.report_json["verify_mode"] = opts.verify;
    result.report = report;

    if (report->global_trajectory) write_trajectory_csv(base.string() + ".trajectory.csv", *report->global_trajectory);
    write_json(base.string() + ".report.json", result.report_json);
    if (opts.plot) write_plot_csv(base.string() + ".plot.csv", *report);

    if (opts.verify && !certificates_passed(*report)) {
      result.exit_code = exit_certificate;
      result.message = "certificate check failed";
    } else if (report->classification.outcome == Outcome::Stalled) {
      result.exit_code = exit_stalled;
      result.message = "stalled: " + report->classification.rationale;
    } else {
      result.exit_code = exit_ok;
      result.message = to_string(report->classification.outcome);
    }
  } catch (const SolveFailure& e) {
    result.exit_code = exit_error;
    result.report = e.partial;
    result.report_json = error_to_json(e, e.partial.get());
    result.message = std::string(e.kind()) + ": " + e.what();
    write_json(base.string() + ".error.json", result.report_json);
  } catch (const Error& e) {
    result.exit_code = exit_error;
    result.report_json = error_to_json(e);
    result.message = std::string(e.kind()) + ": " + e.what();
    write_json(base.string() + ".error.json", result.report_json);
  }
  return result;
}

}  // namespace mildsolve
