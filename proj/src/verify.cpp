#include "mildsolve/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mildsolve/specialfn.hpp"

namespace mildsolve {

UniquenessCheck check_uniqueness(const Kernel& k, const Nonlinearity& f, const Trajectory& o_local,
                                 const WindowCertificate& cert, const QuadratureSpec& q, const PicardOptions& opts) {
  PicardOptions from_forcing = opts;
  from_forcing.initial.reset();
  PicardOptions from_zero = opts;
  from_zero.initial = Trajectory::constant(o_local.space(), o_local.grid(), Vector::Zero(o_local.space().dim()));

  const LocalSolveResult a = solve_local(k, f, o_local, cert, q, from_forcing);
  const LocalSolveResult b = solve_local(k, f, o_local, cert, q, from_zero);
  UniquenessCheck c;
  c.distance = sup_distance(a.trajectory, b.trajectory, a.trajectory.size());
  c.passed = c.distance <= 10.0 * opts.tol * std::max(1.0, cert.R);
  return c;
}

PerturbationCertificate check_perturbation(const Trajectory& x1, const Trajectory& x2, const Kernel& k,
                                           const Nonlinearity& f, double alpha, double M_alpha,
                                           const QuadratureSpec& q, double slack) {
  if (x1.grid() != x2.grid()) throw ContractError("check_perturbation: trajectories must share a grid");
  if (std::abs(x1.t0()) > 0.0) throw ContractError("check_perturbation: trajectories must start at 0");
  const Trajectory c1 = convolution_path(k, compose(f, x1), q);
  const Trajectory c2 = convolution_path(k, compose(f, x2), q);

  PerturbationCertificate cert;
  double sum_sup = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const Vector r = x1.node(i) - c1.node(i) + c2.node(i) - x2.node(i);
    cert.defect_sup = std::max(cert.defect_sup, norm(x1.space(), r));
    sum_sup = std::max(sum_sup, norm(x1.space(), x1.node(i)) + norm(x2.space(), x2.node(i)));
  }
  cert.lhs = sup_distance(x1, x2, x1.size());
  cert.psi_at_sum = lipschitz_modulus(f, sum_sup);
  const double horizon = x1.t1() - x1.t0();
  cert.bound = horizon > 0.0 ? perturbation_bound(alpha, horizon, M_alpha, cert.psi_at_sum, cert.defect_sup)
                             : cert.defect_sup;
  cert.slack = slack;
  cert.margin = cert.bound + slack - cert.lhs;
  cert.passed = cert.margin >= 0.0;
  return cert;
}

ContinuityCheck refinement_continuity_check(const Kernel& k, const Trajectory& y, int levels,
                                            const QuadratureSpec& q, int base_panels, double continuity_tol) {
  if (levels < 2) throw ContractError("refinement_continuity_check: levels must be >= 2");
  if (base_panels < 1) throw ContractError("refinement_continuity_check: base_panels must be >= 1");
  ContinuityCheck out;
  for (int j = 0; j < levels; ++j) {
    const std::size_t panels = static_cast<std::size_t>(base_panels) << j;
    const Trajectory path = convolution_path(k, y, uniform_grid(y.t0(), y.t1(), panels + 1), q);
    double modulus = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      modulus = std::max(modulus, norm(path.space(), Vector(path.node(i + 1) - path.node(i))));
    out.moduli.push_back(modulus);
  }
  out.passed = out.moduli.back() <= continuity_tol;
  for (std::size_t j = 0; j + 1 < out.moduli.size(); ++j) {
    if (out.moduli[j + 1] > 1.5 * out.moduli[j]) out.passed = false;
    out.exponents.push_back(out.moduli[j + 1] > 0.0 ? std::log2(out.moduli[j] / out.moduli[j + 1]) : 0.0);
  }
  return out;
}

void certify_report(SolveReport& report, const Kernel& k, const Nonlinearity& f, const QuadratureSpec& q,
                    const SolverConfig& cfg) {
  const PicardOptions opts = cfg.picard();
  for (auto& w : report.windows) {
    if (!w.local_forcing || !w.local_solution)
      throw ContractError("certify_report: window paths were not retained (solver.retain_window_paths)");
    const double scale = std::max(1.0, w.certificate.R);
    try {
      w.uniqueness = check_uniqueness(k, f, *w.local_forcing, w.certificate, q, opts);
    } catch (const Error&) {
      w.uniqueness = UniquenessCheck{std::numeric_limits<double>::infinity(), false};
    }

    const double quad_err = estimate_quadrature_error(k, compose(f, *w.local_solution), q);
    const double slack = std::max(cfg.slack * scale, 2.0 * quad_err);
    try {
      PicardOptions tight = opts;
      tight.tol = std::max(opts.tol * 1e-3, 1e-13);
      tight.max_iter = std::max(opts.max_iter, 400);
      const LocalSolveResult reference = solve_local(k, f, *w.local_forcing, w.certificate, q, tight);
      PerturbationCertificate p = check_perturbation(*w.local_solution, reference.trajectory, k, f,
                                                     w.certificate.alpha, w.certificate.M_alpha, q, slack);
      w.accuracy = AccuracyCertificate{p.bound, slack, p.bound <= slack};
      w.perturbation = p;
    } catch (const Error&) {
      PerturbationCertificate failed;
      failed.slack = slack;
      failed.margin = -std::numeric_limits<double>::infinity();
      w.perturbation = failed;
      w.accuracy = AccuracyCertificate{std::numeric_limits<double>::infinity(), slack, false};
    }
  }
}

bool certificates_passed(const SolveReport& report) {
  for (const auto& w : report.windows) {
    if (w.uniqueness && !w.uniqueness->passed) return false;
    if (w.perturbation && !w.perturbation->passed) return false;
    if (w.accuracy && !w.accuracy->passed) return false;
  }
  return true;
}

}  // namespace mildsolve
