#include "mildsolve/picard.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mildsolve {

namespace {

double window_factor(double tau, double alpha) { return std::pow(tau, 1.0 - alpha) / (1.0 - alpha); }

}  // namespace

WindowCertificate make_certificate(double t_start, double tau, double R, double alpha, double M_alpha,
                                   double psi_2R2, double F0_norm) {
  WindowCertificate c;
  c.t_start = t_start;
  c.tau = tau;
  c.R = R;
  c.alpha = alpha;
  c.M_alpha = M_alpha;
  c.psi_2R2 = psi_2R2;
  c.F0_norm = F0_norm;
  const double w = window_factor(tau, alpha);
  c.contraction_factor_bound = w * M_alpha * psi_2R2;
  c.ball_bound = w * M_alpha * (psi_2R2 * (R + 1.0) + F0_norm);
  return c;
}

double certified_window(double R, double alpha, double M_alpha, double psi_2R2, double F0_norm, double remaining,
                        double contraction_target) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("certified_window: alpha must lie in (0,1)");
  if (!(remaining > 0.0)) throw DomainError("certified_window: remaining must be positive");
  if (!(R >= 0.0) || !(psi_2R2 >= 0.0) || !(F0_norm >= 0.0) || !(M_alpha >= 0.0))
    throw DomainError("certified_window: inputs must be nonnegative");
  if (!(contraction_target > 0.0 && contraction_target < 1.0))
    throw DomainError("certified_window: contraction target must lie in (0,1)");
  if (!std::isfinite(M_alpha))
    throw UnsoundConfigurationError("certified_window: sup t^alpha ||S_t|| is infinite; no window can be certified");
  if (!std::isfinite(psi_2R2) || !std::isfinite(R) || !std::isfinite(F0_norm))
    throw UnsoundConfigurationError("certified_window: non-finite Lipschitz or forcing bound");

  const double expo = 1.0 / (1.0 - alpha);
  double tau = remaining;
  const double contraction_divisor = M_alpha * psi_2R2;
  if (contraction_divisor > 0.0)
    tau = std::min(tau, std::pow((1.0 - alpha) * contraction_target / contraction_divisor, expo));
  const double ball_divisor = M_alpha * (psi_2R2 * (R + 1.0) + F0_norm);
  if (ball_divisor > 0.0) tau = std::min(tau, std::pow((1.0 - alpha) / ball_divisor, expo));
  return tau;
}

Trajectory picard_map(const Trajectory& x, const Kernel& k, const Nonlinearity& f, const Trajectory& o_local,
                      const QuadratureSpec& q) {
  return picard_map(x, ConvolutionPlan(k, x.grid(), q), f, o_local);
}

Trajectory picard_map(const Trajectory& x, const ConvolutionPlan& plan, const Nonlinearity& f,
                      const Trajectory& o_local) {
  const Trajectory conv = plan.apply(compose(f, x));
  Matrix values = conv.values();
  if (o_local.grid() == x.grid()) values += o_local.values();
  else values += o_local.at(x.grid());
  return Trajectory(x.space(), x.grid(), std::move(values));
}

LocalSolveResult solve_local(const Kernel& k, const Nonlinearity& f, const Trajectory& o_local,
                             const WindowCertificate& cert, const QuadratureSpec& q, const PicardOptions& opts) {
  if (!(opts.tol > 0.0)) throw ContractError("solve_local: tol must be positive");
  if (opts.max_iter < 1) throw ContractError("solve_local: max_iter must be >= 1");
  if (std::abs(o_local.t0()) > 0.0) throw ContractError("solve_local: local forcing must start at t=0");

  const double scale = std::max(1.0, cert.R);
  const double tol = opts.tol * scale;
  const double ball = cert.R + 1.0 + opts.tol_ball * scale;
  const double noise_floor = 1e3 * std::numeric_limits<double>::epsilon() * (cert.R + 1.0);

  Trajectory x = opts.initial ? *opts.initial : o_local;
  if (x.grid() != o_local.grid()) throw ContractError("solve_local: initial iterate must share the forcing grid");

  const ConvolutionPlan plan(k, o_local.grid(), q);
  LocalSolveResult result{x, 0, 0.0, 0.0, 0.0, {}, cert};
  result.max_iterate_norm = x.sup_norm();
  double previous_update = -1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Trajectory next = picard_map(x, plan, f, o_local);
    // Same grid, piecewise linear: the node maximum is the exact sup distance.
    double update = 0.0;
    for (Eigen::Index i = 0; i < next.values().cols(); ++i)
      update = std::max(update, norm(x.space(), Vector(next.values().col(i) - x.values().col(i))));

    const double next_norm = next.sup_norm();
    result.max_iterate_norm = std::max(result.max_iterate_norm, next_norm);
    if (next_norm > ball) {
      std::ostringstream os;
      os << "solve_local: iterate " << it << " left the ball (sup norm " << next_norm << " > R+1 = " << cert.R + 1.0
         << ") on window starting at t=" << cert.t_start;
      throw BallViolationError(os.str());
    }
    if (previous_update > noise_floor) {
      const double ratio = update / previous_update;
      result.contraction_ratios.push_back(ratio);
      if (update > noise_floor && ratio > cert.contraction_factor_bound + opts.slack) {
        std::ostringstream os;
        os << "solve_local: measured contraction ratio " << ratio << " exceeds certified bound "
           << cert.contraction_factor_bound << " + slack " << opts.slack << " on window starting at t="
           << cert.t_start;
        throw NonContractionError(os.str());
      }
    }
    previous_update = update;
    x = std::move(next);
    result.iterations = it;
    result.final_update_norm = update;
    if (update <= tol) {
      result.trajectory = x;
      result.defect = defect(x, plan, f, o_local);
      return result;
    }
  }
  std::ostringstream os;
  os << "solve_local: no convergence after " << opts.max_iter << " iterations (last update "
     << result.final_update_norm << ", tol " << tol << ") on window starting at t=" << cert.t_start;
  throw NonContractionError(os.str());
}

}  // namespace mildsolve
