#ifndef MILDSOLVE_PICARD_HPP
#define MILDSOLVE_PICARD_HPP

#include <optional>
#include <vector>

#include "mildsolve/kernels.hpp"
#include "mildsolve/nonlinear.hpp"
#include "mildsolve/state_space.hpp"
#include "mildsolve/volterra.hpp"

namespace mildsolve {

// Constants of one local existence window. The window [t_start, t_start+tau]
// is certified when
//   (tau^{1−α}/(1−α)) M_α Ψ(2R+2)                  ≤ contraction target (½)
//   (tau^{1−α}/(1−α)) M_α (Ψ(2R+2)(R+1) + ‖F(0)‖) ≤ 1
// so Φ maps the ball {sup‖x‖ ≤ R+1} into itself and contracts.
struct WindowCertificate {
  double t_start = 0.0;
  double tau = 0.0;
  double R = 0.0;
  double M_alpha = 0.0;
  double alpha = 0.5;
  double psi_2R2 = 0.0;
  double F0_norm = 0.0;
  double contraction_factor_bound = 0.0;
  double ball_bound = 0.0;  // left-hand side of the ball-invariance condition
};

WindowCertificate make_certificate(double t_start, double tau, double R, double alpha, double M_alpha,
                                   double psi_2R2, double F0_norm);

// tau = min(remaining, τ_A, τ_B), τ_B = [(1−α)·target/(M Ψ)]^{1/(1−α)},
// τ_A = [(1−α)/(M(Ψ(R+1)+‖F(0)‖))]^{1/(1−α)}; a zero divisor deactivates
// its bound.
double certified_window(double R, double alpha, double M_alpha, double psi_2R2, double F0_norm, double remaining,
                        double contraction_target = 0.5);

// (Φ x)(t) = ∫_0^t S_{t−s} F(x_s) ds + o_t on x's grid.
Trajectory picard_map(const Trajectory& x, const Kernel& k, const Nonlinearity& f, const Trajectory& o_local,
                      const QuadratureSpec& q);
Trajectory picard_map(const Trajectory& x, const ConvolutionPlan& plan, const Nonlinearity& f,
                      const Trajectory& o_local);

struct PicardOptions {
  int grid_n = 64;        // uniform nodes per window
  double tol = 1e-10;     // on sup‖x_{n+1} − x_n‖, scaled by max(1, R)
  int max_iter = 200;
  double tol_ball = 1e-8;  // scaled by max(1, R)
  double slack = 0.1;      // allowed excess of measured ratios over the bound
  std::optional<Trajectory> initial;  // defaults to o_local
};

struct LocalSolveResult {
  Trajectory trajectory;
  int iterations = 0;
  double final_update_norm = 0.0;
  double defect = 0.0;
  double max_iterate_norm = 0.0;
  std::vector<double> contraction_ratios;  // only ratios above the roundoff floor
  WindowCertificate certificate;
};

// Picard iteration for x = Φ(x) on the grid of o_local (which must lie on
// [0, cert.tau]).
LocalSolveResult solve_local(const Kernel& k, const Nonlinearity& f, const Trajectory& o_local,
                             const WindowCertificate& cert, const QuadratureSpec& q, const PicardOptions& opts);

}  // namespace mildsolve

#endif  // MILDSOLVE_PICARD_HPP
