#ifndef MILDSOLVE_VOLTERRA_HPP
#define MILDSOLVE_VOLTERRA_HPP

#include <string>
#include <utility>
#include <vector>

#include "mildsolve/kernels.hpp"
#include "mildsolve/nonlinear.hpp"
#include "mildsolve/state_space.hpp"

namespace mildsolve {

enum class QuadratureScheme { product_rectangle, product_trapezoid };
enum class SingularPanelRule { analytic_weight, gauss_jacobi };

std::string to_string(QuadratureScheme s);
std::string to_string(SingularPanelRule r);

struct QuadratureSpec {
  QuadratureScheme scheme = QuadratureScheme::product_trapezoid;
  int panels_per_step = 4;
  SingularPanelRule singular_panel = SingularPanelRule::analytic_weight;
  int gauss_jacobi_nodes = 8;

  void validate() const;
};

// Nodes and weights of ∫_0^1 x^b f(x) dx ≈ Σ w_i f(x_i), b > -1, exact for
// polynomials of degree 2n-1 (Golub–Welsch on the Jacobi recurrence).
std::pair<Vector, Vector> gauss_jacobi_unit(int n, double b);

// ∫_{y.t0}^{y.t1} S_{t−s} y_s ds with y piecewise linear and S sampled exactly
// (product integration). t ≥ y.t1.
Vector convolve_at(const Kernel& k, const Trajectory& y, double t, const QuadratureSpec& q);

// ∫_0^t S_{t−s} y_s ds with t = y.t1.
Vector convolve(const Kernel& k, const Trajectory& y, const QuadratureSpec& q);

// Node i holds ∫_{t0}^{t_i} S_{t_i−s} y_s ds; node 0 is zero.
Trajectory convolution_path(const Kernel& k, const Trajectory& y, const QuadratureSpec& q);
// Same, after resampling y onto `grid` (which must span y's interval).
Trajectory convolution_path(const Kernel& k, const Trajectory& y, const std::vector<double>& grid,
                            const QuadratureSpec& q);

// Quadrature operators for repeated convolution_path calls on one grid. On a
// uniform grid each panel's contribution depends only on its lag, so it is
// collapsed once into a pair of operators acting on the panel endpoints.
class ConvolutionPlan {
public:
  ConvolutionPlan(const Kernel& k, std::vector<double> grid, const QuadratureSpec& q);
  // Same result as convolution_path(k, y, q); y must live on grid().
  Trajectory apply(const Trajectory& y) const;
  const std::vector<double>& grid() const { return grid_; }

private:
  const Kernel* k_;
  std::vector<double> grid_;
  QuadratureSpec q_;
  std::vector<std::pair<LinearOp, LinearOp>> collapsed_;  // empty unless uniform
  // Uniform grid with scalar/diagonal lag operators: out.row(k) = y.row(k) · W_kᵀ.
  std::vector<Matrix> toeplitz_;
};

// F ∘ x as a W-valued trajectory on x's grid.
Trajectory compose(const Nonlinearity& f, const Trajectory& x);

// max_i ‖x_{t_i} − ∫_0^{t_i} S_{t_i−s} F(x_s) ds − o_{t_i}‖_V
double defect(const Trajectory& x, const Kernel& k, const Nonlinearity& f, const Trajectory& o,
              const QuadratureSpec& q);
double defect(const Trajectory& x, const ConvolutionPlan& plan, const Nonlinearity& f, const Trajectory& o);
// Same maximum restricted to at most `points` nodes spread evenly over the grid
// (always including the last); each is checked against the full history.
double sampled_defect(const Trajectory& x, const Kernel& k, const Nonlinearity& f, const Trajectory& o,
                      const QuadratureSpec& q, std::size_t points);

// Richardson estimate of the quadrature error of convolution_path(k, y) at the
// nodes shared with the every-other-node grid (assumes O(h²) behavior).
double estimate_quadrature_error(const Kernel& k, const Trajectory& y, const QuadratureSpec& q);

}  // namespace mildsolve

#endif  // MILDSOLVE_VOLTERRA_HPP
