#include "mildsolve/volterra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>

#include "mildsolve/specialfn.hpp"

namespace mildsolve {

namespace {

// 5-point Gauss–Legendre on [0,1].
constexpr double kGLx[5] = {0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155,
                            0.95308992296933200};
constexpr double kGLw[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324,
                            0.11846344252809454};

// Weights (w_far, w_near) with
//   ∫_{u0}^{u1} u^{-β} [g_far (u−u0)/h + g_near (u1−u)/h] du = w_far g_far + w_near g_near,
// h = u1 − u0. "far" is the end at lag u1 (older history).
std::pair<double, double> linear_product_weights(double beta, double u0, double u1) {
  const double h = u1 - u0;
  if (u0 > 50.0 * h) {
    // Integrand is smooth here; the closed form would cancel.
    double far = 0.0, near = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double v = kGLx[i] * h;
      const double wt = kGLw[i] * h * std::pow(u0 + v, -beta);
      far += wt * (v / h);
      near += wt * (1.0 - v / h);
    }
    return {far, near};
  }
  const double i0 = (std::pow(u1, 1.0 - beta) - std::pow(u0, 1.0 - beta)) / (1.0 - beta);
  const double i1 = (std::pow(u1, 2.0 - beta) - std::pow(u0, 2.0 - beta)) / (2.0 - beta);
  return {(i1 - u0 * i0) / h, (u1 * i0 - i1) / h};
}

// ∫_{u0}^{u1} u^{-β} du
double power_integral(double beta, double u0, double u1) {
  const double h = u1 - u0;
  if (u0 > 50.0 * h) {
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += kGLw[i] * h * std::pow(u0 + kGLx[i] * h, -beta);
    return acc;
  }
  return (std::pow(u1, 1.0 - beta) - std::pow(u0, 1.0 - beta)) / (1.0 - beta);
}

// Supplies B(lag). When the evaluation times and the history grid are all on
// one uniform lattice, lags are integer multiples of δ = h/(2m) and B is
// tabulated once; otherwise it is evaluated on demand.
class LagOperators {
public:
  explicit LagOperators(const Kernel& k) : k_(k) {}

  void tabulate(double delta, long max_index) {
    delta_ = delta;
    table_.clear();
    table_.reserve(static_cast<std::size_t>(max_index + 1));
    for (long i = 0; i <= max_index; ++i) table_.push_back(k_.regular_part(std::min(double(i) * delta, k_.horizon())));
  }

  const LinearOp& regular(double lag, long index) {
    if (index >= 0 && index < static_cast<long>(table_.size())) return table_[static_cast<std::size_t>(index)];
    scratch_ = k_.regular_part(std::max(0.0, lag));
    return scratch_;
  }

private:
  const Kernel& k_;
  double delta_ = 0.0;
  std::vector<LinearOp> table_;
  LinearOp scratch_ = LinearOp::scalar(0.0, 0);
};

struct PanelIntegrator {
  const Kernel& k;
  const QuadratureSpec& q;
  LagOperators& ops;
  std::optional<std::pair<Vector, Vector>> gauss_jacobi;

  // Visits the quadrature nodes of ∫_a^b S_{t−s} y(s) ds for y linear on
  // [a,b]: emit(op, w, θ) stands for w · op · y(a + θ(b−a)). `index_b` is the
  // lattice index of the lag t−b (or −1).
  template <typename Emit>
  void visit(double t, double a, double b, long index_b, Emit&& emit) {
    const int m = q.panels_per_step;
    const double h = (b - a) / m;
    const double beta = k.singular_exponent();
    const bool singular = beta > 0.0;
    const bool final_panel = (t - b) <= 1e-14 * std::max(1.0, t);
    auto index_at = [&](int half_steps_from_b) { return index_b < 0 ? -1L : index_b + half_steps_from_b; };

    if (singular && final_panel && q.singular_panel == SingularPanelRule::gauss_jacobi) {
      if (!gauss_jacobi) gauss_jacobi = gauss_jacobi_unit(q.gauss_jacobi_nodes, -beta);
      const auto& [x, w] = *gauss_jacobi;
      const double span = b - a;
      const double scale = std::pow(span, 1.0 - beta);
      for (Eigen::Index i = 0; i < x.size(); ++i) emit(ops.regular(span * x[i], -1), scale * w[i], 1.0 - x[i]);
      return;
    }

    // Away from the final panel the weights are exact under either rule.
    const bool analytic = singular;
    for (int j = 0; j < m; ++j) {
      // Subinterval [s_j, s_{j+1}], lags [u0, u1] = [t − s_{j+1}, t − s_j].
      const double u1 = (t - b) + double(m - j) * h;
      const double u0 = (t - b) + double(m - j - 1) * h;
      const double th_far = double(j) / m, th_near = double(j + 1) / m;
      const long i_far = index_at(2 * (m - j)), i_near = index_at(2 * (m - j - 1)), i_mid = index_at(2 * (m - j) - 1);

      if (q.scheme == QuadratureScheme::product_trapezoid) {
        if (analytic) {
          const auto [w_far, w_near] = linear_product_weights(beta, std::max(0.0, u0), u1);
          emit(ops.regular(u1, i_far), w_far, th_far);
          emit(ops.regular(u0, i_near), w_near, th_near);
        } else {
          emit(ops.regular(u1, i_far), 0.5 * h, th_far);
          emit(ops.regular(u0, i_near), 0.5 * h, th_near);
        }
      } else {
        const double um = 0.5 * (u0 + u1);
        const double weight = analytic ? power_integral(beta, std::max(0.0, u0), u1)
                                       : h;
        emit(ops.regular(um, i_mid), weight, 0.5 * (th_far + th_near));
      }
    }
  }

  template <typename A, typename B>
  void add(double t, double a, double b, const Eigen::MatrixBase<A>& ya, const Eigen::MatrixBase<B>& yb,
           long index_b, Vector& acc) {
    visit(t, a, b, index_b, [&](const LinearOp& op, double w, double theta) {
      op.accumulate(w * (1.0 - theta), ya, acc);
      op.accumulate(w * theta, yb, acc);
    });
  }

  // One panel [a, a+h] seen from t = a + (d+1)h collapses to P·y(a) + Q·y(a+h).
  std::pair<LinearOp, LinearOp> collapse(double a, double h, long d, long index_b) {
    LinearOp p = LinearOp::scalar(0.0, k.dim()), qq = LinearOp::scalar(0.0, k.dim());
    visit(a + double(d + 1) * h, a, a + h, index_b, [&](const LinearOp& op, double w, double theta) {
      p.add_scaled(w * (1.0 - theta), op);
      qq.add_scaled(w * theta, op);
    });
    return {std::move(p), std::move(qq)};
  }
};

bool is_uniform(const std::vector<double>& g) {
  if (g.size() < 2) return false;
  const double h = (g.back() - g.front()) / double(g.size() - 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(g[i] - (g.front() + double(i) * h)) > 1e-12 * std::max(1.0, std::abs(g.back()))) return false;
  return true;
}

void check_domain(const Kernel& k, const Trajectory& y) {
  if (y.space().dim() != k.dim()) throw ContractError("convolve: trajectory dimension does not match kernel");
}

}  // namespace

std::string to_string(QuadratureScheme s) {
  return s == QuadratureScheme::product_rectangle ? "product_rectangle" : "product_trapezoid";
}

std::string to_string(SingularPanelRule r) {
  return r == SingularPanelRule::analytic_weight ? "analytic_weight" : "gauss_jacobi";
}

void QuadratureSpec::validate() const {
  if (panels_per_step < 1) throw ContractError("QuadratureSpec: panels_per_step must be >= 1");
  if (gauss_jacobi_nodes < 1) throw ContractError("QuadratureSpec: gauss_jacobi nodes must be >= 1");
}

std::pair<Vector, Vector> gauss_jacobi_unit(int n, double b) {
  if (n < 1) throw ContractError("gauss_jacobi_unit: n must be >= 1");
  if (!(b > -1.0)) throw DomainError("gauss_jacobi_unit: exponent must exceed -1");
  // Jacobi weight (1−ξ)^a (1+ξ)^b on [−1,1] with a = 0.
  const double a = 0.0;
  const double ab = a + b;
  Matrix jac = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double k = i;
    const double denom = (2 * k + ab) * (2 * k + ab + 2);
    jac(i, i) = (i == 0) ? (b - a) / (ab + 2) : (b * b - a * a) / denom;
    if (i + 1 < n) {
      const double kk = k + 1;
      const double num = 4 * kk * (kk + a) * (kk + b) * (kk + ab);
      const double den = (2 * kk + ab) * (2 * kk + ab) * (2 * kk + ab + 1) * (2 * kk + ab - 1);
      jac(i, i + 1) = jac(i + 1, i) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  const double mu0 = std::pow(2.0, ab + 1) * gamma(a + 1) * gamma(b + 1) / gamma(ab + 2);
  Vector x = (eig.eigenvalues().array() + 1.0) / 2.0;
  Vector w = mu0 * eig.eigenvectors().row(0).transpose().array().square() * std::pow(2.0, -b - 1);
  return {x, w};
}

Vector convolve_at(const Kernel& k, const Trajectory& y, double t, const QuadratureSpec& q) {
  q.validate();
  check_domain(k, y);
  if (t < y.t1() - 1e-12 * std::max(1.0, std::abs(t)))
    throw ContractError("convolve_at: evaluation time precedes the end of the history");
  if (t - y.t0() > k.horizon() * (1.0 + 1e-12)) throw DomainError("convolve_at: lag exceeds kernel horizon");
  LagOperators ops(k);
  PanelIntegrator panel{k, q, ops, std::nullopt};
  Vector acc = Vector::Zero(k.dim());
  const auto& g = y.grid();
  for (std::size_t j = 0; j + 1 < g.size(); ++j) panel.add(t, g[j], g[j + 1], y.node(j), y.node(j + 1), -1, acc);
  if (!acc.allFinite()) throw NumericError("convolve: non-finite result");
  return acc;
}

Vector convolve(const Kernel& k, const Trajectory& y, const QuadratureSpec& q) {
  return convolve_at(k, y, y.t1(), q);
}

ConvolutionPlan::ConvolutionPlan(const Kernel& k, std::vector<double> grid, const QuadratureSpec& q)
    : k_(&k), grid_(std::move(grid)), q_(q) {
  q_.validate();
  const std::size_t n = grid_.size();
  if (n < 1) throw ContractError("ConvolutionPlan: empty grid");
  if (grid_.back() - grid_.front() > k.horizon() * (1.0 + 1e-12))
    throw DomainError("convolution_path: interval longer than kernel horizon");
  if (!is_uniform(grid_)) return;
  const long m = q_.panels_per_step;
  const double h = (grid_.back() - grid_.front()) / double(n - 1);
  LagOperators ops(k);
  ops.tabulate(h / double(2 * m), static_cast<long>(2 * m * (n - 1)));
  PanelIntegrator panel{k, q_, ops, std::nullopt};
  collapsed_.reserve(n - 1);
  for (std::size_t d = 0; d + 1 < n; ++d)
    collapsed_.push_back(panel.collapse(grid_.front(), h, static_cast<long>(d), static_cast<long>(2 * m * d)));

  const bool separable = std::all_of(collapsed_.begin(), collapsed_.end(), [](const auto& pq) {
    return pq.first.form() != LinearOp::Form::dense && pq.second.form() != LinearOp::Form::dense;
  });
  if (!separable) return;
  const bool shared = std::all_of(collapsed_.begin(), collapsed_.end(), [](const auto& pq) {
    return pq.first.form() == LinearOp::Form::scalar && pq.second.form() == LinearOp::Form::scalar;
  });
  const int blocks = shared ? 1 : k.dim();
  const auto nn = static_cast<Eigen::Index>(n);
  for (int c = 0; c < blocks; ++c) {
    Matrix w = Matrix::Zero(nn, nn);
    for (Eigen::Index i = 1; i < nn; ++i)
      for (Eigen::Index j = 0; j < i; ++j) {
        const auto& [p, qq] = collapsed_[static_cast<std::size_t>(i - j - 1)];
        w(i, j) += p.diagonal_entry(c);
        w(i, j + 1) += qq.diagonal_entry(c);
      }
    toeplitz_.push_back(std::move(w));
  }
}

Trajectory ConvolutionPlan::apply(const Trajectory& y) const {
  check_domain(*k_, y);
  if (y.grid() != grid_) throw ContractError("ConvolutionPlan: trajectory grid differs from the plan grid");
  const auto& g = grid_;
  const std::size_t n = g.size();
  if (!toeplitz_.empty()) {
    Matrix out(k_->dim(), static_cast<Eigen::Index>(n));
    if (toeplitz_.size() == 1) {
      out.noalias() = y.values() * toeplitz_.front().transpose();
    } else {
      for (int c = 0; c < k_->dim(); ++c)
        out.row(c).noalias() = y.values().row(c) * toeplitz_[static_cast<std::size_t>(c)].transpose();
    }
    if (!out.allFinite()) {
      for (Eigen::Index i = 0; i < out.cols(); ++i)
        if (!out.col(i).allFinite())
          throw NumericError("convolution_path: non-finite value at node " + std::to_string(i));
    }
    return Trajectory(k_->v_space(), g, std::move(out));
  }
  LagOperators ops(*k_);
  PanelIntegrator panel{*k_, q_, ops, std::nullopt};
  Matrix out = Matrix::Zero(k_->dim(), static_cast<Eigen::Index>(n));
  Vector acc(k_->dim());
  const Matrix& yv = y.values();
  const bool uniform = !collapsed_.empty();
  for (std::size_t i = 1; i < n; ++i) {
    acc.setZero();
    for (std::size_t j = 0; j < i; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (uniform) {
        const auto& [p, qq] = collapsed_[i - j - 1];
        p.accumulate(1.0, yv.col(jj), acc);
        qq.accumulate(1.0, yv.col(jj + 1), acc);
      } else {
        panel.add(g[i], g[j], g[j + 1], yv.col(jj), yv.col(jj + 1), -1, acc);
      }
    }
    if (!acc.allFinite()) throw NumericError("convolution_path: non-finite value at node " + std::to_string(i));
    out.col(static_cast<Eigen::Index>(i)) = acc;
  }
  return Trajectory(k_->v_space(), g, std::move(out));
}

Trajectory convolution_path(const Kernel& k, const Trajectory& y, const QuadratureSpec& q) {
  check_domain(k, y);
  return ConvolutionPlan(k, y.grid(), q).apply(y);
}

Trajectory convolution_path(const Kernel& k, const Trajectory& y, const std::vector<double>& grid,
                            const QuadratureSpec& q) {
  return convolution_path(k, Trajectory::sample(y.space(), grid, [&](double t) { return y(t); }), q);
}

Trajectory compose(const Nonlinearity& f, const Trajectory& x) {
  if (x.space() != f.v_space()) throw ContractError("compose: trajectory not in V");
  Matrix out(f.w_space().dim(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vector v = f(x.node(i));
    if (!v.allFinite()) throw NumericError("F: non-finite value at node " + std::to_string(i));
    out.col(static_cast<Eigen::Index>(i)) = v;
  }
  return Trajectory(f.w_space(), x.grid(), std::move(out));
}

double defect(const Trajectory& x, const Kernel& k, const Nonlinearity& f, const Trajectory& o,
              const QuadratureSpec& q) {
  return defect(x, ConvolutionPlan(k, x.grid(), q), f, o);
}

double defect(const Trajectory& x, const ConvolutionPlan& plan, const Nonlinearity& f, const Trajectory& o) {
  const Trajectory conv = plan.apply(compose(f, x));
  const Matrix r = x.values() - conv.values() - (o.grid() == x.grid() ? o.values() : o.at(x.grid()));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.cols(); ++i) worst = std::max(worst, norm(x.space(), r.col(i)));
  return worst;
}

double sampled_defect(const Trajectory& x, const Kernel& k, const Nonlinearity& f, const Trajectory& o,
                      const QuadratureSpec& q, std::size_t points) {
  if (points < 1) throw ContractError("sampled_defect: points must be >= 1");
  const std::size_t n = x.size();
  if (points >= n) return defect(x, k, f, o, q);
  const Trajectory fx = compose(f, x);
  double worst = 0.0;
  for (std::size_t p = 1; p <= points; ++p) {
    const std::size_t i = (p * (n - 1)) / points;
    const std::vector<double> g(x.grid().begin(), x.grid().begin() + static_cast<std::ptrdiff_t>(i + 1));
    const Vector conv =
        i == 0 ? Vector(Vector::Zero(k.dim()))
               : convolve_at(k, Trajectory(fx.space(), g, fx.values().leftCols(static_cast<Eigen::Index>(i + 1))),
                             x.grid()[i], q);
    worst = std::max(worst, norm(x.space(), Vector(x.node(i) - conv - o(x.grid()[i]))));
  }
  return worst;
}

double estimate_quadrature_error(const Kernel& k, const Trajectory& y, const QuadratureSpec& q) {
  if (y.size() < 3) return 0.0;
  std::vector<double> coarse;
  for (std::size_t i = 0; i < y.size(); i += 2) coarse.push_back(y.grid()[i]);
  if (coarse.back() != y.t1()) coarse.push_back(y.t1());
  const Trajectory fine_path = convolution_path(k, y, q);
  const Trajectory coarse_path = convolution_path(k, y, coarse, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i)
    worst = std::max(worst, norm(k.v_space(), Vector(fine_path(coarse[i]) - coarse_path.node(i))));
  return worst / 3.0;
}

}  // namespace mildsolve
