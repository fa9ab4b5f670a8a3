#include "mildsolve/kernels.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mildsolve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// sup_{t∈(0,T)} t^β e^{c t}
double sup_power_exp(double beta, double c, double horizon) {
  if (beta < 0.0) return kInf;
  if (beta == 0.0) return std::max(1.0, std::exp(c * horizon));
  if (c < 0.0) {
    const double t_star = beta / (-c);
    if (t_star < horizon) return std::pow(t_star, beta) * std::exp(c * t_star);
  }
  return std::pow(horizon, beta) * std::exp(c * horizon);
}

// Merged geometric/uniform mesh on (0,T], sorted and without duplicates.
std::vector<double> singular_mesh(double horizon, int mesh) {
  std::vector<double> pts;
  for (int j = 0; j <= mesh; ++j) {
    const double t = std::ldexp(horizon, -j);
    if (t > 0.0) pts.push_back(t);
  }
  for (int i = 1; i < mesh; ++i) pts.push_back(horizon * double(i) / double(mesh));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double holder_on_mesh(const Kernel& k, int mesh) {
  const auto pts = singular_mesh(k.horizon(), mesh);
  std::vector<LinearOp> ops;
  ops.reserve(pts.size());
  for (double t : pts) ops.push_back(k.at(t));
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s = pts[i];
    const double weight = std::pow(s, k.alpha());
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double u = pts[j];
      const double diff = (ops[j] - ops[i]).norm(k.w_space(), k.v_space());
      best = std::max(best, weight * diff / std::pow(u - s, k.rho()));
    }
  }
  return best;
}

}  // namespace

LinearOp LinearOp::scalar(double c, int dim) {
  LinearOp op;
  op.form_ = Form::scalar;
  op.dim_ = dim;
  op.scalar_ = c;
  return op;
}

LinearOp LinearOp::diagonal(Vector d) {
  LinearOp op;
  op.form_ = Form::diagonal;
  op.dim_ = static_cast<int>(d.size());
  op.diagonal_ = std::move(d);
  return op;
}

LinearOp LinearOp::dense(Matrix m) {
  if (m.rows() != m.cols()) throw ContractError("LinearOp: dense operator must be square");
  LinearOp op;
  op.form_ = Form::dense;
  op.dim_ = static_cast<int>(m.rows());
  op.dense_ = std::move(m);
  return op;
}

Vector LinearOp::apply(const Vector& v) const {
  if (v.size() != dim_) throw ContractError("LinearOp: vector length does not match operator");
  Vector out = Vector::Zero(dim_);
  accumulate(1.0, v, out);
  return out;
}

Matrix LinearOp::to_dense() const {
  switch (form_) {
    case Form::scalar: return scalar_ * Matrix::Identity(dim_, dim_);
    case Form::diagonal: return diagonal_.asDiagonal();
    case Form::dense: return dense_;
  }
  return {};
}

bool LinearOp::all_finite() const {
  switch (form_) {
    case Form::scalar: return std::isfinite(scalar_);
    case Form::diagonal: return diagonal_.allFinite();
    case Form::dense: return dense_.allFinite();
  }
  return false;
}

LinearOp LinearOp::scaled(double c) const {
  LinearOp op = *this;
  op.scalar_ *= c;
  op.diagonal_ *= c;
  op.dense_ *= c;
  return op;
}

void LinearOp::add_scaled(double w, const LinearOp& other) {
  if (dim_ != other.dim_) throw ContractError("LinearOp: dimension mismatch");
  if (form_ == Form::scalar && other.form_ == Form::scalar) {
    scalar_ += w * other.scalar_;
    return;
  }
  if (form_ != Form::dense && other.form_ != Form::dense) {
    if (form_ == Form::scalar) {
      diagonal_ = Vector::Constant(dim_, scalar_);
      form_ = Form::diagonal;
    }
    if (other.form_ == Form::scalar) diagonal_.array() += w * other.scalar_;
    else diagonal_ += w * other.diagonal_;
    return;
  }
  if (form_ != Form::dense) {
    dense_ = to_dense();
    form_ = Form::dense;
    diagonal_.resize(0);
  }
  switch (other.form_) {
    case Form::scalar: dense_.diagonal().array() += w * other.scalar_; break;
    case Form::diagonal: dense_.diagonal() += w * other.diagonal_; break;
    case Form::dense: dense_ += w * other.dense_; break;
  }
}

LinearOp operator-(const LinearOp& a, const LinearOp& b) {
  if (a.dim_ != b.dim_) throw ContractError("LinearOp: dimension mismatch");
  using F = LinearOp::Form;
  if (a.form_ == F::scalar && b.form_ == F::scalar) return LinearOp::scalar(a.scalar_ - b.scalar_, a.dim_);
  if (a.form_ != F::dense && b.form_ != F::dense) {
    const Vector da = a.form_ == F::scalar ? Vector::Constant(a.dim_, a.scalar_) : a.diagonal_;
    const Vector db = b.form_ == F::scalar ? Vector::Constant(b.dim_, b.scalar_) : b.diagonal_;
    return LinearOp::diagonal(da - db);
  }
  return LinearOp::dense(a.to_dense() - b.to_dense());
}

double LinearOp::norm(const SpaceSpec& from, const SpaceSpec& to) const {
  switch (form_) {
    case Form::scalar: return std::abs(scalar_) * identity_norm(from, to);
    case Form::diagonal: return diagonal_operator_norm(diagonal_, from, to);
    case Form::dense: return operator_norm(dense_, from, to);
  }
  return 0.0;
}

Kernel::Kernel(KernelBase base, KernelSetup setup, double singular_exponent)
    : base_(std::move(base)), setup_(std::move(setup)), singular_exponent_(singular_exponent) {
  if (!(setup_.horizon > 0.0) || !std::isfinite(setup_.horizon))
    throw ContractError("Kernel: horizon T must be positive and finite");
  if (!(setup_.alpha > 0.0 && setup_.alpha < 1.0)) throw ContractError("Kernel: alpha must lie in (0,1)");
  if (!(setup_.rho > 0.0 && setup_.rho < 1.0)) throw ContractError("Kernel: rho must lie in (0,1)");
  if (singular_exponent_ != 0.0 && !(singular_exponent_ > 0.0 && singular_exponent_ < 1.0))
    throw ContractError("Kernel: singular exponent alpha0 must lie in (0,1)");
  if (setup_.v_space.dim() != setup_.w_space.dim())
    throw ContractError("Kernel: V and W must have equal dimension");
  const int d = dim();
  std::visit(overloaded{
                 [](const kernel::Identity&) {},
                 [](const kernel::ScalarExp& s) {
                   if (!std::isfinite(s.lambda)) throw ContractError("Kernel: non-finite lambda");
                 },
                 [d](const kernel::DiagonalExp& s) {
                   if (s.lambdas.size() != d) throw ContractError("Kernel: lambdas length != dim");
                   if (!s.lambdas.allFinite()) throw ContractError("Kernel: non-finite lambdas");
                 },
                 [d](const kernel::MatrixExp& s) {
                   if (s.a.rows() != d || s.a.cols() != d) throw ContractError("Kernel: A must be dim x dim");
                   if (!s.a.allFinite()) throw ContractError("Kernel: non-finite entries in A");
                 },
             },
             base_);
}

LinearOp Kernel::regular_part(double lag) const {
  const int d = dim();
  LinearOp op = std::visit(
      overloaded{
          [d](const kernel::Identity&) { return LinearOp::scalar(1.0, d); },
          [d, lag](const kernel::ScalarExp& s) { return LinearOp::scalar(std::exp(s.lambda * lag), d); },
          [lag](const kernel::DiagonalExp& s) {
            return LinearOp::diagonal((-lag * s.lambdas).array().exp().matrix());
          },
          [lag](const kernel::MatrixExp& s) {
            if (lag == 0.0) return LinearOp::dense(Matrix::Identity(s.a.rows(), s.a.cols()));
            return LinearOp::dense(Matrix((lag * s.a).exp()));
          },
      },
      base_);
  if (!op.all_finite())
    throw NumericError("Kernel: non-finite operator at t=" + std::to_string(lag));
  return op;
}

LinearOp Kernel::at(double t) const {
  if (!(t > 0.0) || t > horizon() * (1.0 + 1e-12))
    throw DomainError("apply_kernel: t=" + std::to_string(t) + " outside (0, T]");
  LinearOp op = regular_part(t);
  if (singular_exponent_ > 0.0) op = op.scaled(std::pow(t, -singular_exponent_));
  return op;
}

LinearOp Kernel::extended(double t) const {
  if (!(t >= 0.0) || t > horizon() * (1.0 + 1e-12))
    throw DomainError("apply_extended: t=" + std::to_string(t) + " outside [0, T]");
  return regular_part(t);
}

std::string Kernel::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const kernel::Identity&) { os << "identity"; },
                 [&](const kernel::ScalarExp& s) { os << "scalar_exp(" << s.lambda << ")"; },
                 [&](const kernel::DiagonalExp& s) { os << "diagonal_exp(" << s.lambdas.size() << " modes)"; },
                 [&](const kernel::MatrixExp& s) { os << "matrix_exp(" << s.a.rows() << "x" << s.a.cols() << ")"; },
             },
             base_);
  std::string out = os.str();
  if (singular_exponent_ > 0.0) out = "singular_scaled(" + std::to_string(singular_exponent_) + ", " + out + ")";
  return out;
}

StateVector apply_kernel(const Kernel& k, double t, const StateVector& w) {
  if (w.space() != k.w_space()) throw ContractError("apply_kernel: vector not in W");
  Vector out = k.at(t).apply(w.coords());
  if (!out.allFinite()) throw NumericError("apply_kernel: non-finite result");
  return StateVector(k.v_space(), std::move(out));
}

StateVector apply_extended(const Kernel& k, double t, const StateVector& v) {
  if (v.space() != k.v_space()) throw ContractError("apply_extended: vector not in V");
  Vector out = k.extended(t).apply(v.coords());
  if (!out.allFinite()) throw NumericError("apply_extended: non-finite result");
  return StateVector(k.v_space(), std::move(out));
}

Matrix extended_path(const Kernel& k, const std::vector<double>& times, const Vector& v) {
  if (v.size() != k.dim()) throw ContractError("extended_path: vector has wrong dimension");
  for (double t : times)
    if (!(t >= 0.0) || t > k.horizon() * (1.0 + 1e-12))
      throw DomainError("apply_extended: t=" + std::to_string(t) + " outside [0, T]");
  const auto n = static_cast<Eigen::Index>(times.size());
  Matrix out(k.dim(), n);
  std::visit(overloaded{
                 [&](const kernel::Identity&) { out.colwise() = v; },
                 [&](const kernel::ScalarExp& s) {
                   for (Eigen::Index i = 0; i < n; ++i) out.col(i) = std::exp(s.lambda * times[std::size_t(i)]) * v;
                 },
                 [&](const kernel::DiagonalExp& s) {
                   for (Eigen::Index i = 0; i < n; ++i)
                     out.col(i) = (-times[std::size_t(i)] * s.lambdas).array().exp().matrix().cwiseProduct(v);
                 },
                 [&](const kernel::MatrixExp&) {
                   for (Eigen::Index i = 0; i < n; ++i) out.col(i) = k.extended(times[std::size_t(i)]).apply(v);
                 },
             },
             k.base());
  if (!out.allFinite()) throw NumericError("apply_extended: non-finite result");
  return out;
}

double singularity_bound(const Kernel& k, int mesh) {
  if (mesh < 2) throw ContractError("singularity_bound: mesh must be >= 2");
  const double beta = k.alpha() - k.singular_exponent();
  const double id = identity_norm(k.w_space(), k.v_space());
  const double horizon = k.horizon();

  if (const auto* m = std::get_if<kernel::MatrixExp>(&k.base())) {
    if (beta < 0.0) return kInf;
    (void)m;
    double best = 0.0;
    for (double t : singular_mesh(horizon, mesh))
      best = std::max(best, std::pow(t, k.alpha()) * k.at(t).norm(k.w_space(), k.v_space()));
    return best;
  }
  return std::visit(overloaded{
                        [&](const kernel::Identity&) { return id * sup_power_exp(beta, 0.0, horizon); },
                        [&](const kernel::ScalarExp& s) { return id * sup_power_exp(beta, s.lambda, horizon); },
                        [&](const kernel::DiagonalExp& s) {
                          // sup_t max_k = max_k sup_t
                          double best = 0.0;
                          for (Eigen::Index i = 0; i < s.lambdas.size(); ++i)
                            best = std::max(best, sup_power_exp(beta, -s.lambdas[i], horizon));
                          return id * best;
                        },
                        [&](const kernel::MatrixExp&) { return kInf; },
                    },
                    k.base());
}

HolderEstimate holder_modulus(const Kernel& k, int mesh, double divergence_factor) {
  if (mesh < 2) throw ContractError("holder_modulus: mesh must be >= 2");
  HolderEstimate est;
  est.coarse = holder_on_mesh(k, mesh);
  est.c_rho = holder_on_mesh(k, 2 * mesh);
  est.diverging = est.coarse > 0.0 ? est.c_rho / est.coarse > divergence_factor : false;
  if (!std::isfinite(est.c_rho)) est.diverging = true;
  return est;
}

}  // namespace mildsolve
