#include "mildsolve/state_space.hpp"

#include <algorithm>
#include <limits>

namespace mildsolve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(int dim) {
  if (dim < 1) throw ContractError("SpaceSpec: dim must be >= 1, got " + std::to_string(dim));
}

void require_p(double p) {
  if (!(p >= 1.0)) throw ContractError("SpaceSpec: p must be >= 1");
}

// Unweighted exponent of a space; weighted spaces report their p.
double inverse_p(const SpaceSpec& s) { return std::isinf(s.p()) ? 0.0 : 1.0 / s.p(); }

// ‖v‖_2 ≤ a ‖v‖_s
double euclid_from(const SpaceSpec& s) {
  const double d = s.dim();
  double c = std::pow(d, std::max(0.0, 0.5 - inverse_p(s)));
  if (s.kind() == NormKind::weighted_p) c *= std::pow(s.weights().minCoeff(), -1.0 / s.p());
  return c;
}

// ‖v‖_s ≤ b ‖v‖_2
double euclid_to(const SpaceSpec& s) {
  const double d = s.dim();
  double c = std::pow(d, std::max(0.0, inverse_p(s) - 0.5));
  if (s.kind() == NormKind::weighted_p) c *= std::pow(s.weights().maxCoeff(), 1.0 / s.p());
  return c;
}

double max_col_sum(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }
double max_row_sum(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// ‖M‖_{p→p} for an unweighted p-norm.
double unweighted_operator_norm(const Matrix& m, double p) {
  if (std::isinf(p)) return max_row_sum(m);
  if (p == 1.0) return max_col_sum(m);
  if (p == 2.0) return spectral_norm(m);
  // Riesz–Thorin interpolation between 1 and ∞.
  return std::pow(max_col_sum(m), 1.0 / p) * std::pow(max_row_sum(m), 1.0 - 1.0 / p);
}

double same_space_operator_norm(const Matrix& m, const SpaceSpec& s) {
  if (s.kind() != NormKind::weighted_p) return unweighted_operator_norm(m, s.p());
  // ‖v‖_{w,p} = ‖D v‖_p with D = diag(w^{1/p}); ‖M‖ = ‖D M D^{-1}‖_p.
  const Vector d = s.weights().array().pow(1.0 / s.p());
  const Matrix scaled = d.asDiagonal() * m * d.cwiseInverse().asDiagonal();
  return unweighted_operator_norm(scaled, s.p());
}

}  // namespace

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::euclidean: return "euclidean";
    case NormKind::sup: return "sup";
    case NormKind::p_norm: return "p_norm";
    case NormKind::weighted_p: return "weighted_p";
  }
  return "unknown";
}

SpaceSpec::SpaceSpec(int dim, NormKind kind, double p, Vector weights)
    : dim_(dim), kind_(kind), p_(p), weights_(std::move(weights)) {}

SpaceSpec SpaceSpec::euclidean(int dim) {
  require_dim(dim);
  return SpaceSpec(dim, NormKind::euclidean, 2.0, Vector());
}

SpaceSpec SpaceSpec::sup(int dim) {
  require_dim(dim);
  return SpaceSpec(dim, NormKind::sup, kInf, Vector());
}

SpaceSpec SpaceSpec::p_norm(int dim, double p) {
  require_dim(dim);
  require_p(p);
  return SpaceSpec(dim, NormKind::p_norm, p, Vector());
}

SpaceSpec SpaceSpec::weighted_p(int dim, double p, Vector weights) {
  require_dim(dim);
  require_p(p);
  if (weights.size() != dim)
    throw ContractError("SpaceSpec: weights length " + std::to_string(weights.size()) +
                        " != dim " + std::to_string(dim));
  if (!weights.allFinite() || (weights.array() <= 0.0).any())
    throw ContractError("SpaceSpec: weights must be finite and strictly positive");
  return SpaceSpec(dim, NormKind::weighted_p, p, std::move(weights));
}

bool operator==(const SpaceSpec& a, const SpaceSpec& b) {
  if (a.dim_ != b.dim_ || a.kind_ != b.kind_) return false;
  if (a.kind_ == NormKind::p_norm || a.kind_ == NormKind::weighted_p)
    if (a.p_ != b.p_) return false;
  if (a.kind_ == NormKind::weighted_p) return a.weights_ == b.weights_;
  return true;
}

StateVector::StateVector(SpaceSpec space, Vector coords)
    : space_(std::move(space)), coords_(std::move(coords)) {
  if (coords_.size() != space_.dim())
    throw ContractError("StateVector: length " + std::to_string(coords_.size()) +
                        " != dim " + std::to_string(space_.dim()));
  if (!coords_.allFinite()) throw ContractError("StateVector: non-finite coordinate");
}

double norm(const StateVector& v) { return norm(v.space(), v.coords()); }

double sup_domination(const SpaceSpec& space) {
  if (space.kind() == NormKind::weighted_p)
    return std::pow(space.weights().minCoeff(), -1.0 / space.p());
  return 1.0;
}

double identity_norm(const SpaceSpec& from, const SpaceSpec& to) {
  if (from.dim() != to.dim()) throw ContractError("identity_norm: dimension mismatch");
  if (from == to) return 1.0;
  const bool plain = from.kind() != NormKind::weighted_p && to.kind() != NormKind::weighted_p;
  if (plain) {
    // ‖id‖_{p→q} = d^{max(0, 1/q − 1/p)} on R^d.
    return std::pow(double(from.dim()), std::max(0.0, inverse_p(to) - inverse_p(from)));
  }
  return euclid_to(to) * euclid_from(from);
}

double operator_norm(const Matrix& m, const SpaceSpec& from, const SpaceSpec& to) {
  if (m.rows() != to.dim() || m.cols() != from.dim())
    throw ContractError("operator_norm: matrix shape does not match spaces");
  if (from == to) return same_space_operator_norm(m, from);
  // ‖M w‖_to ≤ ‖id‖_{from→to} ‖M w‖_from
  return identity_norm(from, to) * same_space_operator_norm(m, from);
}

double diagonal_operator_norm(const Vector& d, const SpaceSpec& from, const SpaceSpec& to) {
  if (d.size() != from.dim() || d.size() != to.dim())
    throw ContractError("diagonal_operator_norm: length does not match spaces");
  // All supported norms are absolute, so diagonal scaling is bounded by max|d_k|.
  return d.cwiseAbs().maxCoeff() * identity_norm(from, to);
}

Trajectory::Trajectory(SpaceSpec space, std::vector<double> grid, Matrix values)
    : space_(std::move(space)), grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.empty()) throw ContractError("Trajectory: empty grid");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i])) throw ContractError("Trajectory: non-finite grid node");
    if (i > 0 && !(grid_[i] > grid_[i - 1]))
      throw ContractError("Trajectory: grid not strictly increasing at node " + std::to_string(i));
  }
  if (values_.cols() != static_cast<Eigen::Index>(grid_.size()))
    throw ContractError("Trajectory: " + std::to_string(values_.cols()) + " values for " +
                        std::to_string(grid_.size()) + " grid nodes");
  if (values_.rows() != space_.dim())
    throw ContractError("Trajectory: value dimension does not match space");
  if (!values_.allFinite()) throw ContractError("Trajectory: non-finite value");
}

Trajectory Trajectory::constant(SpaceSpec space, std::vector<double> grid, const Vector& value) {
  Matrix values = value.replicate(1, static_cast<Eigen::Index>(grid.size()));
  return Trajectory(std::move(space), std::move(grid), std::move(values));
}

Trajectory Trajectory::sample(SpaceSpec space, std::vector<double> grid,
                              const std::function<Vector(double)>& fn) {
  Matrix values(space.dim(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) values.col(static_cast<Eigen::Index>(i)) = fn(grid[i]);
  return Trajectory(std::move(space), std::move(grid), std::move(values));
}

Vector Trajectory::operator()(double t) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t1()) + (t1() - t0()));
  if (t < t0() - slack || t > t1() + slack)
    throw ContractError("Trajectory: evaluation at t=" + std::to_string(t) + " outside [" +
                        std::to_string(t0()) + ", " + std::to_string(t1()) + "]");
  if (t <= t0()) return values_.col(0);
  if (t >= t1()) return values_.col(values_.cols() - 1);
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const auto j = static_cast<Eigen::Index>(it - grid_.begin());
  const double a = grid_[j - 1], b = grid_[j];
  const double w = (t - a) / (b - a);
  return (1.0 - w) * values_.col(j - 1) + w * values_.col(j);
}

Matrix Trajectory::at(const std::vector<double>& times) const {
  Matrix out(values_.rows(), static_cast<Eigen::Index>(times.size()));
  if (times.empty()) return out;
  const double slack = 1e-12 * std::max(1.0, std::abs(t1()) + (t1() - t0()));
  if (times.front() < t0() - slack || times.back() > t1() + slack)
    throw ContractError("Trajectory: evaluation times outside [" + std::to_string(t0()) + ", " +
                        std::to_string(t1()) + "]");
  std::size_t j = 1;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (i > 0 && t < times[i - 1]) throw ContractError("Trajectory::at: times must be nondecreasing");
    const auto c = static_cast<Eigen::Index>(i);
    if (t <= t0()) {
      out.col(c) = values_.col(0);
      continue;
    }
    if (t >= t1()) {
      out.col(c) = values_.col(values_.cols() - 1);
      continue;
    }
    while (grid_[j] <= t) ++j;
    const auto jj = static_cast<Eigen::Index>(j);
    const double w = (t - grid_[j - 1]) / (grid_[j] - grid_[j - 1]);
    out.col(c) = (1.0 - w) * values_.col(jj - 1) + w * values_.col(jj);
  }
  return out;
}

double Trajectory::sup_norm() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < values_.cols(); ++i) m = std::max(m, norm(space_, values_.col(i)));
  return m;
}

Trajectory Trajectory::shifted(double dt) const {
  std::vector<double> g = grid_;
  for (double& t : g) t += dt;
  return Trajectory(space_, std::move(g), values_);
}

std::vector<double> uniform_grid(double a, double b, std::size_t nodes) {
  if (nodes < 2) throw ContractError("uniform_grid: need at least 2 nodes");
  if (!(b > a)) throw ContractError("uniform_grid: empty interval");
  std::vector<double> g(nodes);
  const double h = (b - a) / double(nodes - 1);
  for (std::size_t i = 0; i < nodes; ++i) g[i] = a + double(i) * h;
  g.back() = b;
  return g;
}

double sup_distance(const Trajectory& x, const Trajectory& y, std::size_t probe) {
  if (x.space() != y.space()) throw ContractError("sup_distance: trajectories in different spaces");
  const double scale = std::max(1.0, std::abs(x.t1()));
  if (std::abs(x.t0() - y.t0()) > 1e-12 * scale || std::abs(x.t1() - y.t1()) > 1e-12 * scale)
    throw ContractError("sup_distance: trajectories on different intervals");
  if (probe < std::max(x.size(), y.size()))
    throw ContractError("sup_distance: probe count below grid size");

  double m = 0.0;
  auto visit = [&](double t) { m = std::max(m, norm(x.space(), x(t) - y(t))); };
  for (double t : x.grid()) visit(t);
  for (double t : y.grid()) visit(t);
  if (x.t1() > x.t0())
    for (double t : uniform_grid(x.t0(), x.t1(), std::max<std::size_t>(probe, 2))) visit(t);
  return m;
}

}  // namespace mildsolve
