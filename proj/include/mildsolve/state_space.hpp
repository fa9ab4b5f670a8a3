#ifndef MILDSOLVE_STATE_SPACE_HPP
#define MILDSOLVE_STATE_SPACE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mildsolve/errors.hpp"

namespace mildsolve {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class NormKind { euclidean, sup, p_norm, weighted_p };

std::string to_string(NormKind kind);

// Finite-dimensional stand-in for a separable Banach space: R^dim with one of
// a few absolute norms.
class SpaceSpec {
public:
  static SpaceSpec euclidean(int dim);
  static SpaceSpec sup(int dim);
  static SpaceSpec p_norm(int dim, double p);
  static SpaceSpec weighted_p(int dim, double p, Vector weights);

  int dim() const { return dim_; }
  NormKind kind() const { return kind_; }
  // Exponent of the norm; +inf for sup, 2 for euclidean.
  double p() const { return p_; }
  const Vector& weights() const { return weights_; }

  friend bool operator==(const SpaceSpec& a, const SpaceSpec& b);
  friend bool operator!=(const SpaceSpec& a, const SpaceSpec& b) { return !(a == b); }

private:
  SpaceSpec(int dim, NormKind kind, double p, Vector weights);

  int dim_;
  NormKind kind_;
  double p_;
  Vector weights_;
};

namespace detail {

template <typename Derived>
typename Derived::RealScalar scaled_p_sum(const Eigen::MatrixBase<Derived>& v,
                                          typename Derived::RealScalar p,
                                          const Vector* weights) {
  using Real = typename Derived::RealScalar;
  using std::pow;
  const Real scale = v.cwiseAbs().maxCoeff();
  if (scale == Real(0)) return Real(0);
  Real sum(0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Real term = pow(Real(std::abs(v[i])) / scale, p);
    if (weights) term *= Real((*weights)[i]);
    sum += term;
  }
  return scale * pow(sum, Real(1) / p);
}

}  // namespace detail

// ‖v‖ under `space`. Works on any Eigen vector expression and scalar type.
template <typename Derived>
typename Derived::RealScalar norm(const SpaceSpec& space, const Eigen::MatrixBase<Derived>& v) {
  using Real = typename Derived::RealScalar;
  if (v.size() != space.dim())
    throw ContractError("norm: vector of length " + std::to_string(v.size()) +
                        " in space of dimension " + std::to_string(space.dim()));
  switch (space.kind()) {
    case NormKind::euclidean:
      return v.norm();
    case NormKind::sup:
      return v.cwiseAbs().maxCoeff();
    case NormKind::p_norm:
      return detail::scaled_p_sum(v, Real(space.p()), nullptr);
    case NormKind::weighted_p:
      return detail::scaled_p_sum(v, Real(space.p()), &space.weights());
  }
  return Real(0);
}

// A checked element of a SpaceSpec: correct length, finite entries.
class StateVector {
public:
  StateVector(SpaceSpec space, Vector coords);

  const SpaceSpec& space() const { return space_; }
  const Vector& coords() const { return coords_; }

private:
  SpaceSpec space_;
  Vector coords_;
};

double norm(const StateVector& v);

// Constants relating norms on the same R^d.
//   sup_domination(s):      ‖v‖_∞ ≤ c ‖v‖_s
//   identity_norm(from,to): ‖v‖_to ≤ c ‖v‖_from
double sup_domination(const SpaceSpec& space);
double identity_norm(const SpaceSpec& from, const SpaceSpec& to);

// Upper bound (exact where a closed form exists) for ‖M‖_{L(from,to)}.
double operator_norm(const Matrix& m, const SpaceSpec& from, const SpaceSpec& to);
// Same for diag(d).
double diagonal_operator_norm(const Vector& d, const SpaceSpec& from, const SpaceSpec& to);

// Continuous path [t0,t1] -> R^dim, piecewise linear between grid nodes.
// Values are stored column-per-node.
class Trajectory {
public:
  Trajectory(SpaceSpec space, std::vector<double> grid, Matrix values);

  static Trajectory constant(SpaceSpec space, std::vector<double> grid, const Vector& value);
  static Trajectory sample(SpaceSpec space, std::vector<double> grid,
                           const std::function<Vector(double)>& fn);

  const SpaceSpec& space() const { return space_; }
  const std::vector<double>& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  double t0() const { return grid_.front(); }
  double t1() const { return grid_.back(); }

  auto node(std::size_t i) const { return values_.col(static_cast<Eigen::Index>(i)); }

  // Piecewise-linear evaluation; t may exceed [t0,t1] by roundoff only.
  Vector operator()(double t) const;
  // Same at nondecreasing times, one column per time.
  Matrix at(const std::vector<double>& times) const;

  // max over nodes of ‖x(t_i)‖, which is the exact sup for a PL path.
  double sup_norm() const;

  Trajectory shifted(double dt) const;

private:
  SpaceSpec space_;
  std::vector<double> grid_;
  Matrix values_;
};

std::vector<double> uniform_grid(double a, double b, std::size_t nodes);

// max ‖x(t) − y(t)‖ over the union of both grids and `probe` equispaced
// points. For two PL paths the merged-grid maximum is already exact.
double sup_distance(const Trajectory& x, const Trajectory& y, std::size_t probe);

}  // namespace mildsolve

#endif  // MILDSOLVE_STATE_SPACE_HPP
