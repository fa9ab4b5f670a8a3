#ifndef MILDSOLVE_NONLINEAR_HPP
#define MILDSOLVE_NONLINEAR_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mildsolve/state_space.hpp"

namespace mildsolve {

// Ψ(r) = Σ_j c_j r^j with c_j >= 0, hence non-decreasing on [0, ∞).
class PsiForm {
public:
  PsiForm() = default;
  explicit PsiForm(std::vector<double> coefficients);

  double operator()(double r) const;
  const std::vector<double>& coefficients() const { return coefficients_; }

private:
  std::vector<double> coefficients_;
};

enum class NonlinearityKind { linear, polynomial_scalar, quadratic_riccati, cubic_reaction, custom };

std::string to_string(NonlinearityKind kind);

// F: V -> W with a closed-form upper bound Ψ for its local Lipschitz modulus.
class Nonlinearity {
public:
  using Map = std::function<Vector(const Vector&)>;

  static Nonlinearity linear(Matrix a, SpaceSpec v_space, SpaceSpec w_space);
  // p(v) = Σ_j c_j v^j applied componentwise.
  static Nonlinearity polynomial_scalar(std::vector<double> coefficients, SpaceSpec v_space, SpaceSpec w_space);
  static Nonlinearity quadratic_riccati(SpaceSpec v_space, SpaceSpec w_space);
  static Nonlinearity cubic_reaction(SpaceSpec v_space, SpaceSpec w_space);
  // `name` is informational; `psi` is trusted only after audit_psi.
  static Nonlinearity custom(std::string name, Map map, PsiForm psi, SpaceSpec v_space, SpaceSpec w_space);

  NonlinearityKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const PsiForm& psi() const { return psi_; }
  const SpaceSpec& v_space() const { return v_space_; }
  const SpaceSpec& w_space() const { return w_space_; }

  // Unchecked evaluation on raw coordinates (hot path inside quadrature).
  Vector operator()(const Vector& v) const { return map_(v); }

private:
  Nonlinearity(NonlinearityKind kind, std::string name, Map map, PsiForm psi, SpaceSpec v, SpaceSpec w);

  NonlinearityKind kind_;
  std::string name_;
  Map map_;
  PsiForm psi_;
  SpaceSpec v_space_;
  SpaceSpec w_space_;
};

StateVector eval_F(const Nonlinearity& f, const StateVector& v);

double lipschitz_modulus(const Nonlinearity& f, double r);

struct PsiAudit {
  double max_observed_ratio = 0.0;
  double psi = 0.0;
  bool violated = false;
};

// Randomized check that psi(r) dominates ‖F(v)−F(w)‖_W / ‖v−w‖_V over pairs
// with ‖v‖+‖w‖ ≤ r. Deterministic for a given seed.
PsiAudit audit_psi(const Nonlinearity& f, double r, int samples, std::uint64_t seed, double tol_audit = 1e-9);

}  // namespace mildsolve

#endif  // MILDSOLVE_NONLINEAR_HPP
