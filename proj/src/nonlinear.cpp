#include "mildsolve/nonlinear.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace mildsolve {

namespace {

// Componentwise-polynomial Lipschitz bound: |v^j − w^j| ≤ (|v|+|w|)^{j-1}|v−w|,
// so Ψ(r) = Σ_{j≥1} |c_j| r^{j-1} in the sup-norm. Other absolute norms pick
// up ‖·‖_∞ ≤ c‖·‖_V inside Ψ and ‖id‖_{V→W} outside.
PsiForm nemytskii_psi(const std::vector<double>& c, const SpaceSpec& v, const SpaceSpec& w) {
  const double inner = sup_domination(v);
  const double outer = identity_norm(v, w);
  std::vector<double> out;
  for (std::size_t j = 1; j < c.size(); ++j)
    out.push_back(outer * std::abs(c[j]) * std::pow(inner, double(j - 1)));
  if (out.empty()) out.push_back(0.0);
  return PsiForm(std::move(out));
}

void require_same_dim(const SpaceSpec& v, const SpaceSpec& w) {
  if (v.dim() != w.dim()) throw ContractError("Nonlinearity: V and W must have equal dimension");
}

}  // namespace

PsiForm::PsiForm(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
  for (double c : coefficients_)
    if (!(c >= 0.0) || !std::isfinite(c)) throw ContractError("PsiForm: coefficients must be finite and >= 0");
}

double PsiForm::operator()(double r) const {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * r + *it;
  return acc;
}

std::string to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::linear: return "linear";
    case NonlinearityKind::polynomial_scalar: return "polynomial_scalar";
    case NonlinearityKind::quadratic_riccati: return "quadratic_riccati";
    case NonlinearityKind::cubic_reaction: return "cubic_reaction";
    case NonlinearityKind::custom: return "custom";
  }
  return "unknown";
}

Nonlinearity::Nonlinearity(NonlinearityKind kind, std::string name, Map map, PsiForm psi, SpaceSpec v, SpaceSpec w)
    : kind_(kind),
      name_(std::move(name)),
      map_(std::move(map)),
      psi_(std::move(psi)),
      v_space_(std::move(v)),
      w_space_(std::move(w)) {}

Nonlinearity Nonlinearity::linear(Matrix a, SpaceSpec v_space, SpaceSpec w_space) {
  if (a.rows() != w_space.dim() || a.cols() != v_space.dim())
    throw ContractError("Nonlinearity::linear: matrix shape does not match spaces");
  if (!a.allFinite()) throw ContractError("Nonlinearity::linear: non-finite matrix entry");
  PsiForm psi({operator_norm(a, v_space, w_space)});
  return Nonlinearity(NonlinearityKind::linear, "linear", [a](const Vector& v) -> Vector { return a * v; },
                      std::move(psi), std::move(v_space), std::move(w_space));
}

Nonlinearity Nonlinearity::polynomial_scalar(std::vector<double> coefficients, SpaceSpec v_space,
                                             SpaceSpec w_space) {
  require_same_dim(v_space, w_space);
  if (coefficients.empty()) throw ContractError("Nonlinearity::polynomial_scalar: no coefficients");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw ContractError("Nonlinearity::polynomial_scalar: non-finite coefficient");
  PsiForm psi = nemytskii_psi(coefficients, v_space, w_space);
  auto map = [c = coefficients](const Vector& v) -> Vector {
    Vector out = Vector::Constant(v.size(), c.back());
    for (auto it = c.rbegin() + 1; it != c.rend(); ++it) out = (out.array() * v.array() + *it).matrix();
    return out;
  };
  return Nonlinearity(NonlinearityKind::polynomial_scalar, "polynomial_scalar", std::move(map), std::move(psi),
                      std::move(v_space), std::move(w_space));
}

Nonlinearity Nonlinearity::quadratic_riccati(SpaceSpec v_space, SpaceSpec w_space) {
  require_same_dim(v_space, w_space);
  PsiForm psi = nemytskii_psi({0.0, 0.0, 1.0}, v_space, w_space);
  return Nonlinearity(NonlinearityKind::quadratic_riccati, "quadratic_riccati",
                      [](const Vector& v) -> Vector { return v.array().square().matrix(); }, std::move(psi),
                      std::move(v_space), std::move(w_space));
}

Nonlinearity Nonlinearity::cubic_reaction(SpaceSpec v_space, SpaceSpec w_space) {
  require_same_dim(v_space, w_space);
  PsiForm psi = nemytskii_psi({0.0, 1.0, 0.0, -1.0}, v_space, w_space);
  return Nonlinearity(NonlinearityKind::cubic_reaction, "cubic_reaction",
                      [](const Vector& v) -> Vector { return (v.array() - v.array().cube()).matrix(); },
                      std::move(psi), std::move(v_space), std::move(w_space));
}

Nonlinearity Nonlinearity::custom(std::string name, Map map, PsiForm psi, SpaceSpec v_space, SpaceSpec w_space) {
  if (!map) throw ContractError("Nonlinearity::custom: empty evaluator");
  return Nonlinearity(NonlinearityKind::custom, std::move(name), std::move(map), std::move(psi), std::move(v_space),
                      std::move(w_space));
}

StateVector eval_F(const Nonlinearity& f, const StateVector& v) {
  if (v.space() != f.v_space()) throw ContractError("eval_F: vector not in V");
  Vector out = f(v.coords());
  if (out.size() != f.w_space().dim()) throw ContractError("eval_F: evaluator returned wrong dimension");
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i])) throw NumericError("eval_F: non-finite output in component " + std::to_string(i));
  return StateVector(f.w_space(), std::move(out));
}

double lipschitz_modulus(const Nonlinearity& f, double r) {
  if (!(r >= 0.0)) throw DomainError("lipschitz_modulus: r must be >= 0");
  return f.psi()(r);
}

PsiAudit audit_psi(const Nonlinearity& f, double r, int samples, std::uint64_t seed, double tol_audit) {
  if (samples < 1) throw ContractError("audit_psi: samples must be >= 1");
  if (!(r >= 0.0)) throw DomainError("audit_psi: r must be >= 0");
  PsiAudit audit;
  audit.psi = lipschitz_modulus(f, r);
  if (r == 0.0) return audit;  // only v = w = 0, the ratio set is empty

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const int d = f.v_space().dim();

  auto random_direction = [&]() {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = sym(rng);
    const double n = norm(f.v_space(), v);
    return n > 0.0 ? Vector(v / n) : Vector(Vector::Unit(d, 0) / norm(f.v_space(), Vector::Unit(d, 0)));
  };

  for (int s = 0; s < samples; ++s) {
    // Budget near the boundary is where the modulus is largest.
    const double budget = r * (1.0 - 0.5 * unit(rng) * unit(rng));
    const double split = unit(rng);
    Vector v = split * budget * random_direction();
    Vector w;
    if (s % 2 == 0) {
      w = (1.0 - split) * budget * random_direction();
    } else {
      // Nearby pair: probes the local derivative at v.
      const double room = std::max(0.0, r - 2.0 * norm(f.v_space(), v));
      w = v + std::max(room, 1e-6 * r) * 1e-3 * random_direction();
      const double excess = norm(f.v_space(), v) + norm(f.v_space(), w);
      if (excess > r) {
        v *= r / excess;
        w *= r / excess;
      }
    }
    const double dv = norm(f.v_space(), Vector(v - w));
    if (dv == 0.0) continue;
    const Vector fv = f(v), fw = f(w);
    const double df = norm(f.w_space(), Vector(fv - fw));
    const double ratio = df / dv;
    audit.max_observed_ratio = std::max(audit.max_observed_ratio, ratio);
    // f(v) − f(w) cancels for nearby pairs; discount the rounding it can add.
    const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() *
                            ((norm(f.w_space(), fv) + norm(f.w_space(), fw)) / dv + ratio);
    if (ratio - roundoff > audit.psi * (1.0 + tol_audit) + 1e-300) audit.violated = true;
  }
  return audit;
}

}  // namespace mildsolve
