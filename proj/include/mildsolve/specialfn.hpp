#ifndef MILDSOLVE_SPECIALFN_HPP
#define MILDSOLVE_SPECIALFN_HPP

#include <cmath>
#include <string>

#include "mildsolve/errors.hpp"

namespace mildsolve {

template <typename Scalar>
Scalar gamma(Scalar x) {
  if (!(x > Scalar(0))) throw DomainError("gamma: argument must be positive");
  using std::tgamma;
  return tgamma(x);
}

template <typename Scalar>
struct MLParams {
  Scalar r;
  Scalar x;
  Scalar series_tol = Scalar(1e-14);
  int max_terms = 10000;
};

// 𝔈_r[x] = Σ_{n≥0} (x Γ(r))^n / Γ(nr+1), a Mittag-Leffler-type series.
// Terms are formed in log space so Γ(nr+1) never overflows; summation stops
// once term/partial_sum drops below series_tol.
template <typename Scalar>
Scalar ml_gronwall(const MLParams<Scalar>& p) {
  using std::exp;
  using std::isfinite;
  using std::lgamma;
  using std::log;
  if (!(p.r > Scalar(0) && p.r <= Scalar(1))) throw DomainError("ml_gronwall: r must lie in (0,1]");
  if (!(p.x >= Scalar(0)) || !isfinite(p.x)) throw DomainError("ml_gronwall: x must be finite and >= 0");
  if (p.x == Scalar(0)) return Scalar(1);

  const Scalar log_base = log(p.x) + lgamma(p.r);  // log(x Γ(r))
  Scalar sum(1);
  Scalar term(1);
  bool past_peak = false;
  Scalar previous(1);
  for (int n = 1; n < p.max_terms; ++n) {
    term = exp(Scalar(n) * log_base - lgamma(Scalar(n) * p.r + Scalar(1)));
    sum += term;
    if (!isfinite(sum)) throw ConvergenceError("ml_gronwall: partial sum overflowed", double(sum), double(term));
    if (term < previous) past_peak = true;
    previous = term;
    if (past_peak && term <= p.series_tol * sum) return sum;
  }
  throw ConvergenceError("ml_gronwall: no convergence within " + std::to_string(p.max_terms) + " terms",
                         double(sum), double(term));
}

// 𝔈_{1−α}[T^{1−α} · M_α · Ψ(sup(‖x¹‖+‖x²‖))] · sup‖x¹ − Φx¹ + Φx² − x²‖
template <typename Scalar>
Scalar perturbation_bound(Scalar alpha, Scalar horizon, Scalar m_alpha, Scalar psi_at_sum, Scalar defect_sup) {
  using std::isfinite;
  using std::pow;
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) throw DomainError("perturbation_bound: alpha must lie in (0,1)");
  if (!(horizon > Scalar(0)) || !(m_alpha >= Scalar(0)) || !(psi_at_sum >= Scalar(0)) || !(defect_sup >= Scalar(0)) ||
      !isfinite(horizon) || !isfinite(m_alpha) || !isfinite(psi_at_sum) || !isfinite(defect_sup))
    throw DomainError("perturbation_bound: arguments must be finite and nonnegative");
  const Scalar r = Scalar(1) - alpha;
  MLParams<Scalar> p{r, pow(horizon, r) * m_alpha * psi_at_sum};
  return ml_gronwall(p) * defect_sup;
}

}  // namespace mildsolve

#endif  // MILDSOLVE_SPECIALFN_HPP
