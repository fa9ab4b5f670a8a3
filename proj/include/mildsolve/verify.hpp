#ifndef MILDSOLVE_VERIFY_HPP
#define MILDSOLVE_VERIFY_HPP

#include <vector>

#include "mildsolve/continuation.hpp"

namespace mildsolve {

// Solves the window from x₀ = o_local and from x₀ = 0; the fixed point in the
// ball is unique, so both must agree to 10·tol (tol scaled as in solve_local).
UniquenessCheck check_uniqueness(const Kernel& k, const Nonlinearity& f, const Trajectory& o_local,
                                 const WindowCertificate& cert, const QuadratureSpec& q, const PicardOptions& opts);

// sup‖x¹−x²‖ against 𝔈_{1−α}[T^{1−α} M_α Ψ(sup(‖x¹‖+‖x²‖))] · sup‖x¹ − Φ₀x¹ + Φ₀x² − x²‖,
// Φ₀ being the convolution part of the Picard map. x¹, x² share a grid
// starting at 0.
PerturbationCertificate check_perturbation(const Trajectory& x1, const Trajectory& x2, const Kernel& k,
                                           const Nonlinearity& f, double alpha, double M_alpha,
                                           const QuadratureSpec& q, double slack);

struct ContinuityCheck {
  std::vector<double> moduli;     // max adjacent-node jump per level
  std::vector<double> exponents;  // log2(moduli[j] / moduli[j+1])
  bool passed = false;
};

// Convolution paths of y on dyadically refined uniform grids (base_panels·2^j
// panels); passes when moduli do not grow by more than 1.5× per level and the
// finest modulus is at most continuity_tol.
ContinuityCheck refinement_continuity_check(const Kernel& k, const Trajectory& y, int levels,
                                            const QuadratureSpec& q, int base_panels = 8,
                                            double continuity_tol = 0.1);

// Fills uniqueness / perturbation / accuracy certificates on every window.
void certify_report(SolveReport& report, const Kernel& k, const Nonlinearity& f, const QuadratureSpec& q,
                    const SolverConfig& cfg);

bool certificates_passed(const SolveReport& report);

}  // namespace mildsolve

#endif  // MILDSOLVE_VERIFY_HPP
