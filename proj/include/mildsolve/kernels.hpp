#ifndef MILDSOLVE_KERNELS_HPP
#define MILDSOLVE_KERNELS_HPP

#include <string>
#include <variant>

#include "mildsolve/state_space.hpp"

namespace mildsolve {

// A linear map on R^d kept in the cheapest exact form: c·I, diag(d) or dense.
class LinearOp {
public:
  enum class Form { scalar, diagonal, dense };

  static LinearOp scalar(double c, int dim);
  static LinearOp diagonal(Vector d);
  static LinearOp dense(Matrix m);

  Form form() const { return form_; }
  int dim() const { return dim_; }
  // Entry (k,k) of a scalar or diagonal operator.
  double diagonal_entry(int k) const { return form_ == Form::scalar ? scalar_ : diagonal_[k]; }

  Vector apply(const Vector& v) const;
  Matrix to_dense() const;
  bool all_finite() const;

  // acc += w · (this · y)
  template <typename Derived>
  void accumulate(double w, const Eigen::MatrixBase<Derived>& y, Vector& acc) const {
    switch (form_) {
      case Form::scalar: acc += (w * scalar_) * y; break;
      case Form::diagonal: acc += w * diagonal_.cwiseProduct(y); break;
      case Form::dense: acc.noalias() += w * (dense_ * y); break;
    }
  }

  LinearOp scaled(double c) const;
  // this += w · other, promoting the storage form when needed.
  void add_scaled(double w, const LinearOp& other);
  friend LinearOp operator-(const LinearOp& a, const LinearOp& b);

  // ‖·‖_{L(from,to)}; exact for scalar/diagonal, see operator_norm for dense.
  double norm(const SpaceSpec& from, const SpaceSpec& to) const;

private:
  Form form_ = Form::scalar;
  int dim_ = 0;
  double scalar_ = 0.0;
  Vector diagonal_;
  Matrix dense_;
};

namespace kernel {
struct Identity {};
// S_t = e^{λ t} I
struct ScalarExp { double lambda; };
// S_t = diag(e^{-λ_k t}), the spectral heat semigroup
struct DiagonalExp { Vector lambdas; };
// S_t = e^{tA}
struct MatrixExp { Matrix a; };
}  // namespace kernel

using KernelBase = std::variant<kernel::Identity, kernel::ScalarExp, kernel::DiagonalExp, kernel::MatrixExp>;

struct KernelSetup {
  double horizon;   // T
  double alpha;     // singularity exponent used in sup t^α ‖S_t‖
  double rho;       // Hölder exponent
  SpaceSpec v_space;
  SpaceSpec w_space;
};

// The pair (S, 𝒮): S_t = t^{-α₀} B_t on (0,T] and 𝒮_t = B_t on [0,T], where B
// is one of the semigroups above and α₀ = 0 unless the kernel is
// singular_scaled. For α₀ = 0 the splitting S_{t1+t2} = 𝒮_{t1} S_{t2} holds.
class Kernel {
public:
  Kernel(KernelBase base, KernelSetup setup, double singular_exponent = 0.0);

  const KernelBase& base() const { return base_; }
  double horizon() const { return setup_.horizon; }
  double alpha() const { return setup_.alpha; }
  double rho() const { return setup_.rho; }
  const SpaceSpec& v_space() const { return setup_.v_space; }
  const SpaceSpec& w_space() const { return setup_.w_space; }
  int dim() const { return setup_.v_space.dim(); }

  double singular_exponent() const { return singular_exponent_; }
  bool has_splitting() const { return singular_exponent_ == 0.0; }

  // B_lag for lag in [0,T]; the bounded factor used by product quadrature.
  LinearOp regular_part(double lag) const;
  // S_t, t in (0,T]
  LinearOp at(double t) const;
  // 𝒮_t, t in [0,T]; 𝒮_0 = I
  LinearOp extended(double t) const;

  std::string describe() const;

private:
  KernelBase base_;
  KernelSetup setup_;
  double singular_exponent_;
};

StateVector apply_kernel(const Kernel& k, double t, const StateVector& w);
StateVector apply_extended(const Kernel& k, double t, const StateVector& v);
// Columns 𝒮_{t_i} v for each t_i in times.
Matrix extended_path(const Kernel& k, const std::vector<double>& times, const Vector& v);

// sup_{t∈(0,T)} t^α ‖S_t‖_{L(W,V)}. Exact for identity / scalar / diagonal
// bases (with or without the singular factor); otherwise the maximum over a
// geometric mesh T·2^{-j} (j ≤ mesh) merged with the uniform points T·i/mesh.
// Returns +inf when the supremum diverges (α < α₀).
double singularity_bound(const Kernel& k, int mesh);

struct HolderEstimate {
  double c_rho = 0.0;       // estimate at 2·mesh
  double coarse = 0.0;      // estimate at mesh
  bool diverging = false;   // c_rho / coarse above the allowed factor
};

// sup_{0<s<u<T} s^α ‖S_u − S_s‖ / (u−s)^ρ over mesh pairs.
HolderEstimate holder_modulus(const Kernel& k, int mesh, double divergence_factor = 2.0);

}  // namespace mildsolve

#endif  // MILDSOLVE_KERNELS_HPP
