#include <doctest.h>

#include "mildsolve/verify.hpp"

using namespace mildsolve;

namespace {

const SpaceSpec s1 = SpaceSpec::sup(1);

struct Window {
  Kernel k;
  Nonlinearity f;
  WindowCertificate cert;
  Trajectory o;
};

Window linear_window(double lambda, double level = 1.0, double T = 1.0) {
  Kernel k(kernel::ScalarExp{-0.5}, KernelSetup{T, 0.5, 0.5, s1, s1});
  Nonlinearity f = Nonlinearity::linear(Matrix::Constant(1, 1, lambda), s1, s1);
  const double M = singularity_bound(k, 64), psi = std::abs(lambda);
  const double tau = certified_window(level, 0.5, M, psi, 0.0, T);
  WindowCertificate cert = make_certificate(0.0, tau, level, 0.5, M, psi, 0.0);
  Trajectory o = Trajectory::constant(s1, uniform_grid(0.0, tau, 64), Vector::Constant(1, level));
  return Window{std::move(k), std::move(f), cert, std::move(o)};
}

}  // namespace

TEST_CASE("check_uniqueness examples") {
  Window w = linear_window(1.0);
  PicardOptions opts;
  opts.tol = 1e-8;
  const UniquenessCheck u = check_uniqueness(w.k, w.f, w.o, w.cert, QuadratureSpec{}, opts);
  CHECK(u.passed);
  CHECK(u.distance <= 1e-7);

  const Nonlinearity zero = Nonlinearity::polynomial_scalar({0.0}, s1, s1);
  const UniquenessCheck z = check_uniqueness(w.k, zero, w.o, w.cert, QuadratureSpec{}, opts);
  CHECK(z.distance == 0.0);
}

TEST_CASE("check_perturbation: identical paths") {
  Window w = linear_window(1.0);
  const Trajectory x = solve_local(w.k, w.f, w.o, w.cert, QuadratureSpec{}, PicardOptions{}).trajectory;
  const PerturbationCertificate c = check_perturbation(x, x, w.k, w.f, 0.5, w.cert.M_alpha, QuadratureSpec{}, 0.0);
  CHECK(c.lhs == 0.0);
  CHECK(c.passed);
}

TEST_CASE("check_perturbation: constant shift of the forcing") {
  Window w = linear_window(1.0);
  const double delta = 1e-3;
  const Trajectory o2(s1, w.o.grid(), (w.o.values().array() + delta).matrix());
  const QuadratureSpec q;
  const Trajectory x1 = solve_local(w.k, w.f, o2, w.cert, q, PicardOptions{}).trajectory;
  const Trajectory x2 = solve_local(w.k, w.f, w.o, w.cert, q, PicardOptions{}).trajectory;
  const double slack = 2.0 * estimate_quadrature_error(w.k, compose(w.f, x1), q);
  const PerturbationCertificate c = check_perturbation(x1, x2, w.k, w.f, 0.5, w.cert.M_alpha, q, slack);
  CHECK(c.defect_sup == doctest::Approx(delta).epsilon(1e-6));
  CHECK(c.lhs >= delta);
  CHECK(c.passed);
  CHECK(c.margin > 0.0);
}

TEST_CASE("check_perturbation: adversarial ramp still satisfies the inequality") {
  Window w = linear_window(1.0);
  const Trajectory x1 = solve_local(w.k, w.f, w.o, w.cert, QuadratureSpec{}, PicardOptions{}).trajectory;
  Matrix ramp = x1.values();
  for (std::size_t i = 0; i < x1.size(); ++i) ramp(0, Eigen::Index(i)) += 5.0 * x1.grid()[i];
  const Trajectory x2(s1, x1.grid(), ramp);
  const PerturbationCertificate c = check_perturbation(x1, x2, w.k, w.f, 0.5, w.cert.M_alpha, QuadratureSpec{}, 0.0);
  CHECK(c.passed);
  CHECK(c.bound >= c.lhs);
}

TEST_CASE("refinement_continuity_check examples") {
  const QuadratureSpec q;
  const Kernel id(kernel::Identity{}, KernelSetup{1.0, 0.6, 0.5, s1, s1});
  const Trajectory zero = Trajectory::constant(s1, uniform_grid(0.0, 1.0, 9), Vector::Zero(1));
  const ContinuityCheck z = refinement_continuity_check(id, zero, 3, q);
  for (double m : z.moduli) CHECK(m == 0.0);
  CHECK(z.passed);

  const Trajectory smooth =
      Trajectory::sample(s1, uniform_grid(0.0, 1.0, 65), [](double t) { return Vector::Constant(1, std::cos(t)); });
  const ContinuityCheck lip = refinement_continuity_check(id, smooth, 5, q);
  CHECK(lip.passed);
  for (double e : lip.exponents) CHECK(e == doctest::Approx(1.0).epsilon(0.05));

  const Kernel sing(kernel::Identity{}, KernelSetup{1.0, 0.6, 0.5, s1, s1}, 0.5);
  const Trajectory one = Trajectory::constant(s1, uniform_grid(0.0, 1.0, 9), Vector::Ones(1));
  const ContinuityCheck half = refinement_continuity_check(sing, one, 8, q);
  CHECK(half.passed);
  for (double e : half.exponents) CHECK(e == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("certify_report fills every window and is deterministic") {
  const Kernel k(kernel::ScalarExp{-1.0}, KernelSetup{0.5, 0.5, 0.5, s1, s1});
  const Nonlinearity f = Nonlinearity::cubic_reaction(s1, s1);
  const Trajectory o = Trajectory::constant(s1, {0.0, 0.5}, Vector::Constant(1, 0.8));
  SolverConfig cfg;
  SolveReport a = solve_maximal(k, f, o, QuadratureSpec{}, cfg);
  SolveReport b = solve_maximal(k, f, o, QuadratureSpec{}, cfg);
  certify_report(a, k, f, QuadratureSpec{}, cfg);
  certify_report(b, k, f, QuadratureSpec{}, cfg);
  CHECK(certificates_passed(a));
  REQUIRE(a.windows.size() == b.windows.size());
  for (std::size_t i = 0; i < a.windows.size(); ++i) {
    REQUIRE(a.windows[i].uniqueness);
    REQUIRE(a.windows[i].perturbation);
    REQUIRE(a.windows[i].accuracy);
    CHECK(a.windows[i].perturbation->bound == b.windows[i].perturbation->bound);
    CHECK(a.windows[i].uniqueness->distance == b.windows[i].uniqueness->distance);
  }
}

TEST_CASE("certify_report needs retained window paths") {
  const Kernel k(kernel::ScalarExp{-1.0}, KernelSetup{0.5, 0.5, 0.5, s1, s1});
  const Nonlinearity f = Nonlinearity::cubic_reaction(s1, s1);
  const Trajectory o = Trajectory::constant(s1, {0.0, 0.5}, Vector::Constant(1, 0.8));
  SolverConfig cfg;
  cfg.retain_window_paths = false;
  SolveReport r = solve_maximal(k, f, o, QuadratureSpec{}, cfg);
  CHECK_THROWS_AS(certify_report(r, k, f, QuadratureSpec{}, cfg), ContractError);
}
