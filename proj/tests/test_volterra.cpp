#include <doctest.h>

#include <random>

#include "mildsolve/volterra.hpp"

using namespace mildsolve;

namespace {

const SpaceSpec s1 = SpaceSpec::sup(1);

Kernel make(KernelBase b, double T = 1.0, double alpha = 0.5, double alpha0 = 0.0, const SpaceSpec& s = s1) {
  return Kernel(std::move(b), KernelSetup{T, alpha, 0.5, s, s}, alpha0);
}

Trajectory ones(std::size_t n, double T = 1.0) { return Trajectory::constant(s1, uniform_grid(0.0, T, n), Vector::Ones(1)); }

}  // namespace

TEST_CASE("convolve examples") {
  const QuadratureSpec q;
  const Trajectory c = Trajectory::constant(s1, uniform_grid(0.0, 0.7, 9), Vector::Constant(1, 3.0));
  CHECK(convolve(make(kernel::Identity{}), c, q)[0] == doctest::Approx(2.1).epsilon(1e-14));
  CHECK(convolve(make(kernel::ScalarExp{-1.0}), ones(33), q)[0] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-4));
  CHECK(convolve(make(kernel::Identity{}, 1.0, 0.5, 0.5), ones(17), q)[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("convolution_path examples") {
  const QuadratureSpec q;
  const Kernel id = make(kernel::Identity{});
  const Trajectory zero = Trajectory::constant(s1, uniform_grid(0.0, 1.0, 9), Vector::Zero(1));
  CHECK(convolution_path(id, zero, q).values().cwiseAbs().maxCoeff() == 0.0);
  const Trajectory ramp = Trajectory::sample(s1, uniform_grid(0.0, 1.0, 17), [](double t) { return Vector::Constant(1, t); });
  const Trajectory p = convolution_path(id, ramp, q);
  CHECK(p.node(0)[0] == 0.0);
  CHECK(p.node(p.size() - 1)[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p(0.5)[0] == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("plan and direct convolution agree, uniform and non-uniform") {
  const SpaceSpec s = SpaceSpec::sup(2);
  Matrix a(2, 2);
  a << -1.0, 0.5, 0.2, -3.0;
  Vector l(2);
  l << 1.0, 9.0;
  const Kernel kernels[] = {make(kernel::MatrixExp{a}, 1.0, 0.5, 0.0, s), make(kernel::DiagonalExp{l}, 1.0, 0.5, 0.0, s),
                            make(kernel::DiagonalExp{l}, 1.0, 0.6, 0.5, s)};
  auto fn = [](double t) { return Vector((Vector(2) << std::sin(3 * t), t * t).finished()); };
  std::vector<double> nonuniform{0.0, 0.05, 0.1, 0.3, 0.35, 0.7, 1.0};
  for (const Kernel& k : kernels)
    for (const auto& grid : {uniform_grid(0.0, 1.0, 33), nonuniform}) {
      const Trajectory y = Trajectory::sample(s, grid, fn);
      const Trajectory path = ConvolutionPlan(k, grid, QuadratureSpec{}).apply(y);
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const Trajectory head = Trajectory::sample(s, std::vector<double>(grid.begin(), grid.begin() + i + 1), fn);
        CHECK((path.node(i) - convolve(k, head, QuadratureSpec{})).cwiseAbs().maxCoeff() <= 1e-13);
      }
    }
}

TEST_CASE("product_trapezoid converges at second order on a smooth problem") {
  const Kernel k = make(kernel::ScalarExp{-1.0});
  // ∫_0^1 e^{-(1-s)} sin(s) ds
  const double exact = 0.5 * (std::sin(1.0) - std::cos(1.0) + std::exp(-1.0));
  double prev = 0.0;
  for (int n = 8; n <= 128; n *= 2) {
    const Trajectory y =
        Trajectory::sample(s1, uniform_grid(0.0, 1.0, n + 1), [](double t) { return Vector::Constant(1, std::sin(t)); });
    const double err = std::abs(convolve(k, y, QuadratureSpec{})[0] - exact);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("gauss_jacobi_unit integrates x^b p(x) exactly") {
  for (double b : {-0.5, -0.3, 0.0, 0.7}) {
    const auto [x, w] = gauss_jacobi_unit(6, b);
    for (int deg = 0; deg <= 11; ++deg) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) sum += w[i] * std::pow(x[i], deg);
      CHECK(sum == doctest::Approx(1.0 / (deg + b + 1.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("both singular panel rules match a smooth-substitution oracle") {
  // ∫_0^1 (1−s)^{-1/2} e^{-2(1−s)} (1+s) ds with s = 1 − u² becomes
  // ∫_0^1 2 e^{-2u²}(2 − u²) du, integrated by composite Simpson.
  const int n = 2000;
  auto g = [](double u) { return 2.0 * std::exp(-2.0 * u * u) * (2.0 - u * u); };
  double simpson = g(0.0) + g(1.0);
  for (int i = 1; i < n; ++i) simpson += (i % 2 ? 4.0 : 2.0) * g(double(i) / n);
  simpson /= 3.0 * n;

  QuadratureSpec analytic, jacobi;
  jacobi.singular_panel = SingularPanelRule::gauss_jacobi;
  const Kernel k = make(kernel::ScalarExp{-2.0}, 1.0, 0.6, 0.5);
  const Trajectory y = Trajectory::sample(s1, uniform_grid(0.0, 1.0, 33), [](double t) { return Vector::Constant(1, 1 + t); });
  CHECK(convolve(k, y, analytic)[0] == doctest::Approx(simpson).epsilon(5e-5));
  CHECK(convolve(k, y, jacobi)[0] == doctest::Approx(simpson).epsilon(5e-5));
}

TEST_CASE("defect examples") {
  const QuadratureSpec q;
  const Kernel k = make(kernel::ScalarExp{-1.0});
  const Nonlinearity zero = Nonlinearity::polynomial_scalar({0.0}, s1, s1);
  const Trajectory o = Trajectory::sample(s1, uniform_grid(0.0, 1.0, 17), [](double t) { return Vector::Constant(1, std::cos(t)); });
  CHECK(defect(o, k, zero, o, q) == 0.0);
  const Trajectory shifted(s1, o.grid(), (o.values().array() + 1.0).matrix());
  CHECK(defect(shifted, k, zero, o, q) == doctest::Approx(1.0));

  // x' = λx, x(0)=1 with identity kernel: x = e^{λt}
  const Kernel id = make(kernel::Identity{});
  const Nonlinearity lin = Nonlinearity::linear(Matrix::Constant(1, 1, 0.7), s1, s1);
  const Trajectory exact =
      Trajectory::sample(s1, uniform_grid(0.0, 1.0, 257), [](double t) { return Vector::Constant(1, std::exp(0.7 * t)); });
  const Trajectory one = Trajectory::constant(s1, exact.grid(), Vector::Ones(1));
  const double d = defect(exact, id, lin, one, q);
  CHECK(d <= 2.0 * estimate_quadrature_error(id, compose(lin, exact), q) + 1e-12);
  CHECK(d < 1e-5);
  CHECK(sampled_defect(exact, id, lin, one, q, 16) <= d * (1.0 + 1e-12));
}

TEST_CASE("property: convolve is linear") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const SpaceSpec s = SpaceSpec::euclidean(2);
  Matrix a(2, 2);
  a << -1.0, 2.0, 0.0, -0.5;
  const Kernel kernels[] = {make(kernel::MatrixExp{a}, 1.0, 0.5, 0.0, s),
                            make(kernel::Identity{}, 1.0, 0.5, 0.3, s)};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 20;
    Matrix yv(2, n), zv(2, n);
    for (std::size_t j = 0; j < n; ++j) yv.col(j) << c(rng), c(rng), zv.col(j) << c(rng), c(rng);
    const auto grid = uniform_grid(0.0, 1.0, n);
    const double p = c(rng), r = c(rng);
    const Trajectory y(s, grid, yv), z(s, grid, zv), mix(s, grid, p * yv + r * zv);
    for (const Kernel& k : kernels) {
      const Vector lhs = convolve(k, mix, QuadratureSpec{});
      const Vector rhs = p * convolve(k, y, QuadratureSpec{}) + r * convolve(k, z, QuadratureSpec{});
      CHECK((lhs - rhs).norm() <= 1e-13);
    }
  }
}
