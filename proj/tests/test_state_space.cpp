#include <doctest.h>

#include <random>

#include "mildsolve/state_space.hpp"

using namespace mildsolve;

TEST_CASE("norms of (3,-4)") {
  Vector v(2);
  v << 3.0, -4.0;
  CHECK(norm(SpaceSpec::sup(2), v) == 4.0);
  CHECK(norm(SpaceSpec::euclidean(2), v) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(norm(SpaceSpec::p_norm(2, 1.0), v) == doctest::Approx(7.0).epsilon(1e-15));
  Vector w(2);
  w << 1.0, 4.0;
  CHECK(norm(SpaceSpec::weighted_p(2, 1.0, w), v) == doctest::Approx(19.0).epsilon(1e-15));
}

TEST_CASE("zero vector has norm zero in every space") {
  const Vector z = Vector::Zero(3);
  for (const SpaceSpec& s : {SpaceSpec::sup(3), SpaceSpec::euclidean(3), SpaceSpec::p_norm(3, 3.0),
                             SpaceSpec::weighted_p(3, 1.5, Vector::Constant(3, 2.0))})
    CHECK(norm(s, z) == 0.0);
}

TEST_CASE("dimension mismatch and bad entries are contract errors") {
  CHECK_THROWS_AS(norm(SpaceSpec::sup(3), Vector::Zero(2)), ContractError);
  Vector bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(StateVector(SpaceSpec::sup(2), bad), ContractError);
  CHECK_THROWS(SpaceSpec::p_norm(2, 0.5));
  CHECK_THROWS(SpaceSpec::weighted_p(2, 2.0, Vector::Constant(2, -1.0)));
  CHECK_THROWS(SpaceSpec::sup(0));
}

TEST_CASE("trajectory construction checks the grid") {
  const SpaceSpec s = SpaceSpec::sup(1);
  CHECK_THROWS(Trajectory(s, {0.0, 0.0}, Matrix::Zero(1, 2)));
  CHECK_THROWS(Trajectory(s, {0.0, 1.0}, Matrix::Zero(1, 3)));
  CHECK_THROWS(Trajectory(s, {1.0, 0.5}, Matrix::Zero(1, 2)));
}

TEST_CASE("piecewise-linear evaluation") {
  const SpaceSpec s = SpaceSpec::sup(1);
  const Trajectory x = Trajectory::sample(s, {0.0, 1.0, 3.0}, [](double t) { return Vector::Constant(1, t * t); });
  CHECK(x(0.5)[0] == doctest::Approx(0.5));
  CHECK(x(2.0)[0] == doctest::Approx(5.0));
  const Matrix m = x.at({0.0, 0.5, 2.0, 3.0});
  CHECK(m(0, 1) == doctest::Approx(0.5));
  CHECK(m(0, 2) == doctest::Approx(5.0));
  CHECK(m(0, 3) == 9.0);
  CHECK(x.sup_norm() == 9.0);
}

TEST_CASE("sup_distance examples") {
  const SpaceSpec s = SpaceSpec::sup(1);
  const auto grid = uniform_grid(0.0, 1.0, 11);
  const Trajectory x = Trajectory::sample(s, grid, [](double t) { return Vector::Constant(1, t); });
  const Trajectory y = Trajectory::sample(s, grid, [](double t) { return Vector::Constant(1, 2.0 * t); });
  CHECK(sup_distance(x, x, 100) == 0.0);
  CHECK(sup_distance(x, y, 100) == doctest::Approx(1.0));
  const SpaceSpec e = SpaceSpec::euclidean(2);
  Vector c(2);
  c << 3.0, 4.0;
  CHECK(sup_distance(Trajectory::constant(e, {0.0, 1.0}, Vector::Zero(2)), Trajectory::constant(e, grid, c), 50) ==
        doctest::Approx(5.0));
}

TEST_CASE("sup_distance rejects mismatched intervals") {
  const SpaceSpec s = SpaceSpec::sup(1);
  const Trajectory x = Trajectory::constant(s, {0.0, 1.0}, Vector::Zero(1));
  const Trajectory y = Trajectory::constant(s, {0.0, 2.0}, Vector::Zero(1));
  CHECK_THROWS_AS(sup_distance(x, y, 10), ContractError);
}

namespace {

SpaceSpec random_space(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (rng() % 4) {
    case 0: return SpaceSpec::sup(d);
    case 1: return SpaceSpec::euclidean(d);
    case 2: return SpaceSpec::p_norm(d, 1.0 + 4.0 * u(rng));
    default: {
      Vector w(d);
      for (int i = 0; i < d; ++i) w[i] = 0.1 + 3.0 * u(rng);
      return SpaceSpec::weighted_p(d, 1.0 + 4.0 * u(rng), w);
    }
  }
}

Vector random_vector(std::mt19937_64& rng, int d, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("property: triangle inequality and homogeneity of every norm") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + int(rng() % 6);
    const SpaceSpec s = random_space(rng, d);
    const Vector a = random_vector(rng, d), b = random_vector(rng, d);
    const double c = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
    CHECK(norm(s, Vector(a + b)) <= (norm(s, a) + norm(s, b)) * (1.0 + 1e-12));
    CHECK(norm(s, Vector(c * a)) == doctest::Approx(std::abs(c) * norm(s, a)).epsilon(1e-12));
  }
}

TEST_CASE("property: sup <= euclidean <= sqrt(d) sup") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + int(rng() % 8);
    const Vector v = random_vector(rng, d);
    const double sup = norm(SpaceSpec::sup(d), v), euc = norm(SpaceSpec::euclidean(d), v);
    CHECK(sup <= euc * (1.0 + 1e-15));
    CHECK(euc <= std::sqrt(double(d)) * sup * (1.0 + 1e-15));
  }
}

TEST_CASE("property: equivalence constants bound every sample") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + int(rng() % 5);
    const SpaceSpec a = random_space(rng, d), b = random_space(rng, d);
    const Vector v = random_vector(rng, d);
    CHECK(norm(SpaceSpec::sup(d), v) <= sup_domination(a) * norm(a, v) * (1.0 + 1e-12));
    CHECK(norm(b, v) <= identity_norm(a, b) * norm(a, v) * (1.0 + 1e-12));
  }
}

TEST_CASE("property: operator norm bounds ||Mv||") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + int(rng() % 5);
    const SpaceSpec a = random_space(rng, d), b = random_space(rng, d);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) m.col(i) = random_vector(rng, d, 2.0);
    const double bound = operator_norm(m, a, b);
    for (int k = 0; k < 5; ++k) {
      const Vector v = random_vector(rng, d);
      CHECK(norm(b, Vector(m * v)) <= bound * norm(a, v) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("property: sup_distance is a metric on random paths") {
  std::mt19937_64 rng(15);
  const SpaceSpec s = SpaceSpec::euclidean(2);
  auto random_path = [&]() {
    std::vector<double> grid{0.0};
    while (grid.size() < 2 + rng() % 10) grid.push_back(grid.back() + 0.1 + double(rng() % 100) / 100.0);
    for (double& t : grid) t /= grid.back();
    Matrix vals(2, grid.size());
    for (Eigen::Index j = 0; j < vals.cols(); ++j) vals.col(j) = random_vector(rng, 2);
    return Trajectory(s, grid, vals);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const Trajectory x = random_path(), y = random_path(), z = random_path();
    const double xy = sup_distance(x, y, 64), yz = sup_distance(y, z, 64), xz = sup_distance(x, z, 64);
    CHECK(xz <= xy + yz + 1e-12);
    CHECK(xy == doctest::Approx(sup_distance(y, x, 64)));
    // The merged-grid maximum is exact for PL paths: dense probing cannot beat it.
    CHECK(sup_distance(x, y, 4096) <= xy * (1.0 + 1e-12) + 1e-15);
  }
}
