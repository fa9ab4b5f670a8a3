#include <doctest.h>

#include "mildsolve/continuation.hpp"

using namespace mildsolve;

namespace {

const SpaceSpec s1 = SpaceSpec::sup(1);

Kernel make(KernelBase b, double T, double alpha = 0.5) { return Kernel(std::move(b), KernelSetup{T, alpha, 0.5, s1, s1}); }

Nonlinearity zero_f() { return Nonlinearity::polynomial_scalar({0.0}, s1, s1); }

SolveReport report_with(double t_end, double T, std::vector<double> end_norms, StopReason reason) {
  SolveReport r;
  r.horizon = T;
  r.t_end = t_end;
  r.stop_reason = reason;
  double t = 0.0;
  for (double n : end_norms) {
    WindowRecord w;
    t += 0.01;
    w.certificate.t_start = t;
    w.certificate.tau = 0.01;
    w.end_norm = n;
    r.windows.push_back(w);
    r.criterion_trace.push_back({t, 1.0 / (T - t) + n});
  }
  return r;
}

}  // namespace

TEST_CASE("shifted_forcing examples") {
  const Kernel e = make(kernel::ScalarExp{-1.0}, 2.0);
  const auto grid = uniform_grid(0.0, 1.0, 11);
  const Trajectory zero = Trajectory::constant(s1, {0.0, 2.0}, Vector::Zero(1));
  CHECK(shifted_forcing(e, Vector::Constant(1, 2.0), zero, 0.5, grid)(1.0)[0] ==
        doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));

  const Kernel id = make(kernel::Identity{}, 2.0);
  const Trajectory s = shifted_forcing(id, Vector::Constant(1, 3.0), zero, 0.5, grid);
  CHECK((s.values().array() == 3.0).all());

  const Trajectory o = Trajectory::sample(s1, uniform_grid(0.0, 2.0, 41), [](double t) { return Vector::Constant(1, std::sin(t)); });
  const Trajectory same = shifted_forcing(e, o(0.5), o, 0.5, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(same.node(i)[0] == doctest::Approx(o(0.5 + grid[i])[0]).epsilon(1e-14));
}

TEST_CASE("history_forcing equals shifted_forcing when the kernel splits") {
  const Kernel e = make(kernel::ScalarExp{-0.7}, 2.0);
  const Nonlinearity f = Nonlinearity::quadratic_riccati(s1, s1);
  const Trajectory o = Trajectory::sample(s1, uniform_grid(0.0, 2.0, 201), [](double t) { return Vector::Constant(1, 0.3 + 0.1 * t); });
  const auto hist_grid = uniform_grid(0.0, 0.5, 51);
  const Trajectory x = Trajectory::sample(s1, hist_grid, [](double t) { return Vector::Constant(1, 0.3 + t); });
  // x_tau chosen so that the two forms describe the same restart
  const QuadratureSpec q;
  const Vector conv = convolve(e, compose(f, x), q);
  const Vector x_tau = o(0.5) + conv;
  const auto grid = uniform_grid(0.0, 0.5, 11);
  const Trajectory a = shifted_forcing(e, x_tau, o, 0.5, grid);
  const Trajectory b = history_forcing(e, f, x, o, grid, q);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("glue examples") {
  const Trajectory c1 = Trajectory::constant(s1, uniform_grid(0.0, 0.4, 5), Vector::Constant(1, 2.0));
  const Trajectory c2 = Trajectory::constant(s1, uniform_grid(0.0, 0.6, 7), Vector::Constant(1, 2.0));
  const Trajectory g = glue(c1, c2, 0.4, 1e-6);
  CHECK(g.t1() == doctest::Approx(1.0));
  CHECK(g.size() == 11);
  CHECK((g.values().array() == 2.0).all());

  const Trajectory x = Trajectory::sample(s1, uniform_grid(0.0, 1.0, 5), [](double t) { return Vector::Constant(1, t); });
  const Trajectory y = Trajectory::sample(s1, uniform_grid(0.0, 1.0, 5), [](double t) { return Vector::Constant(1, 1 + t); });
  const Trajectory line = glue(x, y, 1.0, 1e-6);
  for (std::size_t i = 0; i < line.size(); ++i) CHECK(line.node(i)[0] == doctest::Approx(line.grid()[i]));

  const Trajectory off = Trajectory::sample(s1, uniform_grid(0.0, 1.0, 5), [](double t) { return Vector::Constant(1, 1 + 1e-5 + t); });
  CHECK_THROWS_AS(glue(x, off, 1.0, 1e-6), GluingError);
}

TEST_CASE("solve_maximal with F = 0 returns the forcing") {
  const Trajectory o = Trajectory::constant(s1, {0.0, 1.0}, Vector::Constant(1, 0.25));
  const SolveReport r = solve_maximal(make(kernel::ScalarExp{-1.0}, 1.0), zero_f(), o, QuadratureSpec{}, SolverConfig{});
  CHECK(r.classification.outcome == Outcome::ReachedT);
  CHECK(r.t_end == 1.0);
  CHECK((r.global_trajectory->values().array() == 0.25).all());
}

TEST_CASE("solve_maximal matches variation of constants for a decaying kernel") {
  // x_t = ∫ e^{-(t-s)} ds + e^{-t}  =  1 for a constant source 1 and x_0 = 1
  // with o_t = e^{-t}·1 + (1 − e^{-t}) expressed through F ≡ 1.
  const Kernel e = make(kernel::ScalarExp{-1.0}, 1.0);
  const Nonlinearity one = Nonlinearity::polynomial_scalar({1.0}, s1, s1);
  const Trajectory o = Trajectory::sample(s1, uniform_grid(0.0, 1.0, 1001), [](double t) { return Vector::Constant(1, 2.0 * std::exp(-t)); });
  const SolveReport r = solve_maximal(e, one, o, QuadratureSpec{}, SolverConfig{});
  CHECK(r.classification.outcome == Outcome::ReachedT);
  const Trajectory& x = *r.global_trajectory;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = x.grid()[i];
    CHECK(x.node(i)[0] == doctest::Approx(1.0 + std::exp(-t)).epsilon(1e-6));
  }
}

TEST_CASE("windows tile the interval and junctions are continuous") {
  const Kernel e = make(kernel::ScalarExp{-0.5}, 1.0);
  const Nonlinearity f = Nonlinearity::cubic_reaction(s1, s1);
  const Trajectory o = Trajectory::constant(s1, {0.0, 1.0}, Vector::Constant(1, 1.5));
  SolverConfig cfg;
  cfg.max_window = 0.1;
  cfg.global_defect_max_nodes = 1000000;
  const SolveReport r = solve_maximal(e, f, o, QuadratureSpec{}, cfg);
  REQUIRE(r.windows.size() >= 10);
  double t = 0.0;
  for (const auto& w : r.windows) {
    CHECK(w.certificate.t_start == doctest::Approx(t).epsilon(1e-14));
    t += w.certificate.tau;
    CHECK(w.junction_jump <= cfg.glue_tol);
  }
  CHECK(t == doctest::Approx(1.0).epsilon(1e-14));
  REQUIRE(r.global_defect);
  CHECK(*r.global_defect <= cfg.defect_budget);
}

TEST_CASE("Riccati blows up near t = 1") {
  const Kernel id = make(kernel::Identity{}, 2.0, 0.01);
  const Trajectory o = Trajectory::constant(s1, {0.0, 2.0}, Vector::Ones(1));
  SolverConfig cfg;
  cfg.tau_min = 1e-7;
  const SolveReport r = solve_maximal(id, Nonlinearity::quadratic_riccati(s1, s1), o, QuadratureSpec{}, cfg);
  CHECK(r.classification.outcome == Outcome::BlowUp);
  CHECK(r.classification.t_estimate >= 0.95);
  CHECK(r.classification.t_estimate < 1.0);
  CHECK(r.t_end < 1.0);
}

TEST_CASE("classify_outcome examples") {
  SolverConfig cfg;
  const SolveReport reached = report_with(1.0, 1.0, {1.0, 1.0}, StopReason::reached_horizon);
  CHECK(classify_outcome(reached, cfg).outcome == Outcome::ReachedT);

  const SolveReport flat = report_with(0.5, 1.0, {1, 1, 1, 1, 1, 1, 1}, StopReason::window_collapse);
  CHECK(classify_outcome(flat, cfg).outcome == Outcome::Stalled);

  std::vector<double> growing;
  for (int i = 1; i <= 10; ++i) growing.push_back(1.0 / (0.2 - 0.01 * i + 1e-3));
  const Classification c = classify_outcome(report_with(0.1, 1.0, growing, StopReason::window_collapse), cfg);
  CHECK(c.outcome == Outcome::BlowUp);
  CHECK(!c.rationale.empty());

  SolveReport big = report_with(1.0, 1.0, {1.0, 0.9 * cfg.blowup_threshold}, StopReason::reached_horizon);
  CHECK(classify_outcome(big, cfg).terminal_growth_flag);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.grid_n = 1;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = SolverConfig{};
  cfg.max_window = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
}
