#include "mildsolve/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mildsolve {

namespace {

// Builds the forcing of the restarted problem at global time t_start.
class RestartForcing {
public:
  RestartForcing(const Kernel& k, const Nonlinearity& f, const Trajectory& o, const QuadratureSpec& q)
      : k_(k), f_(f), o_(o), q_(q) {}

  void first_window() { mode_ = Mode::original; }

  void restart(double t_start, const Vector& x_tau, const Trajectory* history) {
    t_start_ = t_start;
    if (k_.has_splitting()) {
      mode_ = Mode::semigroup;
      x_tau_ = x_tau;
    } else {
      mode_ = Mode::history;
      history_ = history;
    }
  }

  Trajectory sample(const std::vector<double>& grid) const {
    switch (mode_) {
      case Mode::original:
        return Trajectory(o_.space(), grid, o_.at(grid));
      case Mode::semigroup:
        return shifted_forcing(k_, x_tau_, o_, t_start_, grid);
      case Mode::history:
        return history_forcing(k_, f_, *history_, o_, grid, q_);
    }
    throw ContractError("RestartForcing: unknown mode");
  }

private:
  enum class Mode { original, semigroup, history };
  const Kernel& k_;
  const Nonlinearity& f_;
  const Trajectory& o_;
  const QuadratureSpec& q_;
  Mode mode_ = Mode::original;
  double t_start_ = 0.0;
  Vector x_tau_;
  const Trajectory* history_ = nullptr;
};

std::vector<double> probe_grid(double length, int points) {
  return uniform_grid(0.0, length, static_cast<std::size_t>(std::max(points, 2)));
}

bool strictly_increasing_tail(const std::vector<WindowRecord>& w, int k) {
  if (static_cast<int>(w.size()) < k + 1 || k < 1) return false;
  for (std::size_t i = w.size() - static_cast<std::size_t>(k); i < w.size(); ++i)
    if (!(w[i].end_norm > w[i - 1].end_norm)) return false;
  return true;
}

}  // namespace

void SolverConfig::validate() const {
  if (grid_n < 2) throw ContractError("solver.grid_n must be >= 2");
  if (!(tol > 0.0)) throw ContractError("solver.tol must be positive");
  if (max_iter < 1) throw ContractError("solver.max_iter must be >= 1");
  if (!(contraction_target > 0.0 && contraction_target < 1.0))
    throw ContractError("solver.contraction_target must lie in (0,1)");
  if (!(contraction_slack >= 0.0)) throw ContractError("solver.contraction_slack must be >= 0");
  if (!(blowup_threshold > 0.0)) throw ContractError("solver.blowup_threshold must be positive");
  if (tau_min && !(*tau_min > 0.0)) throw ContractError("solver.tau_min must be positive");
  if (!(glue_tol > 0.0)) throw ContractError("solver.glue_tol must be positive");
  if (!(slack >= 0.0)) throw ContractError("solver.slack must be >= 0");
  if (growth_windows < 1) throw ContractError("solver.growth_windows must be >= 1");
  if (!(max_window > 0.0)) throw ContractError("solver.max_window must be positive");
  if (singularity_mesh < 2) throw ContractError("solver.singularity_mesh must be >= 2");
  if (probe_factor < 1) throw ContractError("solver.probe_factor must be >= 1");
}

PicardOptions SolverConfig::picard() const {
  PicardOptions p;
  p.grid_n = grid_n;
  p.tol = tol;
  p.max_iter = max_iter;
  p.tol_ball = tol_ball;
  p.slack = contraction_slack;
  return p;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::ReachedT: return "ReachedT";
    case Outcome::BlowUp: return "BlowUp";
    case Outcome::Stalled: return "Stalled";
  }
  return "unknown";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::reached_horizon: return "reached_horizon";
    case StopReason::norm_threshold: return "norm_threshold";
    case StopReason::window_collapse: return "window_collapse";
    case StopReason::window_limit: return "window_limit";
  }
  return "unknown";
}

Trajectory shifted_forcing(const Kernel& k, const Vector& x_tau, const Trajectory& o, double tau,
                           const std::vector<double>& grid) {
  if (x_tau.size() != k.dim()) throw ContractError("shifted_forcing: x_tau has wrong dimension");
  const Vector jump = x_tau - o(tau);
  std::vector<double> shifted = grid;
  for (double& s : shifted) s += tau;
  Matrix values = extended_path(k, grid, jump) + o.at(shifted);
  if (!values.allFinite()) throw NumericError("shifted_forcing: non-finite value");
  return Trajectory(k.v_space(), grid, std::move(values));
}

Trajectory history_forcing(const Kernel& k, const Nonlinearity& f, const Trajectory& x_history, const Trajectory& o,
                           const std::vector<double>& grid, const QuadratureSpec& q) {
  const Trajectory fx = compose(f, x_history);
  const double tau = x_history.t1();
  return Trajectory::sample(k.v_space(), grid, [&](double t) -> Vector {
    if (tau <= x_history.t0()) return o(tau + t);
    return o(tau + t) + convolve_at(k, fx, tau + t, q);
  });
}

Trajectory glue(const Trajectory& x, const Trajectory& y, double tau, double glue_tol) {
  if (x.space() != y.space()) throw ContractError("glue: trajectories in different spaces");
  if (std::abs(x.t1() - tau) > 1e-12 * std::max(1.0, std::abs(tau)))
    throw ContractError("glue: first trajectory must end at tau");
  if (std::abs(y.t0()) > 0.0) throw ContractError("glue: second trajectory must start at 0");
  const double jump = norm(x.space(), Vector(y.node(0) - x.node(x.size() - 1)));
  if (jump > glue_tol) {
    std::ostringstream os;
    os << "glue: junction mismatch " << jump << " exceeds glue_tol " << glue_tol << " at t=" << tau;
    throw GluingError(os.str());
  }
  std::vector<double> grid = x.grid();
  for (std::size_t i = 1; i < y.size(); ++i) grid.push_back(tau + y.grid()[i]);
  Matrix values(x.space().dim(), static_cast<Eigen::Index>(grid.size()));
  values.leftCols(static_cast<Eigen::Index>(x.size())) = x.values();
  values.rightCols(static_cast<Eigen::Index>(y.size() - 1)) = y.values().rightCols(static_cast<Eigen::Index>(y.size() - 1));
  return Trajectory(x.space(), std::move(grid), std::move(values));
}

SolveReport solve_maximal(const Kernel& k, const Nonlinearity& f, const Trajectory& o, const QuadratureSpec& q,
                          const SolverConfig& cfg, std::string problem_id) {
  cfg.validate();
  q.validate();
  const double T = k.horizon();
  if (o.space() != k.v_space() || f.v_space() != k.v_space() || f.w_space() != k.w_space())
    throw ContractError("solve_maximal: kernel, nonlinearity and forcing spaces disagree");
  if (std::abs(o.t0()) > 0.0 || o.t1() < T * (1.0 - 1e-12))
    throw ContractError("solve_maximal: forcing must be defined on [0, T]");

  SolveReport report;
  report.problem_id = std::move(problem_id);
  report.horizon = T;
  report.M_alpha = singularity_bound(k, cfg.singularity_mesh);
  if (!std::isfinite(report.M_alpha))
    throw UnsoundConfigurationError("solve_maximal: sup t^alpha ||S_t|| is infinite for this kernel and alpha");
  report.F0_norm = norm(k.w_space(), f(Vector::Zero(k.dim())));
  report.semigroup_restart = k.has_splitting();

  const double tau_min = cfg.tau_min_for(T);
  const PicardOptions popts = cfg.picard();
  RestartForcing forcing(k, f, o, q);
  forcing.first_window();

  std::vector<double> grid;
  std::vector<double> values;  // column-major, dim per node
  std::optional<Trajectory> history;  // only kept for kernels without splitting
  double t = 0.0;
  double prev_tau = 0.0;
  Vector x_t = o(0.0);
  report.criterion_trace.push_back({0.0, 1.0 / T + norm(k.v_space(), x_t)});
  report.stop_reason = StopReason::reached_horizon;

  auto flat_matrix = [&]() -> Matrix {
    return Eigen::Map<const Matrix>(values.data(), k.dim(), static_cast<Eigen::Index>(grid.size()));
  };
  auto finish = [&]() {
    if (!grid.empty()) {
      report.global_trajectory = Trajectory(k.v_space(), grid, flat_matrix());
    } else {
      report.global_trajectory = Trajectory(k.v_space(), {0.0}, Matrix(x_t));
    }
    report.t_end = t;
  };

  try {
    while (t < T) {
      if (static_cast<int>(report.windows.size()) >= cfg.max_windows) {
        report.stop_reason = StopReason::window_limit;
        break;
      }
      const double remaining = T - t;
      const bool first = report.windows.empty();

      // Window length: guess, take R as the forcing sup over the guess and
      // shrink until certified. R only decreases as the window shrinks, so the
      // certified length only grows and the loop settles quickly.
      double guess = std::min(remaining, cfg.max_window);
      if (!first) guess = std::min(guess, 4.0 * prev_tau);
      const Trajectory probe = forcing.sample(probe_grid(guess, cfg.probe_factor * cfg.grid_n));
      auto sup_upto = [&](double upto) {
        double m = norm(k.v_space(), probe(upto));
        for (std::size_t i = 0; i < probe.size() && probe.grid()[i] <= upto; ++i)
          m = std::max(m, norm(k.v_space(), probe.node(i)));
        return m;
      };
      auto certify = [&](double r, double len) {
        return certified_window(r, k.alpha(), report.M_alpha, f.psi()(2.0 * r + 2.0), report.F0_norm, len,
                                cfg.contraction_target);
      };
      double R = probe.sup_norm();
      double tau = certify(R, guess);
      for (int pass = 0; pass < 8 && tau < guess; ++pass) {
        guess = tau;
        R = sup_upto(guess);
        tau = certify(R, guess);
      }
      tau = std::min(tau, guess);
      if (remaining - tau <= 1e-12 * T) tau = remaining;

      std::vector<double> local_grid;
      Trajectory o_local = probe;
      bool collapsed = false;
      for (int pass = 0;; ++pass) {
        if (tau < tau_min && tau < remaining) {
          collapsed = true;
          break;
        }
        local_grid = uniform_grid(0.0, tau, static_cast<std::size_t>(cfg.grid_n));
        o_local = forcing.sample(local_grid);
        // The window grid may expose a larger forcing value than the probe.
        const double r_local = o_local.sup_norm();
        if (r_local <= R) break;
        R = r_local;
        const double shorter = certify(R, tau);
        if (shorter >= tau) break;
        if (pass >= 8) throw NumericError("solve_maximal: window certification did not settle at t=" + std::to_string(t));
        tau = shorter;
      }
      if (collapsed) {
        report.stop_reason = StopReason::window_collapse;
        break;
      }
      const WindowCertificate cert =
          make_certificate(t, tau, R, k.alpha(), report.M_alpha, f.psi()(2.0 * R + 2.0), report.F0_norm);

      LocalSolveResult local = solve_local(k, f, o_local, cert, q, popts);

      double jump = 0.0;
      if (!first) {
        jump = norm(k.v_space(), Vector(local.trajectory.node(0) - x_t));
        const double allowed = cfg.glue_tol * std::max(1.0, norm(k.v_space(), x_t));
        if (jump > allowed) {
          std::ostringstream os;
          os << "glue: junction mismatch " << jump << " exceeds " << allowed << " at t=" << t;
          throw GluingError(os.str());
        }
      }
      const std::size_t skip = first ? 0 : 1;
      for (std::size_t i = skip; i < local.trajectory.size(); ++i) {
        grid.push_back(t + local_grid[i]);
        const auto col = local.trajectory.node(i);
        values.insert(values.end(), col.data(), col.data() + col.size());
      }

      const bool last = tau >= remaining;
      t = last ? T : t + tau;
      grid.back() = t;
      prev_tau = tau;
      x_t = local.trajectory.node(local.trajectory.size() - 1);
      const double end_norm = norm(k.v_space(), x_t);

      WindowRecord rec{cert,
                       local.iterations,
                       local.final_update_norm,
                       local.defect,
                       local.max_iterate_norm,
                       local.contraction_ratios,
                       jump,
                       end_norm,
                       std::nullopt,
                       std::nullopt,
                       std::nullopt,
                       std::nullopt,
                       std::nullopt};
      if (cfg.retain_window_paths) {
        rec.local_forcing = std::move(o_local);
        rec.local_solution = std::move(local.trajectory);
      }
      report.windows.push_back(std::move(rec));
      if (t < T) report.criterion_trace.push_back({t, 1.0 / (T - t) + end_norm});

      if (end_norm > cfg.blowup_threshold && t < T) {
        report.stop_reason = StopReason::norm_threshold;
        break;
      }
      if (t < T) {
        if (!k.has_splitting()) {
          history = Trajectory(k.v_space(), grid, flat_matrix());
        }
        forcing.restart(t, x_t, history ? &*history : nullptr);
      }
    }
  } catch (const SolveFailure&) {
    throw;
  } catch (const Error& e) {
    finish();
    report.classification.rationale = std::string("aborted: ") + e.what();
    throw SolveFailure(e, std::make_shared<const SolveReport>(std::move(report)));
  }

  finish();

  const Trajectory& x = *report.global_trajectory;
  if (x.size() <= cfg.global_defect_max_nodes && x.size() >= 2) {
    report.global_defect = sampled_defect(x, k, f, o, q, cfg.global_defect_points);
    report.defect_within_budget = *report.global_defect <= cfg.defect_budget * std::max(1.0, x.sup_norm());
    if (!report.defect_within_budget) report.warnings.push_back("global defect exceeds defect_budget");
  }

  report.classification = classify_outcome(report, cfg);
  return report;
}

Classification classify_outcome(const SolveReport& report, const SolverConfig& cfg) {
  Classification c;
  c.norm_at_stop = report.windows.empty() ? 0.0 : report.windows.back().end_norm;
  std::ostringstream why;

  const int k = cfg.growth_windows;
  auto fit_blowup = [&]() {
    // 1/‖x_t‖ ≈ (t* − t)/c: least squares line through the last k window ends.
    const std::size_t n = std::min<std::size_t>(report.windows.size(), static_cast<std::size_t>(std::max(k, 2)));
    const std::size_t first = report.windows.size() - n;
    // Centered: window ends near a singularity differ only in trailing digits.
    const double t_ref = report.windows.back().certificate.t_start + report.windows.back().certificate.tau;
    double st = 0, sy = 0;
    for (std::size_t i = first; i < report.windows.size(); ++i) {
      const auto& w = report.windows[i];
      st += (w.certificate.t_start + w.certificate.tau) - t_ref;
      sy += 1.0 / w.end_norm;
    }
    const double dn = double(n);
    const double t_mean = st / dn, y_mean = sy / dn;
    double stt = 0, sty = 0;
    for (std::size_t i = first; i < report.windows.size(); ++i) {
      const auto& w = report.windows[i];
      const double dt = (w.certificate.t_start + w.certificate.tau) - t_ref - t_mean;
      stt += dt * dt;
      sty += dt * (1.0 / w.end_norm - y_mean);
    }
    const double last_start = report.windows.back().certificate.t_start;
    if (n >= 2 && stt > 0.0) {
      const double slope = sty / stt;
      if (slope < 0.0) {
        // y = y_mean + slope (t − t_ref − t_mean) vanishes at:
        c.fitted_blowup = t_ref + t_mean - y_mean / slope;
        c.t_estimate = 0.5 * (last_start + c.fitted_blowup);
        return;
      }
    }
    c.fitted_blowup = report.t_end;
    c.t_estimate = report.t_end;
  };

  switch (report.stop_reason) {
    case StopReason::reached_horizon:
      c.outcome = Outcome::ReachedT;
      why << "solution continued to the horizon T=" << report.horizon;
      if (c.norm_at_stop > 0.5 * cfg.blowup_threshold) {
        c.terminal_growth_flag = true;
        why << "; terminal norm " << c.norm_at_stop << " exceeds half the blow-up threshold";
      }
      break;
    case StopReason::norm_threshold:
      c.outcome = Outcome::BlowUp;
      fit_blowup();
      why << "norm " << c.norm_at_stop << " exceeded blow-up threshold " << cfg.blowup_threshold << " at t="
          << report.t_end << "; reciprocal-norm fit places the singularity at " << c.fitted_blowup;
      break;
    case StopReason::window_limit:
      c.outcome = Outcome::Stalled;
      why << "window limit " << cfg.max_windows << " reached at t=" << report.t_end
          << " before the horizon, the norm threshold or window collapse";
      break;
    case StopReason::window_collapse:
      if (strictly_increasing_tail(report.windows, k)) {
        c.outcome = Outcome::BlowUp;
        fit_blowup();
        why << "certified windows collapsed at t=" << report.t_end << " with norms growing over the last " << k
            << " windows; reciprocal-norm fit places the singularity at " << c.fitted_blowup;
      } else {
        c.outcome = Outcome::Stalled;
        why << "certified windows collapsed at t=" << report.t_end << " without sustained norm growth";
      }
      break;
  }
  c.rationale = why.str();
  return c;
}

}  // namespace mildsolve
