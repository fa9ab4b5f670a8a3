#ifndef MILDSOLVE_CONTINUATION_HPP
#define MILDSOLVE_CONTINUATION_HPP

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mildsolve/kernels.hpp"
#include "mildsolve/nonlinear.hpp"
#include "mildsolve/picard.hpp"
#include "mildsolve/state_space.hpp"
#include "mildsolve/volterra.hpp"

namespace mildsolve {

struct SolverConfig {
  int grid_n = 64;
  double tol = 1e-10;
  int max_iter = 200;
  double contraction_target = 0.5;
  double contraction_slack = 0.1;  // measured Picard ratio may exceed the bound by this much
  double tol_ball = 1e-8;
  double blowup_threshold = 1e8;
  std::optional<double> tau_min;   // default 1e-10 · T
  double glue_tol = 1e-6;          // relative to max(1, ‖x_τ‖)
  double slack = 1e-8;             // certificate slack floor
  int growth_windows = 5;
  double max_window = std::numeric_limits<double>::infinity();
  int singularity_mesh = 64;
  int probe_factor = 4;            // forcing probe density relative to grid_n
  double defect_budget = 1e-4;     // relative to max(1, sup‖x‖)
  std::size_t global_defect_max_nodes = 20000;
  std::size_t global_defect_points = 64;  // nodes at which the global defect is evaluated
  int max_windows = 1000000;
  bool retain_window_paths = true;  // needed by certify_report

  void validate() const;
  double tau_min_for(double horizon) const { return tau_min ? *tau_min : 1e-10 * horizon; }
  PicardOptions picard() const;
};

enum class Outcome { ReachedT, BlowUp, Stalled };
enum class StopReason { reached_horizon, norm_threshold, window_collapse, window_limit };

std::string to_string(Outcome o);
std::string to_string(StopReason r);

struct UniquenessCheck {
  double distance = 0.0;
  bool passed = false;
};

// Both sides of the Mittag-Leffler–Gronwall perturbation estimate.
struct PerturbationCertificate {
  double lhs = 0.0;
  double defect_sup = 0.0;
  double psi_at_sum = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double margin = 0.0;
  bool passed = false;
};

// error_bound = perturbation bound of the computed window against a tighter
// reference; passes when it is within slack.
struct AccuracyCertificate {
  double error_bound = 0.0;
  double slack = 0.0;
  bool passed = false;
};

struct WindowRecord {
  WindowCertificate certificate;
  int iterations = 0;
  double final_update_norm = 0.0;
  double defect = 0.0;
  double max_iterate_norm = 0.0;
  std::vector<double> contraction_ratios;
  double junction_jump = 0.0;
  double end_norm = 0.0;
  // On [0, tau]; kept (when configured) for certificate recomputation.
  std::optional<Trajectory> local_forcing;
  std::optional<Trajectory> local_solution;
  std::optional<UniquenessCheck> uniqueness;
  std::optional<PerturbationCertificate> perturbation;
  std::optional<AccuracyCertificate> accuracy;
};

struct CriterionSample {
  double s;
  double value;  // 1/(T−s) + ‖x_s‖
};

struct Classification {
  Outcome outcome = Outcome::ReachedT;
  double t_estimate = 0.0;      // BlowUp only
  double fitted_blowup = 0.0;   // root of the reciprocal-norm fit
  double norm_at_stop = 0.0;
  bool terminal_growth_flag = false;
  std::string rationale;
};

struct SolveReport {
  std::string problem_id;
  double horizon = 0.0;
  double t_end = 0.0;
  StopReason stop_reason = StopReason::reached_horizon;
  Classification classification;
  std::vector<WindowRecord> windows;
  std::optional<Trajectory> global_trajectory;
  std::vector<CriterionSample> criterion_trace;
  double M_alpha = 0.0;
  double F0_norm = 0.0;
  std::optional<double> global_defect;
  bool defect_within_budget = true;
  bool semigroup_restart = true;  // false: windows restarted with the full history integral
  std::vector<std::string> warnings;
};

class SolveFailure : public Error {
public:
  SolveFailure(const Error& cause, std::shared_ptr<const SolveReport> partial)
      : Error(cause.what()), cause_kind(cause.kind()), partial(std::move(partial)) {}
  const char* kind() const noexcept override { return cause_kind.c_str(); }

  std::string cause_kind;
  std::shared_ptr<const SolveReport> partial;
};

// t ↦ 𝒮_t(x_τ − o_τ) + o_{τ+t} on `grid` ⊂ [0, horizon].
Trajectory shifted_forcing(const Kernel& k, const Vector& x_tau, const Trajectory& o, double tau,
                           const std::vector<double>& grid);

// t ↦ o_{τ+t} + ∫_0^τ S_{τ+t−s} F(x_s) ds; equals shifted_forcing when the
// kernel splits, and remains exact when it does not.
Trajectory history_forcing(const Kernel& k, const Nonlinearity& f, const Trajectory& x_history, const Trajectory& o,
                           const std::vector<double>& grid, const QuadratureSpec& q);

// Concatenate x on [0,τ] with y on [0,ε] shifted by τ.
Trajectory glue(const Trajectory& x, const Trajectory& y, double tau, double glue_tol);

SolveReport solve_maximal(const Kernel& k, const Nonlinearity& f, const Trajectory& o, const QuadratureSpec& q,
                          const SolverConfig& cfg, std::string problem_id = "problem");

Classification classify_outcome(const SolveReport& report, const SolverConfig& cfg);

}  // namespace mildsolve

#endif  // MILDSOLVE_CONTINUATION_HPP
