#ifndef MILDSOLVE_PROBLEM_HPP
#define MILDSOLVE_PROBLEM_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mildsolve/continuation.hpp"
#include "mildsolve/kernels.hpp"
#include "mildsolve/nonlinear.hpp"
#include "mildsolve/state_space.hpp"
#include "mildsolve/volterra.hpp"

namespace mildsolve {

inline constexpr int kSchemaVersion = 1;

// One fully validated and audited run configuration.
struct ProblemSpec {
  std::string id;
  double T;
  double alpha;
  double rho;
  SpaceSpec v_space;
  SpaceSpec w_space;
  Kernel kernel;
  Nonlinearity nonlinearity;
  Trajectory forcing;
  SolverConfig solver;
  QuadratureSpec quadrature;
  std::uint64_t seed = 0;

  // Audit results, computed at load time.
  double M_alpha = 0.0;
  PsiAudit psi_audit;
  double psi_audit_radius = 0.0;
  HolderEstimate holder;

  nlohmann::json kernel_json;
  nlohmann::json nonlinearity_json;
};

// Parses and validates; relative forcing paths resolve against base_dir.
// Throws ConfigError (parse/validation) or AuditError (hypothesis failed).
ProblemSpec parse_problem(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ProblemSpec load_problem(const std::filesystem::path& path);

// CSV with header t,x_1,...,x_d.
Trajectory read_trajectory_csv(const std::filesystem::path& path, const SpaceSpec& space);

}  // namespace mildsolve

#endif  // MILDSOLVE_PROBLEM_HPP
