#ifndef MILDSOLVE_RUN_HPP
#define MILDSOLVE_RUN_HPP

#include <filesystem>
#include <memory>
#include <ostream>
#include <string>

#include <json.hpp>

#include "mildsolve/continuation.hpp"
#include "mildsolve/problem.hpp"

namespace mildsolve {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void write_trajectory_csv(std::ostream& out, const Trajectory& x);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& x);

nlohmann::json report_to_json(const SolveReport& report, const ProblemSpec* spec = nullptr);
nlohmann::json error_to_json(const Error& e, const SolveReport* partial = nullptr);

enum ExitCode : int { exit_ok = 0, exit_stalled = 1, exit_error = 2, exit_certificate = 3 };

struct RunOptions {
  bool verify = false;
  bool plot = true;
};

struct RunResult {
  int exit_code = exit_ok;
  std::shared_ptr<const SolveReport> report;  // may be a partial report on failure
  nlohmann::json report_json;
  std::string message;
};

// Solves (and optionally certifies) spec, writing <id>.trajectory.csv,
// <id>.report.json and <id>.plot.csv into outdir. Solver errors are caught
// and recorded in <id>.error.json with exit code 2.
RunResult run_problem(const ProblemSpec& spec, const std::filesystem::path& outdir, const RunOptions& opts = {});

}  // namespace mildsolve

#endif  // MILDSOLVE_RUN_HPP
