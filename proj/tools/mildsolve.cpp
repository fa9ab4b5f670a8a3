// mildsolve command-line driver: solve, verify, bench, ml.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mildsolve/problem.hpp"
#include "mildsolve/run.hpp"
#include "mildsolve/specialfn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mildsolve;

namespace {

int solve_one(const fs::path& config, const fs::path& outdir, bool verify, bool plot) {
  ProblemSpec spec = [&] {
    try {
      return load_problem(config);
    } catch (const Error& e) {
      std::cerr << error_to_json(e).dump(2) << '\n';
      std::exit(exit_error);
    }
  }();
  RunResult r;
  try {
    r = run_problem(spec, outdir, RunOptions{verify, plot});
  } catch (const Error& e) {
    std::cerr << error_to_json(e).dump(2) << '\n';
    return exit_error;
  }
  if (r.exit_code == exit_error) {
    std::cerr << r.report_json.dump(2) << '\n';
    return r.exit_code;
  }
  const auto& rep = *r.report;
  std::cout << spec.id << ": " << to_string(rep.classification.outcome) << " (" << to_string(rep.stop_reason)
            << ") t_end=" << format_double(rep.t_end) << " windows=" << rep.windows.size();
  if (rep.classification.outcome == Outcome::BlowUp)
    std::cout << " t_estimate=" << format_double(rep.classification.t_estimate);
  if (verify) std::cout << " certificates=" << (r.exit_code == exit_certificate ? "FAILED" : "ok");
  std::cout << '\n';
  return r.exit_code;
}

int thread_cap(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("MILDSOLVE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

int bench(const fs::path& dir, const fs::path& outdir, int threads, bool verify) {
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "no *.json configs in " << dir << '\n';
    return exit_error;
  }

  std::vector<json> rows(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      json row = {{"config", configs[i].filename().string()}};
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const ProblemSpec spec = load_problem(configs[i]);
        const RunResult r = run_problem(spec, outdir, RunOptions{verify, true});
        row["id"] = spec.id;
        row["exit_code"] = r.exit_code;
        if (r.report) {
          row["outcome"] = to_string(r.report->classification.outcome);
          row["t_end"] = r.report->t_end;
          row["windows"] = r.report->windows.size();
        }
      } catch (const Error& e) {
        row["exit_code"] = static_cast<int>(exit_error);
        row["error"] = {{"kind", e.kind()}, {"message", e.what()}};
      }
      row["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rows[i] = row;
    }
  };
  const int n = std::min<int>(thread_cap(threads), static_cast<int>(configs.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int worst = exit_ok;
  for (const auto& row : rows) {
    std::cout << row["config"].get<std::string>() << "  exit=" << row["exit_code"].get<int>();
    if (row.contains("outcome")) std::cout << "  " << row["outcome"].get<std::string>();
    std::cout << "  " << format_double(row["seconds"].get<double>()) << "s\n";
    worst = std::max(worst, row["exit_code"].get<int>());
  }
  fs::create_directories(outdir);
  std::ofstream(outdir / "bench.summary.json") << json{{"schema_version", kSchemaVersion}, {"runs", rows}}.dump(2)
                                               << '\n';
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified solver for semilinear Volterra (mild) equations"};
  app.require_subcommand(1);

  std::string config, outdir = "out", bench_dir;
  bool verify = false, no_plot = false;
  int threads = 0;

  auto* solve = app.add_subcommand("solve", "Solve one problem config");
  solve->add_option("config", config, "Problem JSON")->required();
  solve->add_option("-o,--out", outdir, "Output directory");
  solve->add_flag("--verify", verify, "Also compute per-window certificates");
  solve->add_flag("--no-plot", no_plot, "Skip <id>.plot.csv");

  auto* ver = app.add_subcommand("verify", "Solve and certify (same as solve --verify)");
  ver->add_option("config", config, "Problem JSON")->required();
  ver->add_option("-o,--out", outdir, "Output directory");

  auto* bench_cmd = app.add_subcommand("bench", "Solve every *.json in a directory");
  bench_cmd->add_option("dir", bench_dir, "Config directory")->required()->check(CLI::ExistingDirectory);
  bench_cmd->add_option("-o,--out", outdir, "Output directory");
  bench_cmd->add_option("-j,--threads", threads, "Worker threads (capped by MILDSOLVE_THREADS)");
  bench_cmd->add_flag("--verify", verify, "Certify every run");

  auto* ml = app.add_subcommand("ml", "Special functions");
  ml->require_subcommand(1);
  double gx = 0.0, r = 0.5, x = 0.0, tol = 1e-14;
  auto* gamma_cmd = ml->add_subcommand("gamma", "Gamma(x)");
  gamma_cmd->add_option("x", gx)->required();
  auto* exp_cmd = ml->add_subcommand("exp", "Generalized exponential E_r[x]");
  exp_cmd->add_option("-r", r, "Order in (0,1]")->required();
  exp_cmd->add_option("-x", x, "Argument >= 0")->required();
  exp_cmd->add_option("--tol", tol, "Series tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help/version exit 0; every usage error maps onto the error exit code
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_error;
  }

  try {
    if (*solve) return solve_one(config, outdir, verify, !no_plot);
    if (*ver) return solve_one(config, outdir, true, true);
    if (*bench_cmd) return bench(bench_dir, outdir, threads, verify);
    if (*gamma_cmd) {
      std::cout << format_double(mildsolve::gamma(gx)) << '\n';
      return 0;
    }
    if (*exp_cmd) {
      std::cout << format_double(ml_gronwall(MLParams<double>{r, x, tol})) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << error_to_json(e).dump(2) << '\n';
    return exit_error;
  }
  return 0;
}
