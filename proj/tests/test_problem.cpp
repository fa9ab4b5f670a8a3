#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mildsolve/problem.hpp"
#include "mildsolve/run.hpp"

using namespace mildsolve;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kProblems = fs::path(MILDSOLVE_SOURCE_DIR) / "problems";

json riccati() {
  std::ifstream in(kProblems / "riccati.json");
  return json::parse(in);
}

template <typename E>
std::string message_of(const json& doc) {
  try {
    parse_problem(doc, kProblems);
  } catch (const E& e) {
    return e.what();
  } catch (const std::exception& e) {
    return std::string("wrong error type: ") + e.what();
  }
  return "no error";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mildsolve_test_problem" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("shipped problems load and pass their audits") {
  for (const char* name : {"riccati.json", "linear.json", "heat16.json"}) {
    CAPTURE(name);
    const ProblemSpec spec = load_problem(kProblems / name);
    CHECK(std::isfinite(spec.M_alpha));
    CHECK_FALSE(spec.psi_audit.violated);
  }
  const ProblemSpec r = load_problem(kProblems / "riccati.json");
  CHECK(r.id == "riccati");
  CHECK(r.T == 2.0);
  CHECK(r.nonlinearity.kind() == NonlinearityKind::quadratic_riccati);
}

TEST_CASE("alpha outside (0,1) is a validation error") {
  json doc = riccati();
  doc["alpha"] = 1.2;
  const std::string msg = message_of<ConfigError>(doc);
  CHECK(msg.find("alpha") != std::string::npos);
  CHECK(msg.find("(0,1)") != std::string::npos);
}

TEST_CASE("unknown fields are rejected") {
  json doc = riccati();
  doc["solver"]["frobnicate"] = 3;
  CHECK(message_of<ConfigError>(doc).find("frobnicate") != std::string::npos);
  doc = riccati();
  doc["extra"] = true;
  CHECK(message_of<ConfigError>(doc).find("unknown field") != std::string::npos);
}

TEST_CASE("schema version must match") {
  json doc = riccati();
  doc["schema_version"] = 99;
  CHECK(message_of<ConfigError>(doc).find("schema_version") != std::string::npos);
}

TEST_CASE("custom nonlinearity with psi = 0 fails the Lipschitz audit") {
  json doc = riccati();
  doc["nonlinearity"] = {{"kind", "custom"}, {"map", "identity"}, {"psi", {0.0}}};
  CHECK(message_of<AuditError>(doc).find("Lipschitz") != std::string::npos);
}

TEST_CASE("a kernel more singular than alpha fails the singularity audit") {
  json doc = riccati();
  doc["alpha"] = 0.3;
  doc["kernel"] = {{"kind", "singular_scaled"}, {"alpha0", 0.5}, {"base", {{"kind", "identity"}}}};
  CHECK(message_of<AuditError>(doc).find("sup_{t in (0,T)}") != std::string::npos);
}

TEST_CASE("parse errors report line and column") {
  const fs::path dir = scratch("parse");
  std::ofstream(dir / "bad.json") << "{\n  \"id\": \"x\",\n  \"T\": ,\n}\n";
  try {
    load_problem(dir / "bad.json");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_problem(dir / "missing.json"), Error);
}

TEST_CASE("forcing must cover [0,T]") {
  json doc = riccati();
  doc["forcing"] = {{"kind", "tabulated"}, {"t", {0.0, 1.0}}, {"values", {{1.0}, {1.0}}}};
  CHECK(message_of<ConfigError>(doc).find("forcing") != std::string::npos);
}

TEST_CASE("F = 0 run reproduces the forcing file") {
  const fs::path dir = scratch("zero");
  {
    std::ofstream csv(dir / "o.csv");
    csv << "t,x_1,x_2\n";
    for (int i = 0; i <= 20; ++i) csv << 0.05 * i << "," << std::sin(0.05 * i) << "," << 0.5 - 0.01 * i << "\n";
  }
  json doc = {{"schema_version", 1},
              {"id", "zero"},
              {"T", 1.0},
              {"alpha", 0.5},
              {"rho", 0.5},
              {"space", {{"V", {{"dim", 2}, {"norm", "sup"}}}}},
              {"kernel", {{"kind", "scalar_exp"}, {"lambda", -1.0}}},
              {"nonlinearity", {{"kind", "polynomial_scalar"}, {"coefficients", {0.0}}}},
              {"forcing", {{"kind", "sampled"}, {"path", "o.csv"}}},
              {"seed", 4}};
  const ProblemSpec spec = parse_problem(doc, dir);
  const RunResult r = run_problem(spec, dir / "out");
  CHECK(r.exit_code == exit_ok);
  CHECK(r.report->classification.outcome == Outcome::ReachedT);
  const Trajectory x = read_trajectory_csv(dir / "out" / "zero.trajectory.csv", spec.v_space);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK((x.node(i) - spec.forcing(x.grid()[i])).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("report JSON carries the schema and outcome") {
  const ProblemSpec spec = load_problem(kProblems / "linear.json");
  const fs::path dir = scratch("report");
  const RunResult r = run_problem(spec, dir);
  CHECK(r.exit_code == exit_ok);
  std::ifstream in(dir / "linear.report.json");
  const json rep = json::parse(in);
  CHECK(rep["schema_version"] == kSchemaVersion);
  CHECK(rep["outcome"]["kind"] == "ReachedT");
  CHECK(rep["windows"].size() == r.report->windows.size());
  CHECK(fs::exists(dir / "linear.plot.csv"));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("trajectory CSV round trip") {
  const SpaceSpec s = SpaceSpec::sup(2);
  const Trajectory x = Trajectory::sample(s, uniform_grid(0.0, 1.0, 7), [](double t) {
    return Vector((Vector(2) << std::exp(t), 1.0 / 3.0 - t).finished());
  });
  const fs::path dir = scratch("csv");
  write_trajectory_csv(dir / "x.csv", x);
  const Trajectory y = read_trajectory_csv(dir / "x.csv", s);
  CHECK(y.grid() == x.grid());
  CHECK(y.values() == x.values());
}
