#include "mildsolve/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mildsolve {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& constraint) {
  throw ConfigError("validation error: " + field + ": " + constraint);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) invalid(where, "must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) invalid(where.empty() ? key : where + "." + key, "unknown field");
}

const json& required(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) invalid(where.empty() ? std::string(key) : where + "." + key, "missing required field");
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) invalid(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) invalid(field, "must be finite");
  return d;
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) invalid(field, "must be an integer");
  return v.get<int>();
}

Vector vector_of(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) invalid(field, "must be a non-empty array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], field);
  return out;
}

Matrix matrix_of(const json& v, const std::string& field, int dim) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim) invalid(field, "must be a " + std::to_string(dim) + "x" + std::to_string(dim) + " array");
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const Vector row = vector_of(v[static_cast<std::size_t>(i)], field);
    if (row.size() != dim) invalid(field, "must be a " + std::to_string(dim) + "x" + std::to_string(dim) + " array");
    m.row(i) = row.transpose();
  }
  return m;
}

SpaceSpec parse_space(const json& j, const std::string& where) {
  check_keys(j, where, {"dim", "norm", "p", "weights"});
  const int dim = integer(required(j, where, "dim"), where + ".dim");
  if (dim < 1) invalid(where + ".dim", "must be >= 1");
  const std::string kind = j.value("norm", std::string("sup"));
  if (kind == "euclidean") return SpaceSpec::euclidean(dim);
  if (kind == "sup") return SpaceSpec::sup(dim);
  if (kind == "p_norm" || kind == "weighted_p") {
    const double p = number(required(j, where, "p"), where + ".p");
    if (!(p >= 1.0)) invalid(where + ".p", "must be >= 1");
    if (kind == "p_norm") return SpaceSpec::p_norm(dim, p);
    const Vector w = vector_of(required(j, where, "weights"), where + ".weights");
    if (w.size() != dim) invalid(where + ".weights", "length must equal dim");
    if ((w.array() <= 0.0).any()) invalid(where + ".weights", "must be strictly positive");
    return SpaceSpec::weighted_p(dim, p, w);
  }
  invalid(where + ".norm", "must be one of euclidean, sup, p_norm, weighted_p");
}

Kernel parse_kernel(const json& j, const std::string& where, const KernelSetup& setup, double alpha0 = 0.0) {
  if (!j.is_object()) invalid(where, "must be an object");
  const std::string kind = required(j, where, "kind").is_string() ? j.at("kind").get<std::string>() : "";
  const int dim = setup.v_space.dim();
  if (kind == "identity") {
    check_keys(j, where, {"kind"});
    return Kernel(kernel::Identity{}, setup, alpha0);
  }
  if (kind == "scalar_exp") {
    check_keys(j, where, {"kind", "lambda"});
    return Kernel(kernel::ScalarExp{number(required(j, where, "lambda"), where + ".lambda")}, setup, alpha0);
  }
  if (kind == "diagonal_exp") {
    check_keys(j, where, {"kind", "lambdas"});
    const Vector l = vector_of(required(j, where, "lambdas"), where + ".lambdas");
    if (l.size() != dim) invalid(where + ".lambdas", "length must equal dim");
    return Kernel(kernel::DiagonalExp{l}, setup, alpha0);
  }
  if (kind == "matrix_exp") {
    check_keys(j, where, {"kind", "A"});
    return Kernel(kernel::MatrixExp{matrix_of(required(j, where, "A"), where + ".A", dim)}, setup, alpha0);
  }
  if (kind == "singular_scaled") {
    check_keys(j, where, {"kind", "alpha0", "base"});
    if (alpha0 != 0.0) invalid(where + ".base", "singular_scaled cannot be nested");
    const double a0 = number(required(j, where, "alpha0"), where + ".alpha0");
    if (!(a0 > 0.0 && a0 < 1.0)) invalid(where + ".alpha0", "must lie in (0,1)");
    return parse_kernel(required(j, where, "base"), where + ".base", setup, a0);
  }
  invalid(where + ".kind", "must be one of identity, scalar_exp, diagonal_exp, matrix_exp, singular_scaled");
}

Nonlinearity parse_nonlinearity(const json& j, const std::string& where, const SpaceSpec& v, const SpaceSpec& w) {
  if (!j.is_object()) invalid(where, "must be an object");
  const std::string kind = required(j, where, "kind").is_string() ? j.at("kind").get<std::string>() : "";
  if (kind == "linear") {
    check_keys(j, where, {"kind", "A"});
    return Nonlinearity::linear(matrix_of(required(j, where, "A"), where + ".A", v.dim()), v, w);
  }
  if (kind == "polynomial_scalar") {
    check_keys(j, where, {"kind", "coefficients"});
    const Vector c = vector_of(required(j, where, "coefficients"), where + ".coefficients");
    return Nonlinearity::polynomial_scalar(std::vector<double>(c.data(), c.data() + c.size()), v, w);
  }
  if (kind == "quadratic_riccati") {
    check_keys(j, where, {"kind"});
    return Nonlinearity::quadratic_riccati(v, w);
  }
  if (kind == "cubic_reaction") {
    check_keys(j, where, {"kind"});
    return Nonlinearity::cubic_reaction(v, w);
  }
  if (kind == "custom") {
    check_keys(j, where, {"kind", "map", "psi"});
    const std::string map = required(j, where, "map").is_string() ? j.at("map").get<std::string>() : "";
    const Vector psi = vector_of(required(j, where, "psi"), where + ".psi");
    if ((psi.array() < 0.0).any()) invalid(where + ".psi", "coefficients must be >= 0");
    PsiForm form(std::vector<double>(psi.data(), psi.data() + psi.size()));
    Nonlinearity::Map fn;
    if (map == "identity") fn = [](const Vector& x) -> Vector { return x; };
    else if (map == "sin") fn = [](const Vector& x) -> Vector { return x.array().sin().matrix(); };
    else if (map == "tanh") fn = [](const Vector& x) -> Vector { return x.array().tanh().matrix(); };
    else invalid(where + ".map", "must be one of identity, sin, tanh");
    return Nonlinearity::custom(map, std::move(fn), std::move(form), v, w);
  }
  invalid(where + ".kind", "must be one of linear, polynomial_scalar, quadratic_riccati, cubic_reaction, custom");
}

Trajectory parse_forcing(const json& j, const SpaceSpec& v, double T, const std::filesystem::path& base_dir) {
  const std::string where = "forcing";
  if (!j.is_object()) invalid(where, "must be an object");
  const std::string kind = required(j, where, "kind").is_string() ? j.at("kind").get<std::string>() : "";
  Trajectory o = [&]() -> Trajectory {
    if (kind == "constant") {
      check_keys(j, where, {"kind", "value"});
      const Vector c = vector_of(required(j, where, "value"), where + ".value");
      if (c.size() != v.dim()) invalid(where + ".value", "length must equal V dim");
      return Trajectory::constant(v, {0.0, T}, c);
    }
    if (kind == "sampled") {
      check_keys(j, where, {"kind", "path"});
      const auto& p = required(j, where, "path");
      if (!p.is_string()) invalid(where + ".path", "must be a string");
      std::filesystem::path file = p.get<std::string>();
      if (file.is_relative()) file = base_dir / file;
      return read_trajectory_csv(file, v);
    }
    if (kind == "tabulated") {
      check_keys(j, where, {"kind", "t", "values"});
      const Vector t = vector_of(required(j, where, "t"), where + ".t");
      const auto& vals = required(j, where, "values");
      if (!vals.is_array() || vals.size() != static_cast<std::size_t>(t.size()))
        invalid(where + ".values", "must hold one row per time");
      Matrix m(v.dim(), t.size());
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        const Vector row = vector_of(vals[static_cast<std::size_t>(i)], where + ".values");
        if (row.size() != v.dim()) invalid(where + ".values", "row length must equal V dim");
        m.col(i) = row;
      }
      try {
        return Trajectory(v, std::vector<double>(t.data(), t.data() + t.size()), std::move(m));
      } catch (const ContractError& e) {
        invalid(where + ".t", e.what());
      }
    }
    invalid(where + ".kind", "must be one of constant, sampled, tabulated");
  }();
  if (std::abs(o.t0()) > 0.0) invalid(where, "must start at t=0");
  if (o.t1() < T * (1.0 - 1e-12)) invalid(where, "must cover [0, T]");
  return o;
}

void parse_solver(const json& j, SolverConfig& s) {
  const std::string w = "solver";
  check_keys(j, w,
             {"grid_n", "tol", "max_iter", "contraction_target", "contraction_slack", "tol_ball", "blowup_threshold",
              "tau_min", "glue_tol", "slack", "growth_windows", "max_window", "singularity_mesh", "probe_factor",
              "defect_budget", "global_defect_max_nodes", "global_defect_points", "max_windows"});
  if (j.contains("grid_n")) s.grid_n = integer(j["grid_n"], w + ".grid_n");
  if (j.contains("tol")) s.tol = number(j["tol"], w + ".tol");
  if (j.contains("max_iter")) s.max_iter = integer(j["max_iter"], w + ".max_iter");
  if (j.contains("contraction_target")) s.contraction_target = number(j["contraction_target"], w + ".contraction_target");
  if (j.contains("contraction_slack")) s.contraction_slack = number(j["contraction_slack"], w + ".contraction_slack");
  if (j.contains("tol_ball")) s.tol_ball = number(j["tol_ball"], w + ".tol_ball");
  if (j.contains("blowup_threshold")) s.blowup_threshold = number(j["blowup_threshold"], w + ".blowup_threshold");
  if (j.contains("tau_min")) s.tau_min = number(j["tau_min"], w + ".tau_min");
  if (j.contains("glue_tol")) s.glue_tol = number(j["glue_tol"], w + ".glue_tol");
  if (j.contains("slack")) s.slack = number(j["slack"], w + ".slack");
  if (j.contains("growth_windows")) s.growth_windows = integer(j["growth_windows"], w + ".growth_windows");
  if (j.contains("max_window")) s.max_window = number(j["max_window"], w + ".max_window");
  if (j.contains("singularity_mesh")) s.singularity_mesh = integer(j["singularity_mesh"], w + ".singularity_mesh");
  if (j.contains("probe_factor")) s.probe_factor = integer(j["probe_factor"], w + ".probe_factor");
  if (j.contains("defect_budget")) s.defect_budget = number(j["defect_budget"], w + ".defect_budget");
  if (j.contains("global_defect_max_nodes")) {
    const int n = integer(j["global_defect_max_nodes"], w + ".global_defect_max_nodes");
    if (n < 0) invalid(w + ".global_defect_max_nodes", "must be >= 0");
    s.global_defect_max_nodes = static_cast<std::size_t>(n);
  }
  if (j.contains("global_defect_points")) {
    const int n = integer(j["global_defect_points"], w + ".global_defect_points");
    if (n < 1) invalid(w + ".global_defect_points", "must be >= 1");
    s.global_defect_points = static_cast<std::size_t>(n);
  }
  if (j.contains("max_windows")) s.max_windows = integer(j["max_windows"], w + ".max_windows");
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("validation error: ") + e.what());
  }
}

void parse_quadrature(const json& j, QuadratureSpec& q) {
  const std::string w = "quadrature";
  check_keys(j, w, {"scheme", "panels_per_step", "singular_panel", "gauss_jacobi_nodes"});
  if (j.contains("scheme")) {
    const std::string s = j["scheme"].is_string() ? j["scheme"].get<std::string>() : "";
    if (s == "product_trapezoid") q.scheme = QuadratureScheme::product_trapezoid;
    else if (s == "product_rectangle") q.scheme = QuadratureScheme::product_rectangle;
    else invalid(w + ".scheme", "must be product_trapezoid or product_rectangle");
  }
  if (j.contains("panels_per_step")) q.panels_per_step = integer(j["panels_per_step"], w + ".panels_per_step");
  if (j.contains("singular_panel")) {
    const std::string s = j["singular_panel"].is_string() ? j["singular_panel"].get<std::string>() : "";
    if (s == "analytic_weight") q.singular_panel = SingularPanelRule::analytic_weight;
    else if (s == "gauss_jacobi") q.singular_panel = SingularPanelRule::gauss_jacobi;
    else invalid(w + ".singular_panel", "must be analytic_weight or gauss_jacobi");
  }
  if (j.contains("gauss_jacobi_nodes"))
    q.gauss_jacobi_nodes = integer(j["gauss_jacobi_nodes"], w + ".gauss_jacobi_nodes");
  if (q.panels_per_step < 1) invalid(w + ".panels_per_step", "must be >= 1");
  if (q.gauss_jacobi_nodes < 1) invalid(w + ".gauss_jacobi_nodes", "must be >= 1");
}

double open_unit(const json& doc, const char* key) {
  const double v = number(required(doc, "", key), key);
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << "must lie in the open interval (0,1), got " << v;
    invalid(key, os.str());
  }
  return v;
}

}  // namespace

Trajectory read_trajectory_csv(const std::filesystem::path& path, const SpaceSpec& space) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open forcing file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  std::vector<double> grid;
  std::vector<Vector> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (static_cast<int>(cells.size()) != space.dim() + 1)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(space.dim() + 1) + " columns");
    grid.push_back(cells[0]);
    rows.push_back(Eigen::Map<Vector>(cells.data() + 1, space.dim()));
  }
  Matrix m(space.dim(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = rows[i];
  try {
    return Trajectory(space, std::move(grid), std::move(m));
  } catch (const ContractError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ProblemSpec parse_problem(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "",
             {"schema_version", "id", "T", "alpha", "rho", "space", "kernel", "nonlinearity", "forcing", "solver",
              "quadrature", "seed"});
  if (doc.contains("schema_version") && integer(doc["schema_version"], "schema_version") != kSchemaVersion)
    invalid("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  const auto& id_json = required(doc, "", "id");
  if (!id_json.is_string() || id_json.get<std::string>().empty()) invalid("id", "must be a non-empty string");
  const std::string id = id_json.get<std::string>();
  if (id.find('/') != std::string::npos) invalid("id", "must not contain '/'");

  const double T = number(required(doc, "", "T"), "T");
  if (!(T > 0.0)) invalid("T", "must be positive");
  const double alpha = open_unit(doc, "alpha");
  const double rho = open_unit(doc, "rho");

  const json& space = required(doc, "", "space");
  check_keys(space, "space", {"V", "W"});
  const SpaceSpec v = parse_space(required(space, "space", "V"), "space.V");
  const SpaceSpec w = space.contains("W") ? parse_space(space["W"], "space.W") : v;
  if (v.dim() != w.dim()) invalid("space.W.dim", "must equal space.V.dim");

  SolverConfig solver;
  if (doc.contains("solver")) parse_solver(doc["solver"], solver);
  QuadratureSpec quad;
  if (doc.contains("quadrature")) parse_quadrature(doc["quadrature"], quad);
  std::uint64_t seed = 0;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) invalid("seed", "must be an integer");
    seed = doc["seed"].get<std::uint64_t>();
  }

  try {
    Kernel k = parse_kernel(required(doc, "", "kernel"), "kernel", KernelSetup{T, alpha, rho, v, w});
    Nonlinearity f = parse_nonlinearity(required(doc, "", "nonlinearity"), "nonlinearity", v, w);
    Trajectory o = parse_forcing(required(doc, "", "forcing"), v, T, base_dir);

    ProblemSpec spec{id, T, alpha, rho, v, w, std::move(k), std::move(f), std::move(o), solver, quad, seed, 0.0, {}, 0.0, {}, {}, {}};
    spec.kernel_json = doc["kernel"];
    spec.nonlinearity_json = doc["nonlinearity"];

    spec.M_alpha = singularity_bound(spec.kernel, solver.singularity_mesh);
    if (!std::isfinite(spec.M_alpha))
      throw AuditError("hypothesis sup_{t in (0,T)} t^alpha ||S_t|| < infinity fails for kernel " +
                       spec.kernel.describe() + " with alpha=" + std::to_string(alpha));
    const double R = spec.forcing.sup_norm();
    spec.psi_audit_radius = 2.0 * R + 2.0;
    spec.psi_audit = audit_psi(spec.nonlinearity, spec.psi_audit_radius, 4000, seed);
    if (spec.psi_audit.violated) {
      std::ostringstream os;
      os << "local Lipschitz hypothesis: psi(" << spec.psi_audit_radius << ") = " << spec.psi_audit.psi
         << " is below the observed difference quotient " << spec.psi_audit.max_observed_ratio
         << " of nonlinearity '" << spec.nonlinearity.name() << "'";
      throw AuditError(os.str());
    }
    spec.holder = holder_modulus(spec.kernel, 16);
    return spec;
  } catch (const ContractError& e) {
    throw ConfigError(std::string("validation error: ") + e.what());
  }
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
  return parse_problem(doc, path.parent_path());
}

}  // namespace mildsolve
