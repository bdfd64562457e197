#include "cvsynth/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cvsynth/error.hpp"

namespace cvsynth {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(ErrorCode::MissingKey, where + "." + key + " is required");
  return obj.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(ErrorCode::InvalidValue, where + " must be a number");
  return j.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  return number(obj.at(key), where + "." + key);
}

Matrix matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  if (j.is_number()) {
    if (rows != 1 || cols != 1) fail(ErrorCode::DimensionMismatch, where + " must be a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    return Matrix::Constant(1, 1, j.get<double>());
  }
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    fail(ErrorCode::DimensionMismatch, where + " must have " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (row.is_number() && cols == 1) {
      m(i, 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail(ErrorCode::DimensionMismatch, where + " row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = number(row[static_cast<std::size_t>(k)], where);
  }
  return m;
}

Vector vector(const json& j, Eigen::Index n, const std::string& where) {
  if (j.is_number()) {
    if (n != 1) fail(ErrorCode::DimensionMismatch, where + " must have " + std::to_string(n) + " entries");
    return Vector::Constant(1, j.get<double>());
  }
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    fail(ErrorCode::DimensionMismatch, where + " must have " + std::to_string(n) + " entries");
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = number(j[static_cast<std::size_t>(i)], where);
  return v;
}

std::string variant_of(const json& fn, const std::string& where) {
  const json& v = require(fn, "variant", where);
  if (!v.is_string()) fail(ErrorCode::InvalidValue, where + ".variant must be a string");
  return v.get<std::string>();
}

const json& params_of(const json& fn) {
  static const json empty = json::object();
  return fn.contains("params") ? fn.at("params") : empty;
}

MatrixFunction matrix_function(const json& fn, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  const std::string variant = variant_of(fn, where);
  const json& p = params_of(fn);
  const std::string pw = where + ".params";
  if (variant == "constant") return MatrixFunction::constant(matrix(require(p, "value", pw), rows, cols, pw + ".value"));
  if (variant == "sinusoid") {
    return MatrixFunction::sinusoid(matrix(require(p, "base", pw), rows, cols, pw + ".base"),
                                    matrix(require(p, "amplitude", pw), rows, cols, pw + ".amplitude"),
                                    number(require(p, "frequency", pw), pw + ".frequency"));
  }
  fail(ErrorCode::UnknownVariant, where + ".variant '" + variant + "' (expected constant | sinusoid)");
}

WeightFunction weight_function(const json& fn, const std::string& where) {
  const std::string variant = variant_of(fn, where);
  const json& p = params_of(fn);
  const std::string pw = where + ".params";
  WeightFunction w;
  if (variant == "step" || variant == "constant") {
    w = WeightFunction::step(number(require(p, "value", pw), pw + ".value"), number_or(p, "until", kInfinity, pw));
  } else if (variant == "exponential") {
    w = WeightFunction::exponential(number(require(p, "value", pw), pw + ".value"),
                                    number(require(p, "rate", pw), pw + ".rate"));
  } else {
    fail(ErrorCode::UnknownVariant, where + ".variant '" + variant + "' (expected step | exponential)");
  }
  if (fn.contains("integrable")) {
    const json& tags = fn.at("integrable");
    for (const char* tag : {"L1", "L2"}) {
      if (!tags.contains(tag)) continue;
      if (!tags.at(tag).is_boolean()) fail(ErrorCode::InvalidValue, where + ".integrable." + tag + " must be boolean");
      const bool declared = tags.at(tag).get<bool>();
      const bool actual = std::string(tag) == "L1" ? w.integrable_l1() : w.integrable_l2();
      if (declared != actual) {
        fail(ErrorCode::InvalidValue, where + ".integrable." + tag + " is declared " + (declared ? "true" : "false") +
                                          " but the catalog function is " + (actual ? "" : "not ") + "integrable");
      }
    }
  }
  return w;
}

PowerFunction power_function(const json& fn, const std::string& where) {
  const std::string variant = variant_of(fn, where);
  const json& p = params_of(fn);
  const std::string pw = where + ".params";
  const double c = number(require(p, "coefficient", pw), pw + ".coefficient");
  if (c < 0.0) fail(ErrorCode::NonPositiveWeight, where + " coefficient must be >= 0");
  if (variant == "linear") return PowerFunction::linear(c);
  if (variant == "power") return PowerFunction::power(c, number(require(p, "exponent", pw), pw + ".exponent"));
  fail(ErrorCode::UnknownVariant, where + ".variant '" + variant + "' (expected linear | power)");
}

double control_weight_scale(const json& fn, Eigen::Index m) {
  const std::string variant = variant_of(fn, "R");
  const json& p = params_of(fn);
  if (variant == "identity") return 1.0;
  if (variant == "scaled_identity") return number(require(p, "scale", "R.params"), "R.params.scale");
  if (variant == "matrix") {
    const Matrix r = matrix(require(p, "value", "R.params"), m, m, "R.params.value");
    const double scale = r(0, 0);
    if (!r.isApprox(scale * Matrix::Identity(m, m), 0.0)) {
      fail(ErrorCode::NonconformingWeight, "R must equal I/2");
    }
    return scale;
  }
  fail(ErrorCode::UnknownVariant, "R.variant '" + variant + "' (expected identity | scaled_identity | matrix)");
}

DiffeoMap diffeo(const json& fn, Eigen::Index n) {
  const std::string variant = variant_of(fn, "h");
  const json& p = params_of(fn);
  if (variant == "identity") return DiffeoMap::identity(n);
  if (variant == "linear") return DiffeoMap::linear(matrix(require(p, "matrix", "h.params"), n, n, "h.params.matrix"));
  if (variant == "odd_cubic") return DiffeoMap::odd_cubic(n, number(require(p, "beta", "h.params"), "h.params.beta"));
  fail(ErrorCode::UnknownVariant, "h.variant '" + variant + "' (expected identity | linear | odd_cubic)");
}

ConstraintSet constraint_set(const json& fn, Eigen::Index n) {
  const std::string variant = variant_of(fn, "omega");
  const json& p = params_of(fn);
  const std::string pw = "omega.params";
  if (variant == "ball") {
    return ConstraintSet::ball(vector(require(p, "center", pw), n, pw + ".center"), number(require(p, "radius", pw), pw + ".radius"));
  }
  if (variant == "box") {
    return ConstraintSet::box(vector(require(p, "lower", pw), n, pw + ".lower"), vector(require(p, "upper", pw), n, pw + ".upper"));
  }
  if (variant == "polytope") {
    const json& normals = require(p, "normals", pw);
    if (!normals.is_array() || normals.empty()) fail(ErrorCode::InvalidValue, pw + ".normals must be a nonempty array");
    const auto rows = static_cast<Eigen::Index>(normals.size());
    return ConstraintSet::polytope(matrix(normals, rows, n, pw + ".normals"), vector(require(p, "offsets", pw), rows, pw + ".offsets"));
  }
  if (variant == "superellipse") {
    return ConstraintSet::superellipse(vector(require(p, "center", pw), n, pw + ".center"),
                                       vector(require(p, "semi_axes", pw), n, pw + ".semi_axes"),
                                       number_or(p, "exponent", 2.0, pw));
  }
  fail(ErrorCode::UnknownVariant, "omega.variant '" + variant + "' (expected ball | box | polytope | superellipse)");
}

Eigen::Index dimension(const json& dims, const char* key) {
  const json& v = require(dims, key, "dims");
  if (!v.is_number_integer() || v.get<long long>() < 1) fail(ErrorCode::InvalidValue, std::string("dims.") + key + " must be an integer >= 1");
  return static_cast<Eigen::Index>(v.get<long long>());
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

ProblemSpec build_problem(const json& config) {
  if (!config.is_object()) fail(ErrorCode::InvalidValue, "problem config must be a JSON object");
  ProblemSpec spec;
  const json& dims = require(config, "dims", "config");
  spec.dim_state = dimension(dims, "state");
  spec.dim_control = dimension(dims, "control");
  const auto n = spec.dim_state;
  const auto m = spec.dim_control;

  spec.A = matrix_function(require(config, "A", "config"), n, n, "A");
  const json& b_fn = require(config, "B", "config");
  spec.B = matrix_function(b_fn, n, m, "B");
  spec.b_norm_bound = number_or(params_of(b_fn), "norm_bound", spec.B.norm_bound(), "B.params");
  spec.K = weight_function(require(config, "K", "config"), "K");
  spec.a = power_function(require(config, "a", "config"), "a");
  spec.b = power_function(require(config, "b", "config"), "b");
  if (config.contains("R")) spec.r_scale = control_weight_scale(config.at("R"), m);
  spec.h = diffeo(require(config, "h", "config"), n);
  spec.omega = constraint_set(require(config, "omega", "config"), n);

  const json& grid = require(config, "grid", "config");
  spec.grid.t0 = number_or(grid, "t0", 0.0, "grid");
  spec.grid.dt = number(require(grid, "dt", "grid"), "grid.dt");
  spec.grid.horizon = number_or(grid, "horizon", 10.0, "grid");
  spec.grid.t_max = number(require(grid, "T_max", "grid"), "grid.T_max");

  validate(spec);
  return spec;
}

ProblemSpec build_problem_from_text(const std::string& text) {
  json config;
  try {
    config = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidValue, std::string("config is not valid JSON: ") + e.what());
  }
  return build_problem(config);
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return build_problem_from_text(buffer.str());
}

json describe_problem(const ProblemSpec& spec) {
  json out = json::object();
  out["dims"] = {{"state", spec.dim_state}, {"control", spec.dim_control}};
  out["A"] = {{"variant", spec.A.variant_name()}, {"at_t0", matrix_json(spec.A(spec.grid.t0))}};
  out["B"] = {{"variant", spec.B.variant_name()}, {"at_t0", matrix_json(spec.B(spec.grid.t0))}, {"norm_bound", spec.b_norm_bound}};
  out["K"] = {{"variant", spec.K.variant_name()}, {"L1", spec.K.integrable_l1()}};
  out["a"] = {{"coefficient", spec.a.coefficient()}, {"exponent", spec.a.exponent()}};
  out["b"] = {{"coefficient", spec.b.coefficient()}, {"exponent", spec.b.exponent()}};
  out["h"] = spec.h.variant_name();
  out["omega"] = spec.omega.variant_name();
  out["grid"] = {{"t0", spec.grid.t0}, {"dt", spec.grid.dt}, {"horizon", spec.grid.horizon}, {"T_max", spec.grid.t_max}};
  return out;
}

}  // namespace cvsynth
