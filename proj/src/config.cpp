#include "mlyap/config.hpp"

#include <filesystem>

#include "mlyap/fixtures.hpp"
#include "mlyap/io.hpp"

namespace mlyap {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

namespace fixtures {
MatrixXd by_name(std::string_view name) {
  if (name == "exA") return exA();
  if (name == "crazyA") return crazyA();
  throw Error(ErrorCode::ConfigError,
              "unknown fixture '" + std::string(name) + "'");
}
}  // namespace fixtures

NoiseModel noise_from_json(const json& j) {
  if (!j.is_object()) bad("noise must be an object");
  NoiseModel m;
  m.kind = parse_noise_kind(get_or<std::string>(j, "kind", "UH"));
  m.dist = parse_distribution(get_or<std::string>(j, "dist", "normal"));
  m.b2 = get_or<double>(j, "b2", 0.0);
  m.q = get_or<double>(j, "q", 0.0);
  if (j.contains("truncate_at")) m.truncate_at = get_or<double>(j, "truncate_at", 0.0);
  if (m.homogeneous() && j.contains("q")) bad("q given for homogeneous noise");
  if (m.proportional() && j.contains("b2")) bad("b2 given for proportional noise");
  try {
    m.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return m;
}

json noise_to_json(const NoiseModel& m) {
  json j;
  j["kind"] = std::string(to_string(m.kind));
  if (m.homogeneous()) {
    j["b2"] = m.b2;
  } else {
    j["q"] = m.q;
  }
  j["dist"] = std::string(to_string(m.dist));
  if (m.truncate_at) j["truncate_at"] = *m.truncate_at;
  return j;
}

MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("matrix must be a non-empty array");
  const std::size_t n = j.size();
  MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) bad("matrix must be square");
    for (std::size_t k = 0; k < n; ++k) {
      if (!j[i][k].is_number()) bad("matrix entries must be numbers");
      A(i, k) = j[i][k].get<double>();
    }
  }
  return A;
}

json matrix_to_json(const MatrixXd& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < A.cols(); ++k) row.push_back(A(i, k));
    rows.push_back(row);
  }
  return rows;
}

EnsembleSpec ensemble_from_json(const json& j) {
  EnsembleSpec s;
  s.n = get_or<int>(j, "n", 5);
  s.generator = parse_generator(get_or<std::string>(j, "generator", "normal"));
  s.param1 = get_or<double>(j, "param1", 0.0);
  s.param2 = get_or<double>(j, "param2", 1.0);
  s.zero_prob = get_or<double>(j, "zero_prob", 0.5);
  s.symmetric = get_or<bool>(j, "symmetric", false);
  if (j.contains("normalize_lambda")) {
    if (j["normalize_lambda"].is_null()) {
      s.normalize_lambda.reset();
    } else {
      s.normalize_lambda = get_or<double>(j, "normalize_lambda", 1.0);
    }
  }
  s.count = get_or<int>(j, "count", 1000);
  s.max_attempts = get_or<int>(j, "max_attempts", 10000);
  try {
    s.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return s;
}

ExperimentConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) bad("config must be a JSON object");
  ExperimentConfig c;
  c.hash = hash_hex(j.dump());

  if (j.contains("system")) {
    const json& sys = j["system"];
    const int given = sys.contains("A") + sys.contains("A_file") +
                      sys.contains("fixture");
    if (given != 1) bad("system needs exactly one of A, A_file, fixture");
    if (sys.contains("A")) {
      c.system.A = matrix_from_json(sys["A"]);
    } else if (sys.contains("A_file")) {
      std::filesystem::path p = get_or<std::string>(sys, "A_file", "");
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      c.system.A = read_matrix_csv(p.string());
    } else {
      c.system.A = fixtures::by_name(get_or<std::string>(sys, "fixture", ""));
    }
    if (!sys.contains("noise")) bad("system.noise is required");
    c.system.noise = noise_from_json(sys["noise"]);
    if (sys.contains("x0")) {
      const auto x = get_or<std::vector<double>>(sys, "x0", {});
      c.system.x0 = Eigen::Map<const VectorXd>(x.data(), x.size());
    } else {
      c.system.x0 = VectorXd::Ones(c.system.A.rows());
    }
    try {
      c.system.validate();
    } catch (const Error& e) {
      bad(e.what());
    }
  }

  if (!j.contains("run") || !j["run"].contains("seed")) {
    bad("run.seed is required");
  }
  const json& run = j["run"];
  c.run.seed = get_or<std::uint64_t>(run, "seed", 0);
  c.run.t_max = get_or<int>(run, "t_max", 40);
  c.run.runs = get_or<int>(run, "runs", 10000);
  c.run.p_list = get_or<std::vector<double>>(run, "p_list", {2.0});
  const auto window =
      get_or<std::vector<int>>(run, "fit_window", {0, c.run.t_max});
  if (window.size() != 2) bad("fit_window must be [t_lo, t_hi]");
  c.run.fit_lo = window[0];
  c.run.fit_hi = window[1];
  if (c.run.t_max < 1 || c.run.runs < 1) bad("t_max and runs must be >= 1");
  if (c.run.fit_hi > c.run.t_max || c.run.fit_lo < 0 ||
      c.run.fit_lo >= c.run.fit_hi) {
    bad("fit_window must lie inside [0, t_max]");
  }
  if (c.run.p_list.empty()) bad("p_list must not be empty");

  if (j.contains("analysis")) {
    const json& a = j["analysis"];
    c.analysis.methods = get_or<std::vector<std::string>>(a, "methods", {});
    c.analysis.r = get_or<int>(a, "r", 6);
    c.analysis.lambda_grid = get_or<int>(a, "lambda_grid", 99);
    if (c.analysis.r < 1) bad("analysis.r must be >= 1");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    c.output.directory = get_or<std::string>(o, "directory", "");
    c.output.formats =
        get_or<std::vector<std::string>>(o, "formats", {"csv", "json"});
  }
  if (j.contains("ensemble")) c.ensemble = ensemble_from_json(j["ensemble"]);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path().string();
  return config_from_json(j, dir.empty() ? "." : dir);
}

}  // namespace mlyap
