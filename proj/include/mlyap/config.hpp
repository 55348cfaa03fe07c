#pragma once

// JSON experiment configuration.
//
// {
//   "system": {"fixture": "exA" | "A": [[...]] | "A_file": "m.csv",
//              "noise": {"kind": "UH", "b2": 0.04, "dist": "normal"},
//              "x0": [1, 1, 1, 1, 1]},
//   "run": {"t_max": 40, "runs": 10000, "seed": 1, "p_list": [2],
//           "fit_window": [5, 40]},
//   "analysis": {"methods": [...], "r": 6, "lambda_grid": 99},
//   "output": {"directory": "out", "formats": ["csv", "json"]},
//   "ensemble": {...}   // optional, for the ensemble subcommand
// }

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlyap/dynamics.hpp"
#include "mlyap/ensemble.hpp"
#include "mlyap/noise.hpp"

namespace mlyap {

struct RunConfig {
  int t_max = 40;
  int runs = 10000;
  std::uint64_t seed = 0;
  std::vector<double> p_list{2.0};
  int fit_lo = 0;
  int fit_hi = 40;
};

struct AnalysisConfig {
  std::vector<std::string> methods;
  int r = 6;
  int lambda_grid = 99;
};

struct OutputConfig {
  std::string directory;
  std::vector<std::string> formats{"csv", "json"};
};

struct ExperimentConfig {
  SystemSpec system;
  RunConfig run;
  AnalysisConfig analysis;
  OutputConfig output;
  std::optional<EnsembleSpec> ensemble;
  std::string hash;  // of the canonical JSON text
};

NoiseModel noise_from_json(const nlohmann::json& j);
nlohmann::json noise_to_json(const NoiseModel& m);
MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const MatrixXd& A);
EnsembleSpec ensemble_from_json(const nlohmann::json& j);

/// `base_dir` resolves relative A_file paths.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

}  // namespace mlyap
