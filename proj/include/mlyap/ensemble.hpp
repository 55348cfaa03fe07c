#pragma once

// Random matrix ensembles and conditioning scatter studies.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlyap/core.hpp"
#include "mlyap/random.hpp"

namespace mlyap {

enum class Generator { Normal, Uniform, SparseNonneg, UniformSmallVar };

std::string_view to_string(Generator g);
Generator parse_generator(std::string_view text);

/// Entry laws:
///   Normal          N(param1, param2^2)
///   Uniform         U(param1, param2)
///   SparseNonneg    0 with probability zero_prob, else U(param1, param2)
///   UniformSmallVar uniform with mean param1 and standard deviation param2
struct EnsembleSpec {
  int n = 5;
  Generator generator = Generator::Normal;
  double param1 = 0.0;
  double param2 = 1.0;
  double zero_prob = 0.5;
  bool symmetric = false;  // mirror the upper triangle
  std::optional<double> normalize_lambda = 1.0;
  int count = 1;
  int max_attempts = 10000;

  void validate() const;
};

struct GeneratedMatrix {
  MatrixXd A;
  int attempts = 0;  // draws consumed, including the accepted one
};

/// One matrix with a real, simple dominant eigenvalue, rescaled so that
/// lambda equals normalize_lambda when set.
GeneratedMatrix generate(const EnsembleSpec& spec, Engine& rng);

struct ScatterRow {
  int draw_index = 0;
  double lambda = 0;
  double gap = 0;
  double kappa = 0;
  double w2 = 0;
  double henrici = 0;
  double sigma_A = 0;  // standard deviation of the entries
  int accepted_attempts = 0;
};

struct ScatterResult {
  std::vector<ScatterRow> rows;
  long long total_attempts = 0;
  double acceptance_rate = 0;
};

/// spec.count draws; draw i uses its own stream so the table does not depend
/// on the thread count.
ScatterResult scatter_study(const EnsembleSpec& spec, std::uint64_t seed,
                            int threads = 0);

/// CSV with draw_index, the requested metrics (subset of gap, kappa,
/// henrici, sigma_A, lambda, w2) and accepted_attempts.
std::string scatter_csv(const ScatterResult& result,
                        const std::vector<std::string>& metrics);

}  // namespace mlyap
