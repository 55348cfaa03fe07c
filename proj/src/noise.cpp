#include "mlyap/noise.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mlyap {

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::UH: return "UH";
    case NoiseKind::SH: return "SH";
    case NoiseKind::T: return "T";
    case NoiseKind::UP: return "UP";
    case NoiseKind::SP: return "SP";
  }
  return "UH";
}

std::string_view to_string(Distribution dist) {
  return dist == Distribution::Normal ? "normal" : "uniform";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "UH") return NoiseKind::UH;
  if (text == "SH") return NoiseKind::SH;
  if (text == "T") return NoiseKind::T;
  if (text == "UP") return NoiseKind::UP;
  if (text == "SP") return NoiseKind::SP;
  throw Error(ErrorCode::ConfigError,
              "unknown noise kind '" + std::string(text) + "'");
}

Distribution parse_distribution(std::string_view text) {
  if (text == "normal") return Distribution::Normal;
  if (text == "uniform") return Distribution::Uniform;
  throw Error(ErrorCode::ConfigError,
              "unknown distribution '" + std::string(text) + "'");
}

void NoiseModel::validate() const {
  if (!std::isfinite(b2) || b2 < 0) {
    throw Error(ErrorCode::InvalidArgument, "noise variance b2 must be >= 0");
  }
  if (!std::isfinite(q) || q < 0) {
    throw Error(ErrorCode::InvalidArgument, "noise factor q must be >= 0");
  }
  if (truncate_at && !(*truncate_at > 0)) {
    throw Error(ErrorCode::InvalidArgument, "truncation bound must be > 0");
  }
}

namespace {

constexpr int kMaxRejections = 10000;

// Unit-variance draw for homogeneous kinds.
class UnitVariance {
 public:
  explicit UnitVariance(Distribution d) : dist_(d) {}
  double operator()(Engine& rng) {
    if (dist_ == Distribution::Normal) return normal_(rng);
    return uniform_(rng);
  }

 private:
  Distribution dist_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-std::sqrt(3.0),
                                                  std::sqrt(3.0)};
};

// Standard-shaped draw for proportional kinds: N(0,1) or U(-1,1).
class UnitShape {
 public:
  explicit UnitShape(Distribution d) : dist_(d) {}
  double operator()(Engine& rng) {
    if (dist_ == Distribution::Normal) return normal_(rng);
    return uniform_(rng);
  }

 private:
  Distribution dist_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-1.0, 1.0};
};

template <typename Draw>
double draw_bounded(Draw&& draw, const std::optional<double>& bound) {
  if (!bound) return draw();
  for (int i = 0; i < kMaxRejections; ++i) {
    const double x = draw();
    if (std::abs(x) <= *bound) return x;
  }
  throw Error(ErrorCode::RejectionExhausted,
              "truncated noise rejected too many draws");
}

}  // namespace

void sample_noise_into(const NoiseModel& model, const MatrixXd& A,
                       Engine& rng, MatrixXd& B) {
  const Eigen::Index n = A.rows();
  if (B.rows() != n || B.cols() != n) B.resize(n, n);
  const auto& cap = model.truncate_at;

  switch (model.kind) {
    case NoiseKind::UH: {
      UnitVariance z(model.dist);
      const double b = std::sqrt(model.b2);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          B(i, j) = draw_bounded([&] { return b * z(rng); }, cap);
      return;
    }
    case NoiseKind::T: {
      UnitVariance z(model.dist);
      const double b = std::sqrt(model.b2);
      B.setConstant(draw_bounded([&] { return b * z(rng); }, cap));
      return;
    }
    case NoiseKind::SH: {
      detail::require_symmetric_for(model, A);
      UnitVariance z(model.dist);
      const double b = std::sqrt(model.b2);
      const double bd = std::sqrt(2.0 * model.b2);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
          B(i, j) = B(j, i) = draw_bounded([&] { return b * z(rng); }, cap);
        }
        B(j, j) = draw_bounded([&] { return bd * z(rng); }, cap);
      }
      return;
    }
    case NoiseKind::UP: {
      UnitShape z(model.dist);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
          const double s = model.q * A(i, j);
          B(i, j) = draw_bounded([&] { return s * z(rng); }, cap);
        }
      return;
    }
    case NoiseKind::SP: {
      detail::require_symmetric_for(model, A);
      UnitShape z(model.dist);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const double s = model.q * A(i, j);
          B(i, j) = B(j, i) = draw_bounded([&] { return s * z(rng); }, cap);
        }
        const double s = std::sqrt(2.0) * model.q * A(j, j);
        B(j, j) = draw_bounded([&] { return s * z(rng); }, cap);
      }
      return;
    }
  }
}

MatrixXd sample_noise(const NoiseModel& model, const MatrixXd& A,
                      Engine& rng) {
  require_square_finite(A, "sample_noise");
  model.validate();
  MatrixXd B(A.rows(), A.cols());
  sample_noise_into(model, A, rng, B);
  return B;
}

}  // namespace mlyap
