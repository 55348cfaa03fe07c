#include "mlyap/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "mlyap/dynamics.hpp"
#include "mlyap/spectral.hpp"

namespace mlyap {

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::Normal: return "normal";
    case Generator::Uniform: return "uniform";
    case Generator::SparseNonneg: return "sparse_nonneg";
    case Generator::UniformSmallVar: return "uniform_smallvar";
  }
  return "normal";
}

Generator parse_generator(std::string_view text) {
  if (text == "normal") return Generator::Normal;
  if (text == "uniform") return Generator::Uniform;
  if (text == "sparse_nonneg") return Generator::SparseNonneg;
  if (text == "uniform_smallvar") return Generator::UniformSmallVar;
  throw Error(ErrorCode::ConfigError,
              "unknown generator '" + std::string(text) + "'");
}

void EnsembleSpec::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "ensemble n must be >= 1");
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  if (max_attempts < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_attempts must be >= 1");
  }
  if (!std::isfinite(param1) || !std::isfinite(param2)) {
    throw Error(ErrorCode::InvalidArgument, "generator parameters not finite");
  }
  if (!(zero_prob >= 0 && zero_prob < 1)) {
    throw Error(ErrorCode::InvalidArgument, "zero_prob must be in [0, 1)");
  }
  if ((generator == Generator::Uniform ||
       generator == Generator::SparseNonneg) &&
      !(param1 < param2)) {
    throw Error(ErrorCode::InvalidArgument, "uniform range needs lo < hi");
  }
  if ((generator == Generator::Normal ||
       generator == Generator::UniformSmallVar) &&
      param2 < 0) {
    throw Error(ErrorCode::InvalidArgument, "standard deviation must be >= 0");
  }
  if (normalize_lambda && !(std::isfinite(*normalize_lambda) &&
                            *normalize_lambda != 0)) {
    throw Error(ErrorCode::InvalidArgument, "normalize_lambda must be nonzero");
  }
}

namespace {

double draw_entry(const EnsembleSpec& s, Engine& rng) {
  switch (s.generator) {
    case Generator::Normal:
      return std::normal_distribution<double>(s.param1, s.param2)(rng);
    case Generator::Uniform:
      return std::uniform_real_distribution<double>(s.param1, s.param2)(rng);
    case Generator::SparseNonneg: {
      if (std::uniform_real_distribution<double>(0, 1)(rng) < s.zero_prob)
        return 0.0;
      return std::uniform_real_distribution<double>(s.param1, s.param2)(rng);
    }
    case Generator::UniformSmallVar: {
      const double h = std::sqrt(3.0) * s.param2;
      return std::uniform_real_distribution<double>(s.param1 - h,
                                                    s.param1 + h)(rng);
    }
  }
  return 0.0;
}

}  // namespace

GeneratedMatrix generate(const EnsembleSpec& spec, Engine& rng) {
  spec.validate();
  GeneratedMatrix out;
  MatrixXd A(spec.n, spec.n);
  for (int attempt = 1; attempt <= spec.max_attempts; ++attempt) {
    for (int i = 0; i < spec.n; ++i)
      for (int j = 0; j < spec.n; ++j) {
        if (spec.symmetric && j < i) {
          A(i, j) = A(j, i);
        } else {
          A(i, j) = draw_entry(spec, rng);
        }
      }
    try {
      const auto triple = dominant_triple(A);
      if (spec.normalize_lambda && triple.lambda == 0) continue;
      out.attempts = attempt;
      out.A = spec.normalize_lambda ? MatrixXd(A * (*spec.normalize_lambda /
                                                    triple.lambda))
                                    : A;
      return out;
    } catch (const Error& e) {
      // defective here means a numerically nilpotent draw: not simple either
      if (e.code() != ErrorCode::ComplexDominant &&
          e.code() != ErrorCode::NonSimpleDominant &&
          e.code() != ErrorCode::DefectiveMatrix) {
        throw;
      }
    }
  }
  throw Error(ErrorCode::RejectionExhausted,
              "no acceptable matrix within " +
                  std::to_string(spec.max_attempts) + " attempts");
}

ScatterResult scatter_study(const EnsembleSpec& spec, std::uint64_t seed,
                            int threads) {
  spec.validate();
  ScatterResult res;
  res.rows.resize(static_cast<std::size_t>(spec.count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (int i = next++; i < spec.count; i = next++) {
      if (failed) return;
      try {
        Engine rng = make_engine(seed, "ensemble.draw", static_cast<std::uint64_t>(i));
        const auto g = generate(spec, rng);
        const auto s = spectral_summary(g.A, 0);
        ScatterRow& row = res.rows[i];
        row.draw_index = i;
        row.lambda = s.lambda;
        row.gap = s.gap;
        row.kappa = s.kappa;
        row.w2 = s.w2;
        row.henrici = s.henrici;
        const double mean = g.A.mean();
        row.sigma_A = std::sqrt((g.A.array() - mean).square().sum() /
                                static_cast<double>(g.A.size()));
        row.accepted_attempts = g.attempts;
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  const int nt = std::max(1, std::min(resolve_threads(threads), spec.count));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (const auto& r : res.rows) res.total_attempts += r.accepted_attempts;
  res.acceptance_rate =
      static_cast<double>(spec.count) / static_cast<double>(res.total_attempts);
  return res;
}

std::string scatter_csv(const ScatterResult& result,
                        const std::vector<std::string>& metrics) {
  static const std::vector<std::string> known = {"gap",     "kappa",  "henrici",
                                                 "sigma_A", "lambda", "w2"};
  for (const auto& m : metrics) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw Error(ErrorCode::ConfigError, "unknown metric '" + m + "'");
    }
  }
  if (metrics.empty()) throw Error(ErrorCode::ConfigError, "no metrics");
  std::ostringstream os;
  os.precision(17);
  os << "draw_index";
  for (const auto& m : metrics) os << ',' << m;
  os << ",accepted_attempts\n";
  for (const auto& r : result.rows) {
    os << r.draw_index;
    for (const auto& m : metrics) {
      double v = 0;
      if (m == "gap") v = r.gap;
      else if (m == "kappa") v = r.kappa;
      else if (m == "henrici") v = r.henrici;
      else if (m == "sigma_A") v = r.sigma_A;
      else if (m == "lambda") v = r.lambda;
      else if (m == "w2") v = r.w2;
      os << ',' << v;
    }
    os << ',' << r.accepted_attempts << '\n';
  }
  return os.str();
}

}  // namespace mlyap
