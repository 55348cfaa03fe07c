#include "mlyap/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "mlyap/spectral.hpp"

namespace mlyap {

namespace {

constexpr int kBlock = 1024;
constexpr double kRescaleHigh = 1e100;
constexpr double kRescaleLow = 1e-100;

// Runs fn(block_index) for every block on `threads` workers. Output slots are
// owned by block index, so the result does not depend on the schedule.
template <typename Fn>
void for_each_block(int blocks, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, blocks));
  if (threads == 1) {
    for (int b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int b = next++; b < blocks; b = next++) {
        if (failed) return;
        try {
          fn(b);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Pairwise sum, fixed association for a given length.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

// State carried as x = exp(log_scale) * y.
struct ScaledState {
  VectorXd y;
  double log_scale = 0;
  bool bad = false;

  double log_norm() const {
    const double nrm = y.norm();
    return nrm > 0 ? log_scale + std::log(nrm)
                   : -std::numeric_limits<double>::infinity();
  }
};

class Stepper {
 public:
  explicit Stepper(const SystemSpec& sys)
      : sys_(sys), n_(sys.A.rows()), B_(n_, n_), M_(n_, n_), tmp_(n_) {}

  void step(ScaledState& s, Engine& rng) {
    sample_noise_into(sys_.noise, sys_.A, rng, B_);
    M_.noalias() = sys_.A + B_;
    tmp_.noalias() = M_ * s.y;
    s.y.swap(tmp_);
    const double nrm = s.y.norm();
    if (!std::isfinite(nrm)) {
      s.bad = true;
      return;
    }
    if (nrm > kRescaleHigh || (nrm < kRescaleLow && nrm > 0)) {
      s.log_scale += std::log(nrm);
      s.y /= nrm;
    }
  }

 private:
  const SystemSpec& sys_;
  Eigen::Index n_;
  MatrixXd B_, M_;
  VectorXd tmp_;
};

ScaledState initial_state(const SystemSpec& sys) {
  ScaledState s;
  s.y = sys.x0;
  return s;
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void SystemSpec::validate() const {
  require_square_finite(A, "SystemSpec");
  if (x0.size() != A.rows()) {
    throw Error(ErrorCode::InvalidArgument, "x0 dimension does not match A");
  }
  if (!x0.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "x0 has non-finite entries");
  }
  noise.validate();
  detail::require_symmetric_for(noise, A);
}

bool SystemSpec::x0_orthogonal_to_v() const {
  try {
    const auto triple = dominant_triple(A);
    return std::abs(triple.v.dot(x0)) <=
           1e-10 * triple.v.norm() * std::max(x0.norm(), 1e-300);
  } catch (const Error&) {
    return false;
  }
}

Trajectory simulate_trajectory(const SystemSpec& sys, int t_max, Engine& rng) {
  sys.validate();
  if (t_max < 1) throw Error(ErrorCode::InvalidArgument, "t_max must be >= 1");
  Trajectory out;
  out.states.reserve(static_cast<std::size_t>(t_max) + 1);
  out.states.push_back(sys.x0);
  const Eigen::Index n = sys.A.rows();
  MatrixXd B(n, n);
  VectorXd x = sys.x0;
  for (int t = 1; t <= t_max; ++t) {
    sample_noise_into(sys.noise, sys.A, rng, B);
    x = (sys.A + B) * x;
    if (!x.allFinite()) {
      out.overflow = true;
      break;
    }
    out.states.push_back(x);
  }
  return out;
}

MomentSeries estimate_moments(const SystemSpec& sys,
                              const std::vector<double>& p_orders, int t_max,
                              int runs, std::uint64_t seed,
                              const MomentOptions& options) {
  sys.validate();
  if (runs < 1) throw Error(ErrorCode::InvalidArgument, "runs must be >= 1");
  if (t_max < 0) throw Error(ErrorCode::InvalidArgument, "t_max must be >= 0");
  if (p_orders.empty()) {
    throw Error(ErrorCode::InvalidArgument, "need at least one moment order");
  }
  for (double p : p_orders) {
    if (!std::isfinite(p) || p <= 0) {
      throw Error(ErrorCode::InvalidArgument, "moment orders must be > 0");
    }
  }
  const int T = t_max + 1;
  const Eigen::Index n = sys.A.rows();
  const int threads = resolve_threads(options.threads);
  const int blocks = (runs + kBlock - 1) / kBlock;

  // log|x^t| per run, row-major by run.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> logs(
      runs, T);
  std::vector<std::vector<int>> bad(static_cast<std::size_t>(blocks),
                                    std::vector<int>(T, 0));
  std::vector<MatrixXd> mean_sum, mean_sq;
  if (options.track_mean) {
    mean_sum.assign(blocks, MatrixXd::Zero(n, T));
    mean_sq.assign(blocks, MatrixXd::Zero(n, T));
  }

  for_each_block(blocks, threads, [&](int b) {
    Stepper stepper(sys);
    const int r0 = b * kBlock;
    const int r1 = std::min(runs, r0 + kBlock);
    for (int r = r0; r < r1; ++r) {
      Engine rng = make_engine(seed, "dynamics.run", static_cast<std::uint64_t>(r));
      ScaledState s = initial_state(sys);
      for (int t = 0; t < T; ++t) {
        if (t > 0 && !s.bad) stepper.step(s, rng);
        if (s.bad) {
          logs(r, t) = std::numeric_limits<double>::quiet_NaN();
          ++bad[b][t];
          continue;
        }
        logs(r, t) = s.log_norm();
        if (options.track_mean) {
          const VectorXd x = std::exp(s.log_scale) * s.y;
          mean_sum[b].col(t) += x;
          mean_sq[b].col(t) += x.cwiseAbs2();
        }
      }
    }
  });

  MomentSeries out;
  out.p_orders = p_orders;
  out.t_max = t_max;
  out.runs = runs;
  out.seed = seed;
  out.flagged_runs.assign(T, 0);
  for (int b = 0; b < blocks; ++b)
    for (int t = 0; t < T; ++t) out.flagged_runs[t] += bad[b][t];

  const std::size_t P = p_orders.size();
  out.estimates.assign(T, std::vector<double>(P, 0.0));
  out.stderr_.assign(T, std::vector<double>(P, 0.0));
  out.log_estimates.assign(T, std::vector<double>(P, 0.0));
  out.log_replicates.assign(P, {});

  const double log_x0 = std::log(sys.x0.norm());
  std::vector<double> column(static_cast<std::size_t>(runs));
  for (std::size_t k = 0; k < P; ++k) {
    const double p = p_orders[k];
    // Weights exp(p log|x| - shift_t); flagged runs contribute nothing.
    MatrixXd W(runs, T);
    std::vector<double> shift(T, 0.0);
    for (int t = 0; t < T; ++t) {
      double m = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < runs; ++r) {
        const double v = p * logs(r, t);
        if (std::isfinite(v)) m = std::max(m, v);
      }
      shift[t] = std::isfinite(m) ? m : 0.0;
      const int good = runs - out.flagged_runs[t];
      for (int r = 0; r < runs; ++r) {
        const double v = p * logs(r, t);
        W(r, t) = std::isnan(v) ? 0.0 : std::exp(v - shift[t]);
        column[r] = W(r, t);
      }
      const double mean = pairwise_sum(column.data(), column.size()) /
                          std::max(good, 1);
      out.log_estimates[t][k] = std::log(mean) + shift[t];
    }
    // Exact initial value.
    out.log_estimates[0][k] = p * log_x0;
    for (int t = 0; t < T; ++t) {
      out.estimates[t][k] = std::exp(out.log_estimates[t][k]);
    }

    if (options.bootstrap > 0 && runs > 1) {
      const int R = options.bootstrap;
      auto& reps = out.log_replicates[k];
      reps.assign(R, std::vector<double>(T, 0.0));
      for_each_block(R, threads, [&](int rep) {
        Engine rng = make_engine(seed, "dynamics.bootstrap",
                                 static_cast<std::uint64_t>(rep));
        std::uniform_int_distribution<int> pick(0, runs - 1);
        VectorXd counts = VectorXd::Zero(runs);
        for (int i = 0; i < runs; ++i) counts(pick(rng)) += 1.0;
        const VectorXd sums = W.transpose() * counts;
        for (int t = 0; t < T; ++t) {
          // Resampled ensemble keeps the same number of unflagged runs only
          // approximately; normalizing by the drawn count of good runs.
          double good = runs;
          if (out.flagged_runs[t] > 0) {
            good = 0;
            for (int r = 0; r < runs; ++r)
              if (!std::isnan(logs(r, t))) good += counts(r);
          }
          reps[rep][t] = std::log(sums(t) / std::max(good, 1.0)) + shift[t];
        }
        reps[rep][0] = p * log_x0;
      });
      for (int t = 1; t < T; ++t) {
        double m = 0, m2 = 0;
        for (int rep = 0; rep < R; ++rep) {
          const double v = std::exp(reps[rep][t]);
          m += v;
          m2 += v * v;
        }
        m /= R;
        const double var = std::max(0.0, m2 / R - m * m) * R / (R - 1.0);
        out.stderr_[t][k] = std::sqrt(var);
      }
    }
  }

  if (options.track_mean) {
    out.mean_state.assign(T, VectorXd::Zero(n));
    out.mean_stderr.assign(T, VectorXd::Zero(n));
    for (int t = 0; t < T; ++t) {
      VectorXd s = VectorXd::Zero(n), s2 = VectorXd::Zero(n);
      for (int b = 0; b < blocks; ++b) {
        s += mean_sum[b].col(t);
        s2 += mean_sq[b].col(t);
      }
      const double good = std::max(1, runs - out.flagged_runs[t]);
      const VectorXd mean = s / good;
      VectorXd var = (s2 / good - mean.cwiseAbs2()).cwiseMax(0.0);
      if (good > 1) var *= good / (good - 1.0);
      out.mean_state[t] = mean;
      out.mean_stderr[t] = (var / good).cwiseSqrt();
    }
  }
  return out;
}

LyapunovFit fit_lyapunov(const MomentSeries& series, double p, int t_lo,
                         int t_hi, double baseline) {
  const auto it = std::find(series.p_orders.begin(), series.p_orders.end(), p);
  if (it == series.p_orders.end()) {
    throw Error(ErrorCode::InvalidArgument, "moment order not in series");
  }
  const std::size_t k = static_cast<std::size_t>(it - series.p_orders.begin());
  if (t_lo < 0 || t_hi > series.t_max || t_hi - t_lo + 1 < 5) {
    throw Error(ErrorCode::DegenerateWindow,
                "window must hold at least 5 points inside the series");
  }
  for (int t = t_lo; t <= t_hi; ++t) {
    const double y = series.log_estimates[t][k];
    if (!std::isfinite(y) || series.flagged_runs[t] > 0) {
      throw Error(ErrorCode::DegenerateWindow,
                  "non-positive or flagged estimate at t = " +
                      std::to_string(t));
    }
  }
  const double tbar = 0.5 * (t_lo + t_hi);
  double sxx = 0;
  for (int t = t_lo; t <= t_hi; ++t) sxx += (t - tbar) * (t - tbar);
  auto slope = [&](auto&& y_of) {
    double sxy = 0;
    for (int t = t_lo; t <= t_hi; ++t) sxy += (t - tbar) * y_of(t);
    return sxy / sxx;
  };

  LyapunovFit fit;
  fit.p = p;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.L = slope([&](int t) { return series.log_estimates[t][k]; }) - baseline;

  const auto& reps = series.log_replicates[k];
  if (!reps.empty()) {
    double s = 0, s2 = 0;
    int used = 0;
    for (const auto& rep : reps) {
      bool ok = true;
      for (int t = t_lo; t <= t_hi && ok; ++t) ok = std::isfinite(rep[t]);
      if (!ok) continue;
      const double b = slope([&](int t) { return rep[t]; });
      s += b;
      s2 += b * b;
      ++used;
    }
    if (used > 1) {
      const double mean = s / used;
      const double var = std::max(0.0, s2 / used - mean * mean) * used /
                         (used - 1.0);
      fit.ci = 1.96 * std::sqrt(var);
    }
  } else {
    // Independent-error propagation of the relative standard errors.
    double var = 0;
    for (int t = t_lo; t <= t_hi; ++t) {
      const double rel = series.stderr_[t][k] / series.estimates[t][k];
      const double w = (t - tbar) / sxx;
      var += w * w * rel * rel;
    }
    fit.ci = 1.96 * std::sqrt(var);
  }
  if (fit.L + baseline > 0) {
    fit.caveat =
        "moment diverges; a finite ensemble underestimates divergent moments "
        "at large t";
  }
  return fit;
}

LogHistogram log_state_histogram(const SystemSpec& sys, int t, int runs,
                                 std::uint64_t seed, int threads) {
  sys.validate();
  if (t < 1 || runs < 1) {
    throw Error(ErrorCode::InvalidArgument, "need t >= 1 and runs >= 1");
  }
  VectorXd expected = sys.x0;
  for (int i = 0; i < t; ++i) expected = sys.A * expected;
  if (!(expected(0) > 0)) {
    throw Error(ErrorCode::InvalidArgument,
                "first component of the expected state must be positive");
  }
  const double log_expected = std::log(expected(0));

  const int blocks = (runs + kBlock - 1) / kBlock;
  std::vector<double> value(static_cast<std::size_t>(runs), 0.0);
  std::vector<char> keep(static_cast<std::size_t>(runs), 0);
  for_each_block(blocks, resolve_threads(threads), [&](int b) {
    Stepper stepper(sys);
    const int r0 = b * kBlock;
    const int r1 = std::min(runs, r0 + kBlock);
    for (int r = r0; r < r1; ++r) {
      Engine rng = make_engine(seed, "dynamics.histogram",
                               static_cast<std::uint64_t>(r));
      ScaledState s = initial_state(sys);
      for (int i = 0; i < t && !s.bad; ++i) stepper.step(s, rng);
      if (!s.bad && s.y(0) > 0) {
        value[r] = s.log_scale + std::log(s.y(0)) - log_expected;
        keep[r] = 1;
      }
    }
  });

  LogHistogram h;
  for (int r = 0; r < runs; ++r) {
    if (keep[r]) {
      h.samples.push_back(value[r]);
    } else {
      ++h.sign_flips;
    }
  }
  if (!h.samples.empty()) {
    const double m = pairwise_sum(h.samples.data(), h.samples.size()) /
                     static_cast<double>(h.samples.size());
    double ss = 0;
    for (double v : h.samples) ss += (v - m) * (v - m);
    h.mean = m;
    h.sd = h.samples.size() > 1
               ? std::sqrt(ss / static_cast<double>(h.samples.size() - 1))
               : 0.0;
  }
  const auto spec = spectral_summary(sys.A, 1);
  const auto stats = epsilon_squared(sys.noise, spec, sys.A);
  h.predicted_mean = -0.5 * t * stats.eps2;
  h.predicted_sd = std::sqrt(t * stats.eps2);
  return h;
}

}  // namespace mlyap
