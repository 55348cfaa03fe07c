#pragma once

// Monte Carlo simulation of x^t = (A + B^t) x^{t-1} and moment estimation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlyap/core.hpp"
#include "mlyap/noise.hpp"
#include "mlyap/random.hpp"

namespace mlyap {

struct SystemSpec {
  MatrixXd A;
  NoiseModel noise;
  VectorXd x0;

  void validate() const;
  /// True when x0 is numerically orthogonal to the left dominant eigenvector.
  bool x0_orthogonal_to_v() const;
};

struct Trajectory {
  std::vector<VectorXd> states;  // x^0 .. x^T
  bool overflow = false;         // truncated when |x| left the double range
};

Trajectory simulate_trajectory(const SystemSpec& sys, int t_max, Engine& rng);

struct MomentOptions {
  int threads = 0;           // 0 = hardware concurrency
  int bootstrap = 200;       // resamples; 0 disables standard errors
  bool track_mean = false;   // component-wise mean state with s.e.
};

/// Per-time moment estimates. estimates/stderr are indexed [t][k] with k the
/// position in p_orders. Log estimates are kept so fits survive moments that
/// overflow double.
struct MomentSeries {
  std::vector<double> p_orders;
  int t_max = 0;
  int runs = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> estimates;
  std::vector<std::vector<double>> stderr_;
  std::vector<std::vector<double>> log_estimates;
  // Bootstrap replicates of the log estimate: [k][replicate][t].
  std::vector<std::vector<std::vector<double>>> log_replicates;
  std::vector<int> flagged_runs;  // runs whose state went to zero/non-finite, per t
  // Optional mean state and its standard error, [t] -> vector.
  std::vector<VectorXd> mean_state;
  std::vector<VectorXd> mean_stderr;
};

MomentSeries estimate_moments(const SystemSpec& sys,
                              const std::vector<double>& p_orders, int t_max,
                              int runs, std::uint64_t seed,
                              const MomentOptions& options = {});

struct LyapunovFit {
  double p = 2;
  double L = 0;
  double ci = 0;  // 95% half-width
  int t_lo = 0;
  int t_hi = 0;
  std::string caveat;
};

/// Least-squares slope of log <|x^t|^p> over [t_lo, t_hi]. `baseline` is
/// subtracted from the slope (e.g. p log lambda for a normalized fit).
LyapunovFit fit_lyapunov(const MomentSeries& series, double p, int t_lo,
                         int t_hi, double baseline = 0.0);

struct LogHistogram {
  std::vector<double> samples;  // log(x^t_1 / <x^t_1>)
  double mean = 0;
  double sd = 0;
  int sign_flips = 0;  // runs excluded because x^t_1 <= 0
  double predicted_mean = 0;
  double predicted_sd = 0;
};

/// Normalized log of the first state component at time t. The expected value
/// is A^t x0; predictions use eps2 from the supplied model.
LogHistogram log_state_histogram(const SystemSpec& sys, int t, int runs,
                                 std::uint64_t seed, int threads = 0);

int resolve_threads(int requested);

}  // namespace mlyap
