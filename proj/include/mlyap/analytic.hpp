#pragma once

// Closed-form and approximate moment Lyapunov exponents, critical noise
// levels and convergence bounds.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mlyap/core.hpp"
#include "mlyap/noise.hpp"
#include "mlyap/second_moment.hpp"
#include "mlyap/spectral.hpp"

namespace mlyap {

enum class Method {
  ScalarExact,
  ScalarApprox,
  NoiseOnly,
  Perturbation,
  LargeN,
  Iteration,
  LargeNoise,
  ExactOperator,
  ContinuousMVA,
};

std::string_view to_string(Method m);

template <typename Scalar>
struct LyapunovEstimate {
  Method method = Method::ExactOperator;
  int p = 2;
  Scalar value{};
  int r = 0;
  std::string validity;
  bool regime_ok = true;
};

// ---------------------------------------------------------------- scalar

/// <(b/a)^k> for k = 1..p, normal noise with variance b2.
template <typename Scalar>
std::vector<Scalar> normal_scaled_moments(Scalar a, Scalar b2, int p) {
  std::vector<Scalar> m(static_cast<std::size_t>(std::max(p, 0)));
  const Scalar s2 = b2 / (a * a);
  Scalar even(1);  // (k-1)!! s2^{k/2}
  for (int k = 1; k <= p; ++k) {
    if (k % 2 == 0) {
      even *= Scalar(k - 1) * s2;
      m[k - 1] = even;
    } else {
      m[k - 1] = 0;
    }
  }
  return m;
}

/// <(b/a)^k> for k = 1..p, uniform noise on [-sqrt(3 b2), sqrt(3 b2)].
template <typename Scalar>
std::vector<Scalar> uniform_scaled_moments(Scalar a, Scalar b2, int p) {
  std::vector<Scalar> m(static_cast<std::size_t>(std::max(p, 0)));
  const Scalar h = std::sqrt(Scalar(3) * b2) / std::abs(a);
  for (int k = 1; k <= p; ++k) {
    m[k - 1] = (k % 2 == 0) ? int_pow(h, k) / Scalar(k + 1) : Scalar(0);
  }
  return m;
}

/// <x_t^p> = x0^p a^{pt} (sum_{k=0}^p C(p,k) <(b/a)^k>)^t, k = 0 term is 1.
template <typename Scalar>
Scalar scalar_moment_exact(Scalar a, const std::vector<Scalar>& noise_moments,
                           int p, int t, Scalar x0) {
  if (p < 0 || t < 0) {
    throw Error(ErrorCode::InvalidArgument, "p and t must be >= 0");
  }
  if (static_cast<int>(noise_moments.size()) < p) {
    throw Error(ErrorCode::InvalidArgument, "need p noise moments");
  }
  Scalar sum(1);
  Scalar binom(1);
  for (int k = 1; k <= p; ++k) {
    binom = binom * Scalar(p - k + 1) / Scalar(k);
    sum += binom * noise_moments[k - 1];
  }
  return std::pow(x0, p) * std::pow(a, p * t) * std::pow(sum, t);
}

template <typename Scalar>
LyapunovEstimate<Scalar> scalar_Lp_approx(Scalar a, Scalar b2, int p,
                                          bool symmetric_noise = true) {
  LyapunovEstimate<Scalar> e;
  e.method = Method::ScalarApprox;
  e.p = p;
  const Scalar s2 = b2 / (a * a);
  e.value = Scalar(p) * std::log(std::abs(a)) +
            Scalar(p) * Scalar(p - 1) * s2 / Scalar(2);
  e.validity = symmetric_noise ? "error O((b/a)^4)" : "error O((b/a)^3)";
  if (std::sqrt(s2) > Scalar(0.3)) {
    e.regime_ok = false;
    e.validity += "; b/a > 0.3, outside the small-noise regime";
  }
  return e;
}

// ------------------------------------------------------------ A = 0 limit

template <typename Scalar = double>
LyapunovEstimate<Scalar> noise_only_L2(const NoiseModel& model, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (model.kind != NoiseKind::UH && model.kind != NoiseKind::T) {
    throw Error(ErrorCode::UnsupportedNoise,
                "noise-only limit is defined for UH and T noise");
  }
  LyapunovEstimate<Scalar> e;
  e.method = Method::NoiseOnly;
  e.value = std::log(int_pow(Scalar(n), model.k()) * Scalar(model.b2));
  e.validity = "A = 0";
  return e;
}

/// Unequal element variances: b2 replaced by their average.
template <typename Derived>
LyapunovEstimate<typename Derived::Scalar> noise_only_L2(
    const Eigen::MatrixBase<Derived>& variances, int k) {
  using Scalar = typename Derived::Scalar;
  if (variances.rows() != variances.cols() || variances.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "variance matrix must be square");
  }
  if (k != 1 && k != 2) throw Error(ErrorCode::InvalidArgument, "k is 1 or 2");
  const Scalar n(variances.rows());
  LyapunovEstimate<Scalar> e;
  e.method = Method::NoiseOnly;
  e.value = std::log(int_pow(n, k) * variances.mean());
  e.validity = "A = 0, averaged variance";
  return e;
}

// ------------------------------------------------------------ perturbation

template <typename Scalar>
LyapunovEstimate<Scalar> perturbation_Lp(const SpectralSummary<Scalar>& spec,
                                         const NoiseStats<Scalar>& stats,
                                         int p) {
  LyapunovEstimate<Scalar> e;
  e.method = Method::Perturbation;
  e.p = p;
  e.value = Scalar(p) * std::log(std::abs(spec.lambda)) +
            Scalar(p) * Scalar(p - 1) * stats.eps2 / Scalar(2);
  e.validity = "eps^2 << 1";
  if (stats.eps2 > Scalar(0.1)) {
    e.regime_ok = false;
    e.validity += "; eps^2 > 0.1, expansion unreliable";
  }
  e.validity += "; P(|eps| > 1) = 0 assumed, not checked";
  return e;
}

/// log <|x^t|^p> ~ p log|v.x0| + t L_p.
template <typename Scalar>
Scalar perturbation_log_moment(const SpectralSummary<Scalar>& spec,
                               const NoiseStats<Scalar>& stats, int p,
                               const Vector<Scalar>& x0, int t) {
  const Scalar proj = std::abs(spec.v.dot(x0));
  return Scalar(p) * std::log(proj) +
         Scalar(t) * perturbation_Lp(spec, stats, p).value;
}

/// Large-n forms for homogeneous noise on matrices with element mean a and
/// element variance sigma_a2.
template <typename Scalar>
LyapunovEstimate<Scalar> large_n_L2(int n, Scalar a, Scalar sigma_a2,
                                    Scalar b2, bool symmetric) {
  if (n < 1 || a == Scalar(0)) {
    throw Error(ErrorCode::InvalidArgument, "need n >= 1 and a != 0");
  }
  const Scalar nn(n);
  const Scalar s = b2 / (a * a);
  LyapunovEstimate<Scalar> e;
  e.method = Method::LargeN;
  if (symmetric) {
    const Scalar lambda = nn * a + sigma_a2 / a;
    e.value = Scalar(2) * std::log(std::abs(lambda)) +
              s / ((nn * nn + Scalar(2) * nn * sigma_a2 / (a * a)) / Scalar(2));
    e.validity = "large n, symmetric A";
  } else {
    const Scalar lambda = nn * a;
    e.value = Scalar(2) * std::log(std::abs(lambda)) + s / (nn * nn);
    e.validity = "large n, arbitrary A";
  }
  return e;
}

// --------------------------------------------------------------- iteration

namespace detail {

template <typename Scalar>
Scalar alpha_for(const SpectralSummary<Scalar>& spec,
                 const NoiseStats<Scalar>& stats, int j) {
  // T noise enters only through 1^T A^r 1; the Frobenius sum would not tend
  // to 1 and the recurrence would stop being exact for rank-one A.
  if (stats.k == 2) return spec.alpha_total(j - 1) / (stats.f_u * stats.f_v);
  // spec.alpha is stored with f_u = 1, f_v = v^2.
  return spec.alpha(j - 1) * spec.v2 / (stats.f_u * stats.f_v);
}

template <typename Scalar>
void require_iteration_support(const NoiseModel& model, int r) {
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "r must be >= 1");
  if (model.kind == NoiseKind::UP) {
    if (r != 1) {
      throw Error(ErrorCode::UnsupportedNoise,
                  "proportional noise supports only r = 1");
    }
    return;
  }
  if (model.kind != NoiseKind::UH && model.kind != NoiseKind::T) {
    throw Error(ErrorCode::UnsupportedNoise,
                "iteration method supports UH, T and (r = 1) UP noise");
  }
}

}  // namespace detail

/// (r+1) x (r+1) recurrence matrix for the split second moment.
///
/// State 0 collects terms with r or more trailing A's, state i (1..r-1)
/// terms with exactly r-i, and state r terms that start with B.
template <typename Scalar>
Matrix<Scalar> iteration_matrix(const SpectralSummary<Scalar>& spec,
                                const NoiseStats<Scalar>& stats,
                                const NoiseModel& model, int r) {
  detail::require_iteration_support<Scalar>(model, r);
  if (model.kind == NoiseKind::UP) {
    throw Error(ErrorCode::UnsupportedNoise,
                "no recurrence matrix for proportional noise");
  }
  if (spec.alpha.size() < r - 1) {
    throw Error(ErrorCode::InvalidArgument,
                "spectral summary holds too few alpha values");
  }
  const Scalar l2 = spec.lambda * spec.lambda;
  const Scalar nn(spec.n);
  const Scalar b2(model.b2);

  // a[j] = alpha_j for j < r, a[r] = 1.
  std::vector<Scalar> a(static_cast<std::size_t>(r) + 1, Scalar(1));
  for (int j = 1; j < r; ++j) a[j] = detail::alpha_for(spec, stats, j);

  Matrix<Scalar> M = Matrix<Scalar>::Zero(r + 1, r + 1);
  M(0, 0) = l2;
  for (int i = 1; i < r; ++i) {
    const int j = r - i;
    M(i - 1, i) = l2 * a[j + 1] / a[j];
  }
  M(r - 1, r) = l2 * a[1] * stats.f_v / nn;
  for (int c = 0; c < r; ++c) M(r, c) = nn * stats.f_u * b2;
  M(r, r) = int_pow(nn, stats.k) * b2;
  return M;
}

/// Perron root of an entrywise nonnegative, irreducible matrix.
template <typename Scalar>
Scalar perron_root(const Matrix<Scalar>& M, double tol = 1e-12,
                   int max_iterations = 100000) {
  Vector<Scalar> x = Vector<Scalar>::Ones(M.rows());
  for (int it = 0; it < max_iterations; ++it) {
    const Vector<Scalar> y = M * x;
    const Vector<Scalar> ratio = y.cwiseQuotient(x);
    const Scalar lo = ratio.minCoeff();
    const Scalar hi = ratio.maxCoeff();
    if (hi - lo <= Scalar(tol) * hi) return (lo + hi) / Scalar(2);
    // Averaging with x keeps the iteration from cycling on periodic M.
    x = (y / hi + x) / Scalar(2);
    x /= x.sum();
  }
  throw Error(ErrorCode::NonConvergence,
              "power iteration on the recurrence matrix hit the cap");
}

template <typename Scalar>
LyapunovEstimate<Scalar> iteration_L2(const SpectralSummary<Scalar>& spec,
                                      const NoiseStats<Scalar>& stats,
                                      const NoiseModel& model, int r) {
  detail::require_iteration_support<Scalar>(model, r);
  LyapunovEstimate<Scalar> e;
  e.method = Method::Iteration;
  e.r = r;
  const Scalar l2 = spec.lambda * spec.lambda;

  if (model.kind == NoiseKind::UP) {
    const Scalar s = Scalar(model.f() * model.q * model.q) * spec.w2;
    const Scalar d = Scalar(1) - s;
    e.value = std::log(l2 * (Scalar(1) + s +
                             std::sqrt(d * d + Scalar(4) * s * spec.w2)) /
                       Scalar(2));
    e.validity = "first approximation, proportional noise";
    return e;
  }
  if (model.b2 == 0) {
    e.value = std::log(l2);
    e.validity = "noise-free";
    return e;
  }
  if (r == 1) {
    // Closed form of the 2 x 2 case.
    const Scalar nkb2 = int_pow(Scalar(spec.n), stats.k) * Scalar(model.b2);
    const Scalar d = l2 - nkb2;
    const Scalar mu = (l2 + nkb2 +
                       std::sqrt(d * d + Scalar(4) * stats.f_u * stats.f_v *
                                             l2 * Scalar(model.b2))) /
                      Scalar(2);
    e.value = std::log(mu);
  } else {
    e.value = std::log(perron_root(iteration_matrix(spec, stats, model, r)));
  }
  e.validity = "homogeneous noise";
  return e;
}

template <typename Scalar>
LyapunovEstimate<Scalar> large_noise_L2(const SpectralSummary<Scalar>& spec,
                                        const NoiseStats<Scalar>& stats,
                                        int n, Scalar b2) {
  const Scalar nkb2 = int_pow(Scalar(n), stats.k) * b2;
  const Scalar l2 = spec.lambda * spec.lambda;
  LyapunovEstimate<Scalar> e;
  e.method = Method::LargeNoise;
  const Scalar delta = l2 / nkb2;
  // alpha_1 f_u f_v does not depend on the f convention.
  Scalar a1fufv = stats.f_u * stats.f_v;
  if (stats.k == 2 && spec.alpha_total.size() > 0) {
    a1fufv = spec.alpha_total(0);
  } else if (stats.k != 2 && spec.alpha.size() > 0) {
    a1fufv = spec.alpha(0) * spec.v2;
  }
  e.value = std::log(nkb2);
  if (delta != Scalar(0)) {
    e.value += delta * a1fufv / int_pow(Scalar(n), stats.k);
  }
  e.validity = "delta = lambda^2/(n^k b^2) << 1, well-behaved A";
  if (!(delta < Scalar(1))) {
    e.regime_ok = false;
    e.validity += "; RegimeViolation: delta >= 1";
  }
  return e;
}

template <typename Scalar>
LyapunovEstimate<Scalar> exact_operator_L2(const Matrix<Scalar>& A,
                                           const NoiseModel& model) {
  LyapunovEstimate<Scalar> e;
  e.method = Method::ExactOperator;
  const auto res = exact_L2(A, model);
  e.value = res.log_radius;
  e.validity = res.bracketed ? "bracketed" : "trace-ratio convergence";
  return e;
}

// --------------------------------------------------------- critical values

template <typename Scalar>
struct CriticalReport {
  Scalar bc2_small = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar bc2_large = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar bc2_unified = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar bc2_exact = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar qc = std::numeric_limits<Scalar>::quiet_NaN();
  bool exact_available = false;
  bool unstable_mean = false;
};

/// 1 / (n^k + F lambda^2 / (1 - lambda^2)).
template <typename Scalar>
Scalar critical_b2_formula(int n, int k, Scalar F, Scalar lambda) {
  const Scalar l2 = lambda * lambda;
  return Scalar(1) / (int_pow(Scalar(n), k) + F * l2 / (Scalar(1) - l2));
}

/// Root of exact_L2(b2) = 0 for a homogeneous model, by bisection.
template <typename Scalar>
Scalar critical_b2_exact(const Matrix<Scalar>& A, NoiseModel model,
                         Scalar guess, double tol = 1e-12) {
  if (!model.homogeneous()) {
    throw Error(ErrorCode::UnsupportedNoise,
                "critical b2 is defined for homogeneous noise");
  }
  auto L = [&](Scalar b2) {
    model.b2 = static_cast<double>(b2);
    return exact_L2(A, model).log_radius;
  };
  Scalar lo(0);
  Scalar hi = guess > 0 ? Scalar(2) * guess : Scalar(1);
  if (!(L(lo) < 0)) {
    throw Error(ErrorCode::UnstableMean, "second moment diverges at b2 = 0");
  }
  int expand = 0;
  while (L(hi) <= 0) {
    lo = hi;
    hi *= Scalar(2);
    if (++expand > 200) {
      throw Error(ErrorCode::NonConvergence, "no sign change for exact L2");
    }
  }
  for (int it = 0; it < 200 && hi - lo > Scalar(tol) * hi; ++it) {
    const Scalar mid = (lo + hi) / Scalar(2);
    (L(mid) > 0 ? hi : lo) = mid;
  }
  return (lo + hi) / Scalar(2);
}

/// Critical noise levels from every available method. Pass A to include the
/// bisection on the exact operator.
template <typename Scalar>
CriticalReport<Scalar> critical_value(const SpectralSummary<Scalar>& spec,
                                      const NoiseStats<Scalar>& stats,
                                      const NoiseModel& model, int n,
                                      const Matrix<Scalar>* A = nullptr) {
  if (model.kind != NoiseKind::UH && model.kind != NoiseKind::T) {
    throw Error(ErrorCode::UnsupportedNoise,
                "critical value formulas cover UH and T noise");
  }
  CriticalReport<Scalar> rep;
  if (!(std::abs(spec.lambda) < Scalar(1))) {
    rep.unstable_mean = true;
    return rep;
  }
  const Scalar F = stats.f_u * stats.f_v;
  rep.bc2_small = critical_b2_formula(n, stats.k, F, spec.lambda);
  rep.bc2_unified = rep.bc2_small;
  const Scalar a1 =
      spec.alpha.size() > 0 ? detail::alpha_for(spec, stats, 1) : Scalar(1);
  rep.bc2_large = critical_b2_formula(n, stats.k, a1 * F, spec.lambda);
  rep.qc = Scalar(n) / std::abs(spec.lambda) * std::sqrt(rep.bc2_unified);
  if (A != nullptr) {
    rep.bc2_exact = critical_b2_exact(*A, model, rep.bc2_unified);
    rep.exact_available = true;
  }
  return rep;
}

template <typename Scalar>
struct DiagramRow {
  Scalar lambda{};
  Scalar bc2{};
  Scalar qc{};
};

/// Stability boundary over lambda = i/(grid+1), i = 1..grid, with the
/// mean-value f_u f_v (1 for UH, n^2 for T).
template <typename Scalar = double>
std::vector<DiagramRow<Scalar>> stability_diagram(int n, NoiseKind kind,
                                                  int grid) {
  if (n < 1 || grid < 1) {
    throw Error(ErrorCode::InvalidArgument, "need n >= 1 and grid >= 1");
  }
  int k = 1;
  Scalar F(1);
  if (kind == NoiseKind::T) {
    k = 2;
    F = Scalar(n) * Scalar(n);
  } else if (kind != NoiseKind::UH) {
    throw Error(ErrorCode::UnsupportedNoise,
                "stability diagram covers UH and T noise");
  }
  std::vector<DiagramRow<Scalar>> rows;
  rows.reserve(static_cast<std::size_t>(grid));
  for (int i = 1; i <= grid; ++i) {
    DiagramRow<Scalar> row;
    row.lambda = Scalar(i) / Scalar(grid + 1);
    row.bc2 = critical_b2_formula(n, k, F, row.lambda);
    row.qc = Scalar(n) / row.lambda * std::sqrt(row.bc2);
    rows.push_back(row);
  }
  return rows;
}

// ------------------------------------------------------------------ bounds

struct ConvergenceBounds {
  double two_norm = 0;
  double mean_noise_norm = 0;    // <|B|> at the model's own parameter
  double unit_noise_norm = 0;    // <|B|> at b = 1 (or q = 1)
  bool all_moment_holds = false;  // <|B|> < 1 - |A|
  // Thresholds on b^2 (homogeneous) or q^2 (proportional).
  double all_moment_threshold = 0;
  double second_moment_threshold = std::numeric_limits<double>::quiet_NaN();
  double large_n_all_moment = 0;     // (1 - lambda)^2 / (4n)
  double large_n_second_moment = 0;  // (1 - lambda^2) / n
};

/// Sufficient conditions from norm inequalities. <|B|> is the mean two-norm
/// over `samples` draws. The second-moment threshold is defined for
/// homogeneous uncorrelated or totally correlated noise:
/// b^2 < (1 - |A|^2) / n^k.
ConvergenceBounds convergence_bounds(const MatrixXd& A, const NoiseModel& model,
                                     std::uint64_t seed, int samples = 1000);

// -------------------------------------------------- continuous cross-check

template <typename Scalar>
struct ContinuousComparison {
  LyapunovEstimate<Scalar> continuous;
  Scalar discrete{};
};

/// Mean-value system A = aG with T noise, lambda = n a = 1 - delta.
template <typename Scalar>
ContinuousComparison<Scalar> continuous_mva_Lp(int n, Scalar a, Scalar b2,
                                               int p) {
  const Scalar nn(n);
  const Scalar delta = Scalar(1) - nn * a;
  const Scalar pp(p);
  const Scalar noise = pp * (pp - Scalar(1)) * nn * nn * b2 / Scalar(2);
  ContinuousComparison<Scalar> out;
  out.continuous.method = Method::ContinuousMVA;
  out.continuous.p = p;
  out.continuous.value = -pp * delta + noise;
  out.continuous.validity = "mean-value system, T noise, small delta";
  out.discrete = -pp * delta + noise * (Scalar(1) - Scalar(2) * delta);
  return out;
}

}  // namespace mlyap
