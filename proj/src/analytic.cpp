#include "mlyap/analytic.hpp"

#include "mlyap/random.hpp"

namespace mlyap {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ScalarExact: return "scalar_exact";
    case Method::ScalarApprox: return "scalar_approx";
    case Method::NoiseOnly: return "noise_only";
    case Method::Perturbation: return "perturbation";
    case Method::LargeN: return "large_n";
    case Method::Iteration: return "iteration_r";
    case Method::LargeNoise: return "large_noise";
    case Method::ExactOperator: return "exact_operator";
    case Method::ContinuousMVA: return "continuous_mva";
  }
  return "unknown";
}

ConvergenceBounds convergence_bounds(const MatrixXd& A, const NoiseModel& model,
                                     std::uint64_t seed, int samples) {
  require_square_finite(A, "convergence_bounds");
  model.validate();
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples >= 1");
  const auto triple = dominant_triple(A);
  if (!(std::abs(triple.lambda) < 1)) {
    throw Error(ErrorCode::UnstableMean,
                "dominant eigenvalue >= 1, the mean itself diverges");
  }
  const int n = static_cast<int>(A.rows());
  const double lam = std::abs(triple.lambda);

  ConvergenceBounds out;
  out.two_norm = matrix_two_norm(A);

  // <|B|> is linear in b (or q), so sample once at unit scale.
  NoiseModel unit = model;
  unit.truncate_at.reset();
  if (model.homogeneous()) {
    unit.b2 = 1.0;
  } else {
    unit.q = 1.0;
  }
  double total = 0;
  MatrixXd B(n, n);
  for (int s = 0; s < samples; ++s) {
    Engine rng = make_engine(seed, "analytic.bounds", static_cast<std::uint64_t>(s));
    sample_noise_into(unit, A, rng, B);
    total += matrix_two_norm(B);
  }
  out.unit_noise_norm = total / samples;
  const double scale = model.homogeneous() ? std::sqrt(model.b2) : model.q;
  out.mean_noise_norm = scale * out.unit_noise_norm;
  out.all_moment_holds = out.mean_noise_norm < 1.0 - out.two_norm;

  const double room = std::max(0.0, 1.0 - out.two_norm);
  out.all_moment_threshold =
      out.unit_noise_norm > 0 ? std::pow(room / out.unit_noise_norm, 2) : 0.0;
  if (model.kind == NoiseKind::UH || model.kind == NoiseKind::T) {
    out.second_moment_threshold =
        std::max(0.0, 1.0 - out.two_norm * out.two_norm) /
        int_pow(static_cast<double>(n), model.k());
  }
  out.large_n_all_moment = (1 - lam) * (1 - lam) / (4.0 * n);
  out.large_n_second_moment = (1 - lam * lam) / n;
  return out;
}

}  // namespace mlyap
