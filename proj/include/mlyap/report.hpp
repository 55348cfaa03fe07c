#pragma once

// Stability report: L_2 from every method, critical values, bounds and the
// structural classification, serialized as JSON.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlyap/analytic.hpp"
#include "mlyap/config.hpp"
#include "mlyap/dynamics.hpp"
#include "mlyap/structure.hpp"

namespace mlyap {

struct MethodResult {
  std::optional<double> value;
  std::optional<double> ci;  // Monte Carlo only
  bool regime_ok = true;
  std::string note;
  std::string error;  // set when the method does not apply
};

struct StabilityReport {
  SpectralSummary<double> spectral;
  std::optional<NoiseStats<double>> stats;
  NoiseModel noise;
  int r = 6;
  std::map<std::string, MethodResult> L2;
  std::optional<CriticalReport<double>> critical;
  std::string critical_error;
  std::optional<ConvergenceBounds> bounds;
  std::string bounds_error;
  std::optional<Classification> classification;
  std::vector<std::string> caveats;
};

StabilityReport build_stability_report(const ExperimentConfig& cfg,
                                       int threads = 0);

nlohmann::json metadata_json(const std::string& config_hash,
                             std::uint64_t seed);
nlohmann::json to_json(const SpectralSummary<double>& s);
nlohmann::json to_json(const CriticalReport<double>& c);
nlohmann::json to_json(const ConvergenceBounds& b);
nlohmann::json to_json(const Classification& c);
nlohmann::json to_json(const LyapunovFit& f);
nlohmann::json to_json(const LyapunovEstimate<double>& e);
nlohmann::json to_json(const StabilityReport& r);

/// NaN and infinities become null.
nlohmann::json number_or_null(double v);

}  // namespace mlyap
