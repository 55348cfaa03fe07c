#include "mlyap/report.hpp"

#include <cmath>

#include "mlyap/io.hpp"

namespace mlyap {

using nlohmann::json;

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json metadata_json(const std::string& config_hash, std::uint64_t seed) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"config_hash", config_hash},
          {"seed", seed}};
}

json to_json(const SpectralSummary<double>& s) {
  json alpha = json::array();
  for (Eigen::Index i = 0; i < s.alpha.size(); ++i) {
    alpha.push_back(number_or_null(s.alpha(i)));
  }
  json alpha_total = json::array();
  for (Eigen::Index i = 0; i < s.alpha_total.size(); ++i) {
    alpha_total.push_back(number_or_null(s.alpha_total(i)));
  }
  json u = json::array(), v = json::array();
  for (Eigen::Index i = 0; i < s.u.size(); ++i) {
    u.push_back(s.u(i));
    v.push_back(s.v(i));
  }
  return {{"n", s.n},
          {"lambda", s.lambda},
          {"lambda2_abs", s.lambda2_abs},
          {"gap", s.gap},
          {"kappa", s.kappa},
          {"v2", s.v2},
          {"w2", s.w2},
          {"henrici", s.henrici},
          {"alpha", alpha},
          {"alpha_total", alpha_total},
          {"u", u},
          {"v", v}};
}

json to_json(const CriticalReport<double>& c) {
  return {{"bc2_small", number_or_null(c.bc2_small)},
          {"bc2_large", number_or_null(c.bc2_large)},
          {"bc2_unified", number_or_null(c.bc2_unified)},
          {"bc2_exact", number_or_null(c.bc2_exact)},
          {"qc", number_or_null(c.qc)},
          {"unstable_mean", c.unstable_mean}};
}

json to_json(const ConvergenceBounds& b) {
  return {{"two_norm", b.two_norm},
          {"mean_noise_norm", b.mean_noise_norm},
          {"all_moment_holds", b.all_moment_holds},
          {"all_moment_threshold", number_or_null(b.all_moment_threshold)},
          {"second_moment_threshold",
           number_or_null(b.second_moment_threshold)},
          {"large_n_all_moment", b.large_n_all_moment},
          {"large_n_second_moment", b.large_n_second_moment}};
}

json to_json(const Classification& c) {
  json j = {{"kind", std::string(to_string(c.kind))}, {"blocks", c.blocks}};
  if (c.kind != StructureKind::Reducible) j["h"] = c.period;
  if (c.kind == StructureKind::IrreducibleImprimitive) {
    j["cyclic_classes"] = c.cyclic_classes;
  }
  if (c.kind == StructureKind::Reducible) j["permutation"] = c.permutation;
  return j;
}

json to_json(const LyapunovFit& f) {
  json j = {{"p", f.p},
            {"L", number_or_null(f.L)},
            {"ci", number_or_null(f.ci)},
            {"window", {f.t_lo, f.t_hi}}};
  if (!f.caveat.empty()) j["caveat"] = f.caveat;
  return j;
}

json to_json(const LyapunovEstimate<double>& e) {
  json j = {{"method", std::string(to_string(e.method))},
            {"p", e.p},
            {"value", number_or_null(e.value)},
            {"validity", e.validity},
            {"regime_ok", e.regime_ok}};
  if (e.method == Method::Iteration) j["r"] = e.r;
  return j;
}

namespace {

template <typename Fn>
MethodResult attempt(Fn&& fn) {
  MethodResult m;
  try {
    const LyapunovEstimate<double> e = fn();
    m.value = e.value;
    m.regime_ok = e.regime_ok;
    m.note = e.validity;
  } catch (const Error& err) {
    m.error = err.what();
  }
  return m;
}

}  // namespace

StabilityReport build_stability_report(const ExperimentConfig& cfg,
                                       int threads) {
  const SystemSpec& sys = cfg.system;
  sys.validate();
  StabilityReport rep;
  rep.noise = sys.noise;
  rep.r = cfg.analysis.r;
  rep.spectral = spectral_summary(sys.A, std::max(8, cfg.analysis.r));
  const int n = rep.spectral.n;

  try {
    rep.stats = epsilon_squared(sys.noise, rep.spectral, sys.A);
  } catch (const Error& e) {
    rep.caveats.push_back(e.what());
  }

  // Monte Carlo.
  {
    MethodResult m;
    try {
      std::vector<double> p_list = cfg.run.p_list;
      if (std::find(p_list.begin(), p_list.end(), 2.0) == p_list.end()) {
        p_list.push_back(2.0);
      }
      MomentOptions opt;
      opt.threads = threads;
      const auto series = estimate_moments(sys, p_list, cfg.run.t_max,
                                           cfg.run.runs, cfg.run.seed, opt);
      const auto fit =
          fit_lyapunov(series, 2.0, cfg.run.fit_lo, cfg.run.fit_hi);
      m.value = fit.L;
      m.ci = fit.ci;
      m.note = "window [" + std::to_string(fit.t_lo) + ", " +
               std::to_string(fit.t_hi) + "], " + std::to_string(cfg.run.runs) +
               " runs";
      if (!fit.caveat.empty()) rep.caveats.push_back(fit.caveat);
    } catch (const Error& e) {
      m.error = e.what();
    }
    rep.L2["monte_carlo"] = m;
  }

  rep.L2["exact_operator"] =
      attempt([&] { return exact_operator_L2<double>(sys.A, sys.noise); });
  if (rep.stats) {
    const auto& st = *rep.stats;
    rep.L2["perturbation"] =
        attempt([&] { return perturbation_Lp(rep.spectral, st, 2); });
    rep.L2["iteration"] = attempt(
        [&] { return iteration_L2(rep.spectral, st, sys.noise, rep.r); });
    if (sys.noise.homogeneous()) {
      rep.L2["large_noise"] = attempt([&] {
        return large_noise_L2(rep.spectral, st, n, sys.noise.b2);
      });
    }
    try {
      rep.critical = critical_value(rep.spectral, st, sys.noise, n, &sys.A);
    } catch (const Error& e) {
      rep.critical_error = e.what();
    }
  }
  try {
    rep.bounds = convergence_bounds(
        sys.A, sys.noise, derive_seed(cfg.run.seed, "report.bounds", 0));
  } catch (const Error& e) {
    rep.bounds_error = e.what();
  }
  if ((sys.A.array() >= 0).all()) rep.classification = classify(sys.A);
  if (sys.x0_orthogonal_to_v()) {
    rep.caveats.push_back("x0 is orthogonal to the left dominant eigenvector");
  }
  return rep;
}

json to_json(const StabilityReport& r) {
  json L2 = json::object();
  for (const auto& [name, m] : r.L2) {
    json j = json::object();
    if (m.error.empty()) {
      j["value"] = number_or_null(*m.value);
      if (m.ci) j["ci"] = number_or_null(*m.ci);
      j["regime_ok"] = m.regime_ok;
      j["note"] = m.note;
    } else {
      j["error"] = m.error;
    }
    if (name == "iteration") j["r"] = r.r;
    L2[name] = j;
  }
  json out = {{"spectral", to_json(r.spectral)},
              {"noise", noise_to_json(r.noise)},
              {"L2", L2},
              {"caveats", r.caveats}};
  if (r.stats) {
    out["noise_stats"] = {{"eps2", r.stats->eps2},
                          {"f_u", r.stats->f_u},
                          {"f_v", r.stats->f_v},
                          {"k", r.stats->k}};
  }
  if (r.critical) {
    out["critical"] = to_json(*r.critical);
  } else {
    out["critical"] = {{"error", r.critical_error}};
  }
  if (r.bounds) {
    out["bounds"] = to_json(*r.bounds);
  } else {
    out["bounds"] = {{"error", r.bounds_error}};
  }
  if (r.classification) out["classification"] = to_json(*r.classification);
  return out;
}

}  // namespace mlyap
