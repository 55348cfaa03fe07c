#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlyap/analytic.hpp"
#include "mlyap/config.hpp"
#include "mlyap/dynamics.hpp"
#include "mlyap/ensemble.hpp"
#include "mlyap/io.hpp"
#include "mlyap/report.hpp"
#include "mlyap/structure.hpp"

using nlohmann::json;
using namespace mlyap;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

int exit_code_for(ErrorCode c) {
  return (c == ErrorCode::ConfigError || c == ErrorCode::InvalidArgument) ? 2
                                                                          : 3;
}

void emit_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

ExperimentConfig need_config(const Globals& g) {
  if (g.config.empty()) {
    throw Error(ErrorCode::ConfigError, "this subcommand needs --config");
  }
  ExperimentConfig cfg = load_config(g.config);
  if (g.seed) cfg.run.seed = *g.seed;
  return cfg;
}

void require_system(const ExperimentConfig& cfg) {
  if (cfg.system.A.size() == 0) {
    throw Error(ErrorCode::ConfigError, "config has no system section");
  }
}

// Writes to <out>/<name> or, without --out, to stdout.
void emit(const Globals& g, const std::string& name, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(g.out);
  write_text_file((std::filesystem::path(g.out) / name).string(), text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment Lyapunov exponents of linear systems with "
               "multiplicative noise"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON experiment config");
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out", g.out, "output directory (default: stdout)");
  app.add_option("--threads", g.threads, "worker threads (0 = all)")
      ->check(CLI::NonNegativeNumber);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo moment series");
  auto* lyapunov = app.add_subcommand("lyapunov", "fitted moment exponents");
  auto* iterate = app.add_subcommand("iterate", "iteration-method L2 by order r");
  int r_max = 0;
  iterate->add_option("--r", r_max, "highest order (default: config r)");
  auto* critical = app.add_subcommand("critical", "critical noise variance");
  auto* phase = app.add_subcommand("phase", "stability diagram CSV");
  int phase_n = 5, phase_grid = 99;
  std::string phase_noise = "UH";
  phase->add_option("--n", phase_n, "dimension")->check(CLI::PositiveNumber);
  phase->add_option("--noise", phase_noise, "UH or T");
  phase->add_option("--grid", phase_grid, "grid points")
      ->check(CLI::PositiveNumber);
  auto* bounds = app.add_subcommand("bounds", "norm-based convergence bounds");
  auto* classify_cmd = app.add_subcommand("classify", "nonnegative structure");
  std::string matrix_path;
  classify_cmd->add_option("--matrix", matrix_path, "matrix CSV")->required();
  auto* ensemble = app.add_subcommand("ensemble", "random-matrix scatter study");
  std::vector<std::string> metrics{"gap", "kappa", "henrici", "sigma_A"};
  std::optional<int> ens_count;
  ensemble->add_option("--metrics", metrics, "columns to emit");
  ensemble->add_option("--count", ens_count, "override ensemble.count");
  auto* scalar = app.add_subcommand("scalar", "scalar exact and approximate moments");
  double sa = 0.97, sb2 = 0.05, sx0 = 1.0;
  int sp = 2, st = 50;
  std::string sdist = "normal";
  scalar->add_option("--a", sa, "multiplier");
  scalar->add_option("--b2", sb2, "noise variance");
  scalar->add_option("--p", sp, "moment order")->check(CLI::NonNegativeNumber);
  scalar->add_option("--t", st, "time")->check(CLI::NonNegativeNumber);
  scalar->add_option("--x0", sx0, "initial value");
  scalar->add_option("--dist", sdist, "normal or uniform");
  auto* report = app.add_subcommand("report", "full stability report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    emit_error("UsageError", e.what());
    return 2;
  }

  try {
    if (*simulate) {
      const auto cfg = need_config(g);
      require_system(cfg);
      MomentOptions opt;
      opt.threads = g.threads;
      const auto series = estimate_moments(cfg.system, cfg.run.p_list,
                                           cfg.run.t_max, cfg.run.runs,
                                           cfg.run.seed, opt);
      emit(g, "series.csv",
           csv_metadata(cfg.hash, cfg.run.seed) + series_csv(series));
      if (!g.out.empty()) {
        json fits = json::array();
        for (double p : cfg.run.p_list) {
          fits.push_back(to_json(
              fit_lyapunov(series, p, cfg.run.fit_lo, cfg.run.fit_hi)));
        }
        emit(g, "fits.json",
             dump({{"meta", metadata_json(cfg.hash, cfg.run.seed)},
                   {"fits", fits}}));
      }
    } else if (*lyapunov) {
      const auto cfg = need_config(g);
      require_system(cfg);
      MomentOptions opt;
      opt.threads = g.threads;
      const auto series = estimate_moments(cfg.system, cfg.run.p_list,
                                           cfg.run.t_max, cfg.run.runs,
                                           cfg.run.seed, opt);
      json fits = json::array();
      for (double p : cfg.run.p_list) {
        fits.push_back(
            to_json(fit_lyapunov(series, p, cfg.run.fit_lo, cfg.run.fit_hi)));
      }
      json out = {{"meta", metadata_json(cfg.hash, cfg.run.seed)},
                  {"fits", fits}};
      try {
        out["exact_L2"] = to_json(
            exact_operator_L2<double>(cfg.system.A, cfg.system.noise));
      } catch (const Error& e) {
        out["exact_L2"] = {{"error", e.what()}};
      }
      emit(g, "lyapunov.json", dump(out));
    } else if (*iterate) {
      const auto cfg = need_config(g);
      require_system(cfg);
      const int R = r_max > 0 ? r_max : cfg.analysis.r;
      const auto spec = spectral_summary(cfg.system.A, std::max(R, 1));
      const auto stats = epsilon_squared(cfg.system.noise, spec, cfg.system.A);
      json rows = json::array();
      for (int r = 1; r <= R; ++r) {
        rows.push_back(to_json(iteration_L2(spec, stats, cfg.system.noise, r)));
      }
      json out = {{"meta", metadata_json(cfg.hash, cfg.run.seed)},
                  {"spectral", to_json(spec)},
                  {"iteration", rows}};
      try {
        out["exact_L2"] = to_json(
            exact_operator_L2<double>(cfg.system.A, cfg.system.noise));
      } catch (const Error& e) {
        out["exact_L2"] = {{"error", e.what()}};
      }
      emit(g, "iterate.json", dump(out));
    } else if (*critical) {
      const auto cfg = need_config(g);
      require_system(cfg);
      const auto spec = spectral_summary(cfg.system.A, 8);
      const auto stats = epsilon_squared(cfg.system.noise, spec, cfg.system.A);
      const auto rep = critical_value(spec, stats, cfg.system.noise, spec.n,
                                      &cfg.system.A);
      emit(g, "critical.json",
           dump({{"meta", metadata_json(cfg.hash, cfg.run.seed)},
                 {"critical", to_json(rep)}}));
    } else if (*phase) {
      const NoiseKind kind = parse_noise_kind(phase_noise);
      const auto rows = stability_diagram<double>(phase_n, kind, phase_grid);
      const std::string key = "phase n=" + std::to_string(phase_n) +
                              " noise=" + phase_noise +
                              " grid=" + std::to_string(phase_grid);
      std::string csv = csv_metadata(hash_hex(key), 0) + "lambda,bc2,qc\n";
      for (const auto& row : rows) {
        csv += fmt(row.lambda) + ',' + fmt(row.bc2) + ',' + fmt(row.qc) + '\n';
      }
      emit(g, "phase.csv", csv);
    } else if (*bounds) {
      const auto cfg = need_config(g);
      require_system(cfg);
      const auto b =
          convergence_bounds(cfg.system.A, cfg.system.noise,
                             derive_seed(cfg.run.seed, "report.bounds", 0));
      emit(g, "bounds.json",
           dump({{"meta", metadata_json(cfg.hash, cfg.run.seed)},
                 {"bounds", to_json(b)}}));
    } else if (*classify_cmd) {
      const std::string text = read_text_file(matrix_path);
      const MatrixXd A = parse_matrix_csv(text);
      json out = to_json(classify(A));
      out["meta"] = metadata_json(hash_hex(text), 0);
      emit(g, "classify.json", dump(out));
    } else if (*ensemble) {
      const auto cfg = need_config(g);
      if (!cfg.ensemble) {
        throw Error(ErrorCode::ConfigError, "config has no ensemble section");
      }
      EnsembleSpec spec = *cfg.ensemble;
      if (ens_count) spec.count = *ens_count;
      spec.validate();
      const auto res = scatter_study(spec, cfg.run.seed, g.threads);
      std::string csv = csv_metadata(cfg.hash, cfg.run.seed);
      csv += "# acceptance_rate=" + fmt(res.acceptance_rate) + "\n";
      csv += scatter_csv(res, metrics);
      emit(g, "ensemble.csv", csv);
    } else if (*scalar) {
      const Distribution d = parse_distribution(sdist);
      const auto moments = d == Distribution::Normal
                               ? normal_scaled_moments(sa, sb2, sp)
                               : uniform_scaled_moments(sa, sb2, sp);
      const double at_t = scalar_moment_exact(sa, moments, sp, st, sx0);
      const double per_step = scalar_moment_exact(sa, moments, sp, 1, 1.0);
      const auto approx = scalar_Lp_approx(sa, sb2, sp);
      const std::string key = "scalar a=" + fmt(sa) + " b2=" + fmt(sb2) +
                              " p=" + std::to_string(sp) +
                              " t=" + std::to_string(st) + " dist=" + sdist;
      json out = {{"meta", metadata_json(hash_hex(key), 0)},
                  {"moment", number_or_null(at_t)},
                  {"L_exact", number_or_null(std::log(per_step))},
                  {"L_approx", to_json(approx)}};
      emit(g, "scalar.json", dump(out));
    } else if (*report) {
      const auto cfg = need_config(g);
      require_system(cfg);
      const auto rep = build_stability_report(cfg, g.threads);
      json out = to_json(rep);
      out["meta"] = metadata_json(cfg.hash, cfg.run.seed);
      emit(g, "report.json", dump(out));
    }
  } catch (const Error& e) {
    emit_error(std::string(to_string(e.code())), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    emit_error("ConfigError", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    emit_error("ConfigError", e.what());
    return 2;
  }
  return 0;
}
