#include "hpa/commands.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "hpa/error.hpp"

namespace hpa {
namespace {

namespace fs = std::filesystem;

constexpr std::array<std::string_view, 6> kCommands{"simulate", "validate",    "fit",
                                                    "sensitivity", "daylight", "synth"};

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  const fs::path path = fs::path(cfg.output_dir) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

template <typename Writer>
void emit(const RunConfig& cfg, const std::string& name, Writer&& writer) {
  std::ofstream out = open_output(cfg, name);
  writer(out);
  out.flush();
  if (!out) throw InputError("failed writing '" + name + "' in '" + cfg.output_dir + "'");
}

void emit_manifest(const RunConfig& cfg) {
  emit(cfg, kManifestFile, [&](std::ostream& o) { write_manifest(o, cfg); });
}

// Trajectory on t0, t0 + output_step, ..., t_end.
Trajectory simulate_on_grid(const RunConfig& cfg) {
  const IntegrationConfig& ic = cfg.integration;
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double t = ic.t0 + static_cast<double>(i) * ic.output_step;
    if (t >= ic.t_end - 1e-9 * ic.output_step) break;
    grid.push_back(t);
  }
  grid.push_back(ic.t_end);
  Trajectory traj;
  traj.params = cfg.params;
  traj.states = integrate_at(ic, cfg.params, grid);
  traj.times = std::move(grid);
  return traj;
}

// Round-trips every state through the CSV float format, so scores computed
// here match scores against an exported trajectory.
void quantize(Trajectory& traj) {
  auto q = [](double v) { return std::strtod(format_double(v).c_str(), nullptr); };
  for (auto& s : traj.states) s = {q(s.R), q(s.A), q(s.C)};
}

ObservationSeries load_data(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw InputError(cfg.command + ": --data is required");
  return parse_observations(fs::path(cfg.data_path));
}

void log_scores(std::ostream& log, const FitScore& s) {
  if (s.mape_acth) {
    log << "  ACTH:     MAPE " << format_double(*s.mape_acth) << " %, RMSE "
        << format_double(*s.rmse_acth) << '\n';
  }
  if (s.mape_cortisol) {
    log << "  cortisol: MAPE " << format_double(*s.mape_cortisol) << " %, RMSE "
        << format_double(*s.rmse_cortisol) << '\n';
  }
}

}  // namespace

std::span<const std::string_view> command_names() { return kCommands; }

RunConfig resolve_config(std::string_view command, const CommandOptions& opts) {
  RunConfig cfg = opts.config ? parse_config(*opts.config) : RunConfig{};
  cfg.command = std::string(command);
  if (opts.data) cfg.data_path = opts.data->string();
  if (opts.out) cfg.output_dir = opts.out->string();
  if (opts.t_end) {
    cfg.integration.t_end = *opts.t_end;
    cfg.integration.validate();
  }
  if (opts.seed) cfg.fit.seed = *opts.seed;
  if (opts.synth_seed) cfg.synth.seed = *opts.synth_seed;
  if (opts.free) {
    std::string joined;
    for (const auto& n : *opts.free) joined += (joined.empty() ? "" : ",") + n;
    apply_config_entry(cfg, "fit.free", joined, 0);
  }
  cfg.params.validate();
  return cfg;
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const Trajectory traj = simulate_on_grid(cfg);
  emit(cfg, "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
  emit_manifest(cfg);
  log << "simulate: " << traj.size() << " samples written to " << cfg.output_dir << "/trajectory.csv\n";
}

void cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const ObservationSeries obs = load_data(cfg);
  Trajectory traj = simulate_on_grid(cfg);
  quantize(traj);
  const FitScore score = score_fit(traj, obs);
  emit(cfg, "scores.csv", [&](std::ostream& o) { write_scores_csv(o, score); });
  emit_manifest(cfg);
  log << "validate: " << obs.times.size() << " observations\n";
  log_scores(log, score);
}

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
  const ObservationSeries obs = load_data(cfg);
  const FitProblem prob = cfg.fit_problem();
  const std::vector<double> init = prob.initial_values();
  FitOptions options;
  options.starts = cfg.fit.starts;
  const FitResult result = fit(prob, obs, init, cfg.fit.budget, cfg.fit.seed, options);

  Trajectory traj;
  traj.params = result.fitted;
  traj.times = obs.times;
  traj.states = integrate_at(prob.integration, result.fitted, obs.times);
  const FitScore score = score_fit(traj, obs);

  emit(cfg, "fitted_params.csv", [&](std::ostream& o) { write_parameters_csv(o, result.fitted); });
  emit(cfg, "scores.csv", [&](std::ostream& o) { write_scores_csv(o, score); });
  emit(cfg, "fit_history.csv", [&](std::ostream& o) {
    o << "evaluation,best_objective\n";
    for (const auto& [i, f] : result.history) o << i << ',' << format_double(f) << '\n';
  });
  RunConfig fitted = cfg;
  fitted.params = result.fitted;
  fitted.command = "simulate";
  fitted.data_path.clear();
  emit(cfg, "fitted.cfg", [&](std::ostream& o) { write_manifest(o, fitted); });
  emit_manifest(cfg);

  log << "fit: " << result.evaluations << " evaluations, objective "
      << format_double(result.objective_value) << (result.converged ? " (converged)" : " (budget exhausted)")
      << '\n';
  for (const auto& name : prob.free_names) {
    log << "  " << name << " = " << format_double(result.fitted.get(name)) << '\n';
  }
  log_scores(log, score);
}

void cmd_sensitivity(const RunConfig& cfg, std::ostream& log) {
  const SensitivityReport report =
      rank_parameters(cfg.params, cfg.sensitivity_grid(), cfg.sensitivity_config());
  emit(cfg, "sensitivity.csv", [&](std::ostream& o) { write_sensitivity_csv(o, report); });
  emit(cfg, "correlation.csv", [&](std::ostream& o) { write_correlation_csv(o, report); });
  emit(cfg, "si_series.csv", [&](std::ostream& o) { write_si_series_csv(o, report); });
  emit_manifest(cfg);

  log << "sensitivity ranking (mean |SI|):\n";
  for (const auto& name : report.ranking) {
    const std::size_t i = report.index_of(name);
    log << "  " << report.rank_of(name) << ". " << name << "  " << format_double(report.si_aggregate[i])
        << (report.fd_unstable[i] ? "  [FD-unstable]" : "") << '\n';
  }
}

void cmd_daylight(const RunConfig& cfg, std::ostream& log) {
  emit(cfg, "daylight.csv", [&](std::ostream& o) {
    o << "t_min,D\n";
    for (int t = 0; t < 1440; ++t) o << t << ',' << format_double(daylight(t)) << '\n';
  });
  emit_manifest(cfg);
  log << "daylight: 1440 samples written to " << cfg.output_dir << "/daylight.csv\n";
}

void cmd_synth(const RunConfig& cfg, std::ostream& log) {
  const ObservationSeries obs =
      synthesize_observations(cfg.params, cfg.integration, cfg.synth.cadence, cfg.synth.noise, cfg.synth.seed);
  emit(cfg, "observations.csv", [&](std::ostream& o) { write_observations(o, obs); });
  emit_manifest(cfg);
  log << "synth: " << obs.times.size() << " observations written to " << cfg.output_dir
      << "/observations.csv\n";
}

int run_command(std::string_view command, const CommandOptions& opts, std::ostream& log,
                std::ostream& err) {
  try {
    const RunConfig cfg = resolve_config(command, opts);
    if (command == "simulate") {
      cmd_simulate(cfg, log);
    } else if (command == "validate") {
      cmd_validate(cfg, log);
    } else if (command == "fit") {
      cmd_fit(cfg, log);
    } else if (command == "sensitivity") {
      cmd_sensitivity(cfg, log);
    } else if (command == "daylight") {
      cmd_daylight(cfg, log);
    } else if (command == "synth") {
      cmd_synth(cfg, log);
    } else {
      throw InputError("unknown command '" + std::string(command) + "'");
    }
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace hpa
