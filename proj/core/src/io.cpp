#include "hpa/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hpa/error.hpp"

namespace hpa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  std::ostringstream os;
  os << "observations row " << row << ": " << what;
  throw InputError(os.str());
}

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "config line " << line << ": " << what;
  throw InputError(os.str());
}

double need_double(const std::string& key, const std::string& value, std::size_t line) {
  auto v = to_double(value);
  if (!v || !std::isfinite(*v)) line_error(line, "'" + key + "' expects a number, got '" + value + "'");
  return *v;
}

double need_positive(const std::string& key, const std::string& value, std::size_t line) {
  const double v = need_double(key, value, line);
  if (!(v > 0)) line_error(line, "'" + key + "' must be > 0");
  return v;
}

std::uint64_t need_uint(const std::string& key, const std::string& value, std::size_t line) {
  auto v = to_uint(value);
  if (!v) line_error(line, "'" + key + "' expects a non-negative integer, got '" + value + "'");
  return *v;
}

bool need_bool(const std::string& key, const std::string& value, std::size_t line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  line_error(line, "'" + key + "' expects true or false, got '" + value + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Observations

ObservationSeries parse_observations(std::istream& in, std::string subject_id) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("observations: missing header");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (trim(line) != kObservationHeader) {
    throw InputError(std::string("observations: expected header '") + kObservationHeader +
                     "', got '" + trim(line) + "'");
  }

  struct Row {
    std::size_t number;
    double t;
    std::optional<double> acth;
    std::optional<double> cortisol;
  };
  std::vector<Row> rows;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++number;
    const auto cells = split(line, ',');
    if (cells.size() != 3) row_error(number, "expected 3 columns, got " + std::to_string(cells.size()));
    Row r{number, 0.0, std::nullopt, std::nullopt};
    auto t = to_double(cells[0]);
    if (!t || !std::isfinite(*t)) row_error(number, "non-numeric time '" + cells[0] + "'");
    r.t = *t;
    auto value = [&](const std::string& cell, const char* what) -> std::optional<double> {
      if (cell.empty()) return std::nullopt;
      auto v = to_double(cell);
      if (!v || !std::isfinite(*v)) row_error(number, std::string("non-numeric ") + what + " '" + cell + "'");
      if (!(*v > 0)) row_error(number, std::string(what) + " must be positive, got " + cell);
      return v;
    };
    r.acth = value(cells[1], "ACTH");
    r.cortisol = value(cells[2], "cortisol");
    rows.push_back(r);
  }
  if (rows.empty()) throw InputError("observations: no data rows");

  const bool has_acth = rows.front().acth.has_value();
  const bool has_cort = rows.front().cortisol.has_value();
  for (const Row& r : rows) {
    if (r.acth.has_value() != has_acth) row_error(r.number, "ACTH column must be filled on every row or none");
    if (r.cortisol.has_value() != has_cort) {
      row_error(r.number, "cortisol column must be filled on every row or none");
    }
  }
  if (!has_acth && !has_cort) throw InputError("observations: both hormone columns are empty");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  ObservationSeries obs;
  obs.subject_id = std::move(subject_id);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].t == rows[i - 1].t) {
      row_error(rows[i].number, "duplicate time " + format_double(rows[i].t) + " (also row " +
                                    std::to_string(rows[i - 1].number) + ")");
    }
    obs.times.push_back(rows[i].t);
    if (has_acth) obs.acth.push_back(*rows[i].acth);
    if (has_cort) obs.cortisol.push_back(*rows[i].cortisol);
  }
  return obs;
}

ObservationSeries parse_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open observations file '" + path.string() + "'");
  return parse_observations(in, path.stem().string());
}

void write_observations(std::ostream& out, const ObservationSeries& obs) {
  out << kObservationHeader << '\n';
  for (std::size_t i = 0; i < obs.times.size(); ++i) {
    out << format_double(obs.times[i]) << ',';
    if (obs.has_acth()) out << format_double(obs.acth[i]);
    out << ',';
    if (obs.has_cortisol()) out << format_double(obs.cortisol[i]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Configuration

FitProblem RunConfig::fit_problem() const {
  FitProblem prob = FitProblem::around(params, fit.free, fit.lower_factor, fit.upper_factor);
  prob.objective_kind = fit.objective;
  prob.weight_acth = fit.weight_acth;
  prob.weight_cortisol = fit.weight_cortisol;
  prob.integration = FitProblem::default_integration();
  prob.integration.t0 = integration.t0;
  prob.integration.t_end = integration.t_end;
  prob.integration.burn_in = integration.burn_in;
  prob.integration.initial_state = integration.initial_state;
  prob.integration.abs_tol = fit.abs_tol;
  prob.integration.rel_tol = fit.rel_tol;
  return prob;
}

SensitivityConfig RunConfig::sensitivity_config() const {
  SensitivityConfig sc;
  sc.rel_step = sens.rel_step;
  sc.stability_tol = sens.stability_tol;
  sc.integration.dt = sens.dt;
  sc.integration.burn_in = integration.burn_in;
  sc.integration.initial_state = integration.initial_state;
  sc.integration.t0 = integration.t0;
  sc.integration.t_end = integration.t0 + 1440.0;
  return sc;
}

std::vector<double> RunConfig::sensitivity_grid() const {
  std::vector<double> g;
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * sens.grid_step;
    if (t >= 1440.0 - 1e-9) break;
    g.push_back(integration.t0 + t);
  }
  return g;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        std::size_t line) {
  if (key.rfind("model.", 0) == 0) {
    const std::string name = key.substr(6);
    if (name == "clamp_production") {
      cfg.params.clamp_production = need_bool(key, value, line);
    } else if (name == "xi_sign") {
      auto s = parse_xi_sign(value);
      if (!s) line_error(line, "'model.xi_sign' expects excitatory or inhibitory");
      cfg.params.xi_sign = *s;
    } else if (ParameterSet::has(name)) {
      ParameterSet p = cfg.params;
      p.set(name, need_double(key, value, line));
      try {
        p.validate();
      } catch (const InputError& e) {
        line_error(line, e.what());
      }
      cfg.params = p;
    } else {
      line_error(line, "unknown key '" + key + "'");
    }
    return;
  }

  IntegrationConfig& ic = cfg.integration;
  if (key == "integrate.t0_min") {
    ic.t0 = need_double(key, value, line);
  } else if (key == "integrate.t_end_min") {
    ic.t_end = need_double(key, value, line);
  } else if (key == "integrate.dt_min") {
    ic.dt = need_positive(key, value, line);
  } else if (key == "integrate.mode") {
    if (value == "fixed") {
      ic.mode = StepMode::kFixed;
    } else if (value == "adaptive") {
      ic.mode = StepMode::kAdaptive;
    } else {
      line_error(line, "'integrate.mode' expects fixed or adaptive");
    }
  } else if (key == "integrate.abs_tol") {
    ic.abs_tol = need_positive(key, value, line);
  } else if (key == "integrate.rel_tol") {
    ic.rel_tol = need_positive(key, value, line);
  } else if (key == "integrate.burn_in_min") {
    ic.burn_in = need_double(key, value, line);
    if (!(ic.burn_in >= 0)) line_error(line, "'integrate.burn_in_min' must be >= 0");
  } else if (key == "integrate.output_step_min") {
    ic.output_step = need_positive(key, value, line);
  } else if (key == "integrate.initial_state") {
    if (value == "auto") {
      ic.initial_state.reset();
    } else {
      const auto parts = split(value, ',');
      if (parts.size() != 3) line_error(line, "'integrate.initial_state' expects R,A,C or auto");
      HormoneState s{need_double(key, parts[0], line), need_double(key, parts[1], line),
                     need_double(key, parts[2], line)};
      if (s.R < 0 || s.A < 0 || s.C < 0) line_error(line, "initial concentrations must be >= 0");
      ic.initial_state = s;
    }
  } else if (key == "fit.free") {
    std::vector<std::string> names;
    for (auto& n : split(value, ',')) {
      if (!ParameterSet::has(n)) line_error(line, "'fit.free' names unknown parameter '" + n + "'");
      if (std::find(names.begin(), names.end(), n) != names.end()) {
        line_error(line, "'fit.free' lists '" + n + "' twice");
      }
      names.push_back(n);
    }
    cfg.fit.free = std::move(names);
  } else if (key == "fit.lower_factor") {
    cfg.fit.lower_factor = need_positive(key, value, line);
  } else if (key == "fit.upper_factor") {
    cfg.fit.upper_factor = need_positive(key, value, line);
  } else if (key == "fit.budget") {
    cfg.fit.budget = need_uint(key, value, line);
    if (cfg.fit.budget < 1) line_error(line, "'fit.budget' must be >= 1");
  } else if (key == "fit.seed") {
    cfg.fit.seed = need_uint(key, value, line);
  } else if (key == "fit.starts") {
    cfg.fit.starts = need_uint(key, value, line);
    if (cfg.fit.starts < 1) line_error(line, "'fit.starts' must be >= 1");
  } else if (key == "fit.objective") {
    auto k = parse_objective_kind(value);
    if (!k) line_error(line, "'fit.objective' expects sum-mape or sum-of-squares");
    cfg.fit.objective = *k;
  } else if (key == "fit.weight_acth") {
    cfg.fit.weight_acth = need_double(key, value, line);
    if (cfg.fit.weight_acth < 0) line_error(line, "'fit.weight_acth' must be >= 0");
  } else if (key == "fit.weight_cortisol") {
    cfg.fit.weight_cortisol = need_double(key, value, line);
    if (cfg.fit.weight_cortisol < 0) line_error(line, "'fit.weight_cortisol' must be >= 0");
  } else if (key == "fit.abs_tol") {
    cfg.fit.abs_tol = need_positive(key, value, line);
  } else if (key == "fit.rel_tol") {
    cfg.fit.rel_tol = need_positive(key, value, line);
  } else if (key == "sens.rel_step") {
    cfg.sens.rel_step = need_positive(key, value, line);
    if (cfg.sens.rel_step > 0.5) line_error(line, "'sens.rel_step' must be <= 0.5");
  } else if (key == "sens.dt_min") {
    cfg.sens.dt = need_positive(key, value, line);
  } else if (key == "sens.grid_step_min") {
    cfg.sens.grid_step = need_positive(key, value, line);
  } else if (key == "sens.stability_tol") {
    cfg.sens.stability_tol = need_positive(key, value, line);
  } else if (key == "synth.cadence_min") {
    cfg.synth.cadence = need_positive(key, value, line);
  } else if (key == "synth.noise") {
    cfg.synth.noise = need_double(key, value, line);
    if (cfg.synth.noise < 0) line_error(line, "'synth.noise' must be >= 0");
  } else if (key == "synth.seed") {
    cfg.synth.seed = need_uint(key, value, line);
  } else if (key == "output.dir") {
    if (value.empty()) line_error(line, "'output.dir' must not be empty");
    cfg.output_dir = value;
  } else if (key == "run.command") {
    cfg.command = value;
  } else if (key == "run.data") {
    cfg.data_path = value;
  } else if (key == "run.tool_version") {
    // informational
  } else {
    line_error(line, "unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) line_error(line, "expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) line_error(line, "missing key");
    apply_config_entry(cfg, key, value, line);
  }
  try {
    cfg.integration.validate();
  } catch (const InputError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (!(cfg.fit.lower_factor < cfg.fit.upper_factor)) {
    throw InputError("config: fit.lower_factor must be < fit.upper_factor");
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

void write_manifest(std::ostream& out, const RunConfig& cfg) {
  const ParameterSet& p = cfg.params;
  const IntegrationConfig& ic = cfg.integration;
  out << "# hpa_dyn run manifest; replay with: hpa_dyn " << (cfg.command.empty() ? "<command>" : cfg.command)
      << " --config <this file>\n";
  out << "run.tool_version = " << kToolVersion << '\n';
  if (!cfg.command.empty()) out << "run.command = " << cfg.command << '\n';
  if (!cfg.data_path.empty()) out << "run.data = " << cfg.data_path << '\n';
  for (auto name : ParameterSet::names()) out << "model." << name << " = " << exact(p.get(name)) << '\n';
  out << "model.clamp_production = " << (p.clamp_production ? "true" : "false") << '\n';
  out << "model.xi_sign = " << to_string(p.xi_sign) << '\n';
  out << "integrate.t0_min = " << exact(ic.t0) << '\n';
  out << "integrate.t_end_min = " << exact(ic.t_end) << '\n';
  out << "integrate.dt_min = " << exact(ic.dt) << '\n';
  out << "integrate.mode = " << (ic.mode == StepMode::kFixed ? "fixed" : "adaptive") << '\n';
  out << "integrate.abs_tol = " << exact(ic.abs_tol) << '\n';
  out << "integrate.rel_tol = " << exact(ic.rel_tol) << '\n';
  out << "integrate.burn_in_min = " << exact(ic.burn_in) << '\n';
  out << "integrate.output_step_min = " << exact(ic.output_step) << '\n';
  if (ic.initial_state) {
    out << "integrate.initial_state = " << exact(ic.initial_state->R) << ','
        << exact(ic.initial_state->A) << ',' << exact(ic.initial_state->C) << '\n';
  } else {
    out << "integrate.initial_state = auto\n";
  }
  out << "fit.free = ";
  for (std::size_t i = 0; i < cfg.fit.free.size(); ++i) out << (i ? "," : "") << cfg.fit.free[i];
  out << '\n';
  out << "fit.lower_factor = " << exact(cfg.fit.lower_factor) << '\n';
  out << "fit.upper_factor = " << exact(cfg.fit.upper_factor) << '\n';
  out << "fit.budget = " << cfg.fit.budget << '\n';
  out << "fit.seed = " << cfg.fit.seed << '\n';
  out << "fit.starts = " << cfg.fit.starts << '\n';
  out << "fit.objective = " << to_string(cfg.fit.objective) << '\n';
  out << "fit.weight_acth = " << exact(cfg.fit.weight_acth) << '\n';
  out << "fit.weight_cortisol = " << exact(cfg.fit.weight_cortisol) << '\n';
  out << "fit.abs_tol = " << exact(cfg.fit.abs_tol) << '\n';
  out << "fit.rel_tol = " << exact(cfg.fit.rel_tol) << '\n';
  out << "sens.rel_step = " << exact(cfg.sens.rel_step) << '\n';
  out << "sens.dt_min = " << exact(cfg.sens.dt) << '\n';
  out << "sens.grid_step_min = " << exact(cfg.sens.grid_step) << '\n';
  out << "sens.stability_tol = " << exact(cfg.sens.stability_tol) << '\n';
  out << "synth.cadence_min = " << exact(cfg.synth.cadence) << '\n';
  out << "synth.noise = " << exact(cfg.synth.noise) << '\n';
  out << "synth.seed = " << cfg.synth.seed << '\n';
  out << "output.dir = " << cfg.output_dir << '\n';
}

// ---------------------------------------------------------------------------
// Reports

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t_min,crh,acth,cortisol\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const HormoneState& s = traj.states[i];
    out << format_double(traj.times[i]) << ',' << format_double(s.R) << ',' << format_double(s.A)
        << ',' << format_double(s.C) << '\n';
  }
}

Trajectory parse_trajectory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t_min,crh,acth,cortisol") {
    throw InputError("trajectory: expected header 't_min,crh,acth,cortisol'");
  }
  Trajectory traj;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++number;
    const auto cells = split(line, ',');
    double v[4];
    if (cells.size() != 4) throw InputError("trajectory row " + std::to_string(number) + ": expected 4 columns");
    for (std::size_t i = 0; i < 4; ++i) {
      auto d = to_double(cells[i]);
      if (!d || !std::isfinite(*d)) {
        throw InputError("trajectory row " + std::to_string(number) + ": non-numeric value '" + cells[i] + "'");
      }
      v[i] = *d;
    }
    if (!traj.times.empty() && !(v[0] > traj.times.back())) {
      throw InputError("trajectory row " + std::to_string(number) + ": times must increase");
    }
    traj.times.push_back(v[0]);
    traj.states.push_back({v[1], v[2], v[3]});
  }
  if (traj.times.empty()) throw InputError("trajectory: no data rows");
  return traj;
}

Trajectory parse_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trajectory file '" + path.string() + "'");
  return parse_trajectory(in);
}

void write_scores_csv(std::ostream& out, const FitScore& score) {
  out << "hormone,mape_pct,rmse\n";
  if (score.mape_acth) {
    out << "acth," << format_double(*score.mape_acth) << ',' << format_double(*score.rmse_acth) << '\n';
  }
  if (score.mape_cortisol) {
    out << "cortisol," << format_double(*score.mape_cortisol) << ','
        << format_double(*score.rmse_cortisol) << '\n';
  }
}

void write_parameters_csv(std::ostream& out, const ParameterSet& p) {
  out << "parameter,value\n";
  for (auto name : ParameterSet::names()) out << name << ',' << format_double(p.get(name)) << '\n';
}

void write_sensitivity_csv(std::ostream& out, const SensitivityReport& report) {
  out << "parameter,si_aggregate,rank\n";
  for (const auto& name : report.ranking) {
    out << name << ',' << format_double(report.si_aggregate[report.index_of(name)]) << ','
        << report.rank_of(name) << '\n';
  }
}

void write_correlation_csv(std::ostream& out, const SensitivityReport& report) {
  out << "parameter";
  for (const auto& n : report.parameter_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < report.parameter_names.size(); ++i) {
    out << report.parameter_names[i];
    for (double r : report.correlation[i]) out << ',' << format_double(r);
    out << '\n';
  }
}

void write_si_series_csv(std::ostream& out, const SensitivityReport& report) {
  out << "t_min";
  for (const auto& n : report.parameter_names) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k < report.grid.size(); ++k) {
    out << format_double(report.grid[k]);
    for (const auto& s : report.si_series) out << ',' << format_double(s[k]);
    out << '\n';
  }
}

}  // namespace hpa
