#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hpa/calibration.hpp"
#include "hpa/integrator.hpp"
#include "hpa/metrics.hpp"
#include "hpa/model.hpp"
#include "hpa/sensitivity.hpp"

namespace hpa {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kObservationHeader = "time_min,acth_pg_ml,cortisol_ug_dl";

struct FitSettings {
  std::vector<std::string> free{"k1", "k2", "k3", "k4", "k5"};
  double lower_factor = 0.1;
  double upper_factor = 10.0;
  std::size_t budget = 5000;
  std::uint64_t seed = 42;
  std::size_t starts = 5;
  ObjectiveKind objective = ObjectiveKind::kSumMape;
  double weight_acth = 1.0;
  double weight_cortisol = 1.0;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
};

struct SensitivitySettings {
  double rel_step = 1e-3;
  double dt = 0.25;
  double grid_step = 1.0;
  double stability_tol = 0.01;
};

struct SynthSettings {
  double cadence = 30.0;
  double noise = 0.05;
  std::uint64_t seed = 7;
};

struct RunConfig {
  ParameterSet params;
  IntegrationConfig integration;
  FitSettings fit;
  SensitivitySettings sens;
  SynthSettings synth;
  std::string output_dir = "out";
  // Recorded by manifests so a run can be replayed from its manifest alone.
  std::string command;
  std::string data_path;

  // Objective setup derived from params/integration/fit.
  FitProblem fit_problem() const;
  SensitivityConfig sensitivity_config() const;
  std::vector<double> sensitivity_grid() const;
};

// `%.12g`: the float format of every emitted CSV.
std::string format_double(double v);

// CSV with header `time_min,acth_pg_ml,cortisol_ug_dl`. Either hormone column
// may be empty on every row. Rows are sorted by time. Errors name the
// 1-based data row.
ObservationSeries parse_observations(std::istream& in, std::string subject_id = {});
ObservationSeries parse_observations(const std::filesystem::path& path);
void write_observations(std::ostream& out, const ObservationSeries& obs);

// `key = value` lines, `#` comments. Unspecified keys keep their defaults.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::filesystem::path& path);

// Applies one `key = value` assignment; `line` is used in error messages.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        std::size_t line);

// Fully resolved configuration in parse_config syntax; values round-trip
// exactly.
void write_manifest(std::ostream& out, const RunConfig& cfg);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
// Reads write_trajectory_csv output back (header `t_min,crh,acth,cortisol`).
Trajectory parse_trajectory(std::istream& in);
Trajectory parse_trajectory(const std::filesystem::path& path);
// Columns: hormone,mape_pct,rmse (one row per hormone present).
void write_scores_csv(std::ostream& out, const FitScore& score);
void write_parameters_csv(std::ostream& out, const ParameterSet& p);
void write_sensitivity_csv(std::ostream& out, const SensitivityReport& report);
void write_correlation_csv(std::ostream& out, const SensitivityReport& report);
void write_si_series_csv(std::ostream& out, const SensitivityReport& report);

}  // namespace hpa
