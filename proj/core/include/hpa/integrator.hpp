#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hpa/model.hpp"

namespace hpa {

enum class StepMode { kFixed, kAdaptive };

struct IntegrationConfig {
  double t0 = 0.0;
  double t_end = 1440.0;
  double dt = 0.5;  // fixed-step size, minutes
  StepMode mode = StepMode::kFixed;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  double burn_in = 14400.0;  // 10 days
  double output_step = 1.0;  // adaptive-mode output grid spacing

  // Unset: open-loop fixed point at daylight(t0 - burn_in).
  std::optional<HormoneState> initial_state;

  // Throws InputError on invalid settings.
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<HormoneState> states;
  ParameterSet params;

  std::size_t size() const { return times.size(); }
};

// One classical RK4 step. Throws NumericalError (carrying t) if any stage
// is non-finite or leaves the model's domain.
HormoneState step_rk4(double t, const HormoneState& s, double dt, const ParameterSet& p);

// Integrates from t0 - burn_in to t_end and keeps samples in [t0, t_end].
// Fixed mode records every step; adaptive mode records on `output_grid`
// when given, else on t0, t0 + output_step, ..., t_end.
Trajectory integrate(const IntegrationConfig& config, const ParameterSet& p,
                     std::span<const double> output_grid = {});

// Model states at `times` (nondecreasing, within [t0, t_end]). Adaptive
// mode steps onto each distinct time; fixed mode interpolates the step grid.
std::vector<HormoneState> integrate_at(const IntegrationConfig& config, const ParameterSet& p,
                                       std::span<const double> times);

// Piecewise-linear interpolation. Throws InputError for queries outside
// [times.front(), times.back()].
std::vector<HormoneState> sample(const Trajectory& traj, std::span<const double> query_times);

}  // namespace hpa
