#pragma once

// Local relative sensitivity of cortisol to model parameters,
//   SI_p(t) = (dC/dp)(t) * p / C(t),
// estimated by central finite differences on integrated trajectories.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpa/integrator.hpp"
#include "hpa/model.hpp"

namespace hpa {

struct SensitivityConfig {
  IntegrationConfig integration = default_integration();
  double rel_step = 1e-3;
  // Largest relative change of an aggregate under step halving before the
  // parameter is flagged as FD-unstable.
  double stability_tol = 0.01;

  // Fixed-step RK4 (dt 0.25 min), 10-day burn-in, horizon [0, 1440].
  static IntegrationConfig default_integration();

  void validate() const;
};

// 0, 1, ..., 1439: one period on a 1-min grid.
std::vector<double> default_sensitivity_grid();

std::vector<double> si_timeseries(const ParameterSet& p, std::string_view name,
                                  std::span<const double> grid, double rel_step,
                                  const IntegrationConfig& integration =
                                      SensitivityConfig::default_integration());

struct SensitivityReport {
  std::vector<std::string> parameter_names;
  std::vector<double> grid;
  std::vector<std::vector<double>> si_series;
  std::vector<double> si_aggregate;       // mean |SI| over the grid
  std::vector<double> si_aggregate_half;  // same at rel_step / 2
  std::vector<bool> fd_unstable;
  std::vector<std::string> ranking;  // descending si_aggregate
  std::vector<std::vector<double>> correlation;

  // 1-based rank of `name`; throws InputError if absent.
  std::size_t rank_of(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
};

// Every scalar parameter of p, ranked by mean |SI|, with the correlation
// matrix of the SI series and the step-halving stability diagnostic.
SensitivityReport rank_parameters(const ParameterSet& p, std::span<const double> grid,
                                  const SensitivityConfig& config = {});

// Pearson correlations between equally long series (length >= 3). Throws
// NumericalError naming the offending series when one has zero variance.
std::vector<std::vector<double>> correlation_matrix(std::span<const std::vector<double>> series,
                                                    std::span<const std::string> names = {});

}  // namespace hpa
