#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpa/integrator.hpp"

namespace hpa {

// Measured hormone concentrations. ACTH in pg/mL, cortisol in ug/dL; an
// absent hormone is an empty vector.
struct ObservationSeries {
  std::vector<double> times;  // minutes since midnight, nondecreasing
  std::vector<double> acth;
  std::vector<double> cortisol;
  std::string subject_id;

  bool has_acth() const { return !acth.empty(); }
  bool has_cortisol() const { return !cortisol.empty(); }

  // Throws InputError when the series violates its invariants.
  void validate() const;
};

struct FitScore {
  std::optional<double> mape_cortisol;
  std::optional<double> mape_acth;
  std::optional<double> rmse_cortisol;
  std::optional<double> rmse_acth;
};

// Mean absolute percentage error, in percent.
double mape(std::span<const double> predicted, std::span<const double> actual);

double rmse(std::span<const double> predicted, std::span<const double> actual);

// Compares model ACTH/cortisol, linearly interpolated at the observation
// times, against whichever hormones the observations carry.
FitScore score_fit(const Trajectory& traj, const ObservationSeries& obs);

}  // namespace hpa
