#include "hpa/metrics.hpp"

#include <cmath>
#include <sstream>

#include "hpa/error.hpp"

namespace hpa {
namespace {

void check_lengths(std::span<const double> predicted, std::span<const double> actual,
                   const char* who) {
  if (predicted.size() != actual.size()) {
    std::ostringstream os;
    os << who << ": length mismatch (" << predicted.size() << " vs " << actual.size() << ")";
    throw InputError(os.str());
  }
  if (actual.empty()) throw InputError(std::string(who) + ": empty series");
}

}  // namespace

void ObservationSeries::validate() const {
  if (!has_acth() && !has_cortisol()) {
    throw InputError("observations: at least one hormone series is required");
  }
  if (has_acth() && acth.size() != times.size()) {
    throw InputError("observations: ACTH length does not match times");
  }
  if (has_cortisol() && cortisol.size() != times.size()) {
    throw InputError("observations: cortisol length does not match times");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw InputError("observations: non-finite time");
    if (i > 0 && times[i] < times[i - 1]) throw InputError("observations: times must be sorted");
    if (has_acth() && !(acth[i] > 0 && std::isfinite(acth[i]))) {
      throw InputError("observations: ACTH values must be positive");
    }
    if (has_cortisol() && !(cortisol[i] > 0 && std::isfinite(cortisol[i]))) {
      throw InputError("observations: cortisol values must be positive");
    }
  }
}

double mape(std::span<const double> predicted, std::span<const double> actual) {
  check_lengths(predicted, actual, "mape");
  double sum = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0) {
      std::ostringstream os;
      os << "mape: actual value at index " << i << " is zero";
      throw InputError(os.str());
    }
    sum += std::abs((predicted[i] - actual[i]) / actual[i]);
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  check_lengths(predicted, actual, "rmse");
  double sum = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

FitScore score_fit(const Trajectory& traj, const ObservationSeries& obs) {
  obs.validate();
  const std::vector<HormoneState> model = sample(traj, obs.times);
  FitScore score;
  if (obs.has_acth()) {
    std::vector<double> a(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) a[i] = model[i].A;
    score.mape_acth = mape(a, obs.acth);
    score.rmse_acth = rmse(a, obs.acth);
  }
  if (obs.has_cortisol()) {
    std::vector<double> c(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) c[i] = model[i].C;
    score.mape_cortisol = mape(c, obs.cortisol);
    score.rmse_cortisol = rmse(c, obs.cortisol);
  }
  return score;
}

}  // namespace hpa
