#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpa/integrator.hpp"
#include "hpa/metrics.hpp"
#include "hpa/model.hpp"

namespace hpa {

enum class ObjectiveKind { kSumMape, kSumOfSquares };

std::string_view to_string(ObjectiveKind k);
std::optional<ObjectiveKind> parse_objective_kind(std::string_view s);

// Objective value returned when the model cannot be integrated.
inline constexpr double kFailurePenalty = 1e9;

struct FitProblem {
  std::vector<std::string> free_names;
  std::vector<double> lower;
  std::vector<double> upper;
  ParameterSet base;
  ObjectiveKind objective_kind = ObjectiveKind::kSumMape;
  double weight_acth = 1.0;
  double weight_cortisol = 1.0;
  IntegrationConfig integration = default_integration();

  // Bounds [lower_factor, upper_factor] x base value for each free name.
  static FitProblem around(const ParameterSet& base, std::vector<std::string> free_names,
                           double lower_factor = 0.1, double upper_factor = 10.0);

  // Adaptive, tol 1e-8, 10-day burn-in, one day horizon.
  static IntegrationConfig default_integration();

  void validate() const;

  // base with the free entries replaced by `candidate`.
  ParameterSet assemble(std::span<const double> candidate) const;

  std::vector<double> initial_values() const;
};

// Weighted fit criterion for `candidate`. Integration failures map to
// kFailurePenalty; malformed inputs throw InputError.
double objective(std::span<const double> candidate, const FitProblem& prob,
                 const ObservationSeries& obs);

struct FitOptions {
  std::size_t starts = 5;
  // Called with every evaluated candidate, possibly from several threads.
  std::function<void(std::span<const double>)> on_evaluate;
};

struct FitResult {
  ParameterSet fitted;
  std::vector<double> free_values;
  double objective_value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
  // (evaluation index, best objective so far), starts concatenated in order.
  std::vector<std::pair<std::size_t, double>> history;
};

// Bounded multi-start simplex search. `budget` caps the total number of
// objective evaluations across all starts. Start 0 is `init`; the others are
// log-uniform draws inside the bounds from `seed`.
FitResult fit(const FitProblem& prob, const ObservationSeries& obs, std::span<const double> init,
              std::size_t budget, std::uint64_t seed, const FitOptions& options = {});

// Observations sampled from the model every `cadence` minutes over
// [config.t0, config.t_end], with multiplicative Gaussian noise of relative
// size `noise` (0 = exact).
ObservationSeries synthesize_observations(const ParameterSet& p, const IntegrationConfig& config,
                                          double cadence, double noise, std::uint64_t seed);

}  // namespace hpa
