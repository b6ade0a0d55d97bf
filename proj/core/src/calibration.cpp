#include "hpa/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "hpa/error.hpp"
#include "hpa/parallel.hpp"
#include "hpa/random.hpp"

namespace hpa {
namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;
constexpr double kInitialStep = 0.05;  // fraction of the log-box width
constexpr double kConvergedDiameter = 1e-6;

// Maps the box [lower, upper] to the unit cube in log coordinates.
class LogBox {
 public:
  LogBox(std::span<const double> lower, std::span<const double> upper)
      : lower_(lower.begin(), lower.end()), upper_(upper.begin(), upper.end()) {
    for (std::size_t i = 0; i < lower.size(); ++i) {
      lo_.push_back(std::log(lower[i]));
      width_.push_back(std::log(upper[i]) - std::log(lower[i]));
    }
  }

  std::vector<double> to_unit(std::span<const double> x) const {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      u[i] = std::clamp((std::log(x[i]) - lo_[i]) / width_[i], 0.0, 1.0);
    }
    return u;
  }

  std::vector<double> from_unit(std::span<const double> u) const {
    std::vector<double> x(u.size());
    // exp(log(.)) can overshoot a bound by an ulp.
    for (std::size_t i = 0; i < u.size(); ++i) {
      x[i] = std::clamp(std::exp(lo_[i] + u[i] * width_[i]), lower_[i], upper_[i]);
    }
    return x;
  }

  double width(std::size_t i) const { return width_[i]; }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> lo_;
  std::vector<double> width_;
};

struct StartOutcome {
  std::vector<double> best_x;
  double best_f = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> trace;  // objective of every evaluation, in order
};

// One bounded Nelder-Mead run in unit log coordinates.
class SimplexRun {
 public:
  SimplexRun(const LogBox& box, std::size_t budget,
             std::function<double(std::span<const double>)> f)
      : box_(box), budget_(budget), f_(std::move(f)) {}

  // `x0`, when given, is the exact point behind u0 and is evaluated as is.
  StartOutcome run(std::vector<double> u0, std::span<const double> x0 = {}) {
    const std::size_t n = u0.size();
    std::vector<std::vector<double>> simplex{u0};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v = u0;
      v[i] = v[i] + kInitialStep <= 1.0 ? v[i] + kInitialStep : v[i] - kInitialStep;
      simplex.push_back(std::move(v));
    }
    std::vector<double> fv;
    for (auto& v : simplex) {
      if (exhausted()) break;
      fv.push_back(fv.empty() && !x0.empty() ? eval_x({x0.begin(), x0.end()}) : eval(v));
    }
    if (fv.size() < simplex.size()) return std::move(out_);

    std::vector<std::size_t> order(n + 1);
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[n - 1];

      if (diameter(simplex, best) < kConvergedDiameter) {
        out_.converged = true;
        break;
      }
      if (exhausted()) break;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& v = simplex[order[k]];
        for (std::size_t i = 0; i < n; ++i) centroid[i] += v[i] / static_cast<double>(n);
      }
      auto along = [&](double coef) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) {
          p[i] = std::clamp(centroid[i] + coef * (simplex[worst][i] - centroid[i]), 0.0, 1.0);
        }
        return p;
      };

      auto xr = along(-kReflect);
      const double fr = eval(xr);
      if (fr < fv[best]) {
        if (exhausted()) {
          replace(simplex, fv, worst, std::move(xr), fr);
          break;
        }
        auto xe = along(-kReflect * kExpand);
        const double fe = eval(xe);
        if (fe < fr) {
          replace(simplex, fv, worst, std::move(xe), fe);
        } else {
          replace(simplex, fv, worst, std::move(xr), fr);
        }
        continue;
      }
      if (fr < fv[second]) {
        replace(simplex, fv, worst, std::move(xr), fr);
        continue;
      }
      if (exhausted()) break;
      // Outside contraction when the reflection beat the worst point,
      // inside contraction otherwise.
      const bool outside = fr < fv[worst];
      auto xc = along(outside ? -kContract : kContract);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[worst])) {
        replace(simplex, fv, worst, std::move(xc), fc);
        continue;
      }
      if (outside) replace(simplex, fv, worst, std::move(xr), fr);
      for (std::size_t k = 1; k <= n && !exhausted(); ++k) {
        auto& v = simplex[order[k]];
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = simplex[best][i] + kShrink * (v[i] - simplex[best][i]);
        }
        fv[order[k]] = eval(v);
      }
    }
    return std::move(out_);
  }

 private:
  bool exhausted() const { return out_.trace.size() >= budget_; }

  double eval(const std::vector<double>& u) { return eval_x(box_.from_unit(u)); }

  double eval_x(std::vector<double> x) {
    const double f = f_(x);
    out_.trace.push_back(f);
    if (f < out_.best_f) {
      out_.best_f = f;
      out_.best_x = x;
    }
    return f;
  }

  static void replace(std::vector<std::vector<double>>& simplex, std::vector<double>& fv,
                      std::size_t at, std::vector<double> v, double f) {
    simplex[at] = std::move(v);
    fv[at] = f;
  }

  // Largest log-space distance of any vertex from the best vertex.
  double diameter(const std::vector<std::vector<double>>& simplex, std::size_t best) const {
    double d = 0;
    for (const auto& v : simplex) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        d = std::max(d, std::abs(v[i] - simplex[best][i]) * box_.width(i));
      }
    }
    return d;
  }

  const LogBox& box_;
  std::size_t budget_;
  std::function<double(std::span<const double>)> f_;
  StartOutcome out_;
};

}  // namespace

std::string_view to_string(ObjectiveKind k) {
  return k == ObjectiveKind::kSumMape ? "sum-mape" : "sum-of-squares";
}

std::optional<ObjectiveKind> parse_objective_kind(std::string_view s) {
  if (s == "sum-mape") return ObjectiveKind::kSumMape;
  if (s == "sum-of-squares") return ObjectiveKind::kSumOfSquares;
  return std::nullopt;
}

IntegrationConfig FitProblem::default_integration() {
  IntegrationConfig c;
  c.mode = StepMode::kAdaptive;
  c.abs_tol = 1e-8;
  c.rel_tol = 1e-8;
  c.burn_in = 14400.0;
  c.t0 = 0.0;
  c.t_end = 1440.0;
  return c;
}

FitProblem FitProblem::around(const ParameterSet& base, std::vector<std::string> free_names,
                              double lower_factor, double upper_factor) {
  FitProblem prob;
  prob.base = base;
  prob.free_names = std::move(free_names);
  for (const auto& name : prob.free_names) {
    const double v = base.get(name);
    prob.lower.push_back(lower_factor * v);
    prob.upper.push_back(upper_factor * v);
  }
  return prob;
}

void FitProblem::validate() const {
  if (free_names.empty()) throw InputError("fit: no free parameters");
  if (lower.size() != free_names.size() || upper.size() != free_names.size()) {
    throw InputError("fit: bounds must match the free parameter list");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < free_names.size(); ++i) {
    if (!ParameterSet::has(free_names[i])) {
      throw InputError("fit: unknown free parameter '" + free_names[i] + "'");
    }
    if (!seen.insert(free_names[i]).second) {
      throw InputError("fit: duplicate free parameter '" + free_names[i] + "'");
    }
    if (!(lower[i] > 0) || !(lower[i] < upper[i]) || !std::isfinite(upper[i])) {
      throw InputError("fit: bounds for '" + free_names[i] + "' must satisfy 0 < lower < upper");
    }
  }
  if (!(weight_acth >= 0) || !(weight_cortisol >= 0)) {
    throw InputError("fit: objective weights must be >= 0");
  }
  integration.validate();
}

ParameterSet FitProblem::assemble(std::span<const double> candidate) const {
  if (candidate.size() != free_names.size()) {
    throw InputError("fit: candidate length does not match the free parameter list");
  }
  ParameterSet p = base;
  for (std::size_t i = 0; i < candidate.size(); ++i) p.set(free_names[i], candidate[i]);
  return p;
}

std::vector<double> FitProblem::initial_values() const {
  std::vector<double> v;
  for (const auto& name : free_names) v.push_back(base.get(name));
  return v;
}

double objective(std::span<const double> candidate, const FitProblem& prob,
                 const ObservationSeries& obs) {
  const ParameterSet p = prob.assemble(candidate);
  obs.validate();

  if (obs.times.front() < prob.integration.t0 || obs.times.back() > prob.integration.t_end) {
    throw InputError("fit: observation times fall outside the integration window");
  }

  std::vector<HormoneState> model;
  try {
    model = integrate_at(prob.integration, p, obs.times);
  } catch (const NumericalError&) {
    return kFailurePenalty;
  }

  double value = 0;
  if (prob.objective_kind == ObjectiveKind::kSumMape) {
    std::vector<double> a(model.size()), c(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
      a[i] = model[i].A;
      c[i] = model[i].C;
    }
    if (obs.has_acth()) value += prob.weight_acth * mape(a, obs.acth);
    if (obs.has_cortisol()) value += prob.weight_cortisol * mape(c, obs.cortisol);
  } else {
    for (std::size_t i = 0; i < model.size(); ++i) {
      if (obs.has_acth()) value += prob.weight_acth * std::pow(model[i].A - obs.acth[i], 2);
      if (obs.has_cortisol()) {
        value += prob.weight_cortisol * std::pow(model[i].C - obs.cortisol[i], 2);
      }
    }
  }
  return std::isfinite(value) ? value : kFailurePenalty;
}

FitResult fit(const FitProblem& prob, const ObservationSeries& obs, std::span<const double> init,
              std::size_t budget, std::uint64_t seed, const FitOptions& options) {
  prob.validate();
  obs.validate();
  if (budget < 1) throw InputError("fit: budget must be >= 1");
  if (options.starts < 1) throw InputError("fit: at least one start is required");
  if (init.size() != prob.free_names.size()) {
    throw InputError("fit: initial vector does not match the free parameter list");
  }
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (!(init[i] >= prob.lower[i] && init[i] <= prob.upper[i])) {
      throw InputError("fit: initial value for '" + prob.free_names[i] + "' is outside its bounds");
    }
  }

  const LogBox box(prob.lower, prob.upper);
  const std::size_t n = init.size();

  std::vector<std::vector<double>> starts{box.to_unit(init)};
  Rng rng(seed);
  for (std::size_t s = 1; s < options.starts; ++s) {
    std::vector<double> u(n);
    for (auto& ui : u) ui = rng.uniform();
    starts.push_back(std::move(u));
  }

  std::vector<std::size_t> budgets(starts.size(), budget / starts.size());
  for (std::size_t s = 0; s < budget % starts.size(); ++s) ++budgets[s];

  auto f = [&](std::span<const double> x) {
    if (options.on_evaluate) options.on_evaluate(x);
    return objective(x, prob, obs);
  };

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    if (budgets[s] == 0) return;
    outcomes[s] = SimplexRun(box, budgets[s], f).run(starts[s], s == 0 ? init : std::span<const double>{});
  });

  FitResult result;
  result.objective_value = std::numeric_limits<double>::infinity();
  double running = std::numeric_limits<double>::infinity();
  for (const auto& o : outcomes) {
    for (double v : o.trace) {
      running = std::min(running, v);
      result.history.emplace_back(++result.evaluations, running);
    }
    if (!o.best_x.empty() && o.best_f < result.objective_value) {
      result.objective_value = o.best_f;
      result.free_values = o.best_x;
      result.converged = o.converged;
    }
  }
  result.fitted = prob.assemble(result.free_values);
  return result;
}

ObservationSeries synthesize_observations(const ParameterSet& p, const IntegrationConfig& config,
                                          double cadence, double noise, std::uint64_t seed) {
  if (!(cadence > 0)) throw InputError("synthesize: cadence must be > 0");
  if (!(noise >= 0)) throw InputError("synthesize: noise must be >= 0");
  ObservationSeries obs;
  for (std::size_t i = 0;; ++i) {
    const double t = config.t0 + static_cast<double>(i) * cadence;
    if (t > config.t_end + 1e-9) break;
    obs.times.push_back(std::min(t, config.t_end));
  }
  const auto states = integrate_at(config, p, obs.times);
  Rng rng(seed);
  for (const auto& s : states) {
    // Draw order is fixed (ACTH then cortisol) so a seed pins the dataset.
    const double ea = noise > 0 ? 1.0 + noise * rng.normal() : 1.0;
    const double ec = noise > 0 ? 1.0 + noise * rng.normal() : 1.0;
    obs.acth.push_back(s.A * ea);
    obs.cortisol.push_back(s.C * ec);
  }
  obs.subject_id = "synthetic";
  return obs;
}

}  // namespace hpa
