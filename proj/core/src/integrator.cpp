#include "hpa/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hpa/error.hpp"

namespace hpa {
namespace {

HormoneState axpy(const HormoneState& s, double h, const Derivatives& d) {
  return {s.R + h * d.dR, s.A + h * d.dA, s.C + h * d.dC};
}

std::string at_time(std::string_view what, double t) {
  std::ostringstream os;
  os << what << " at t = " << t << " min";
  return os.str();
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat (error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinStep = 1e-6;
constexpr double kMaxStep = 60.0;
constexpr double kPiAlpha = 0.7 / 5.0;
constexpr double kPiBeta = 0.4 / 5.0;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

HormoneState combine(const HormoneState& y, double h, std::initializer_list<double> w,
                     std::initializer_list<const Derivatives*> k) {
  HormoneState out = y;
  auto wi = w.begin();
  for (const Derivatives* d : k) {
    out.R += h * *wi * d->dR;
    out.A += h * *wi * d->dA;
    out.C += h * *wi * d->dC;
    ++wi;
  }
  return out;
}

// Adaptive Dormand-Prince stepper with PI step control and FSAL reuse.
class DormandPrince {
 public:
  DormandPrince(const ParameterSet& p, double abs_tol, double rel_tol)
      : p_(p), atol_(abs_tol), rtol_(rel_tol) {}

  // Advances (t, y) to exactly t_target.
  void advance(double& t, HormoneState& y, double t_target) {
    if (!have_k1_) {
      k1_ = rhs(t, y, p_);
      have_k1_ = true;
    }
    if (h_ <= 0) h_ = initial_step(t, y);
    while (t < t_target) {
      const double remaining = t_target - t;
      // Land exactly on the target without disturbing the controller's
      // proposed step.
      const bool last = h_ >= remaining * (1 - 1e-12);
      const double h = last ? remaining : h_;

      Derivatives k7;
      HormoneState y_new;
      double err = 0;
      bool ok = true;
      try {
        err = trial(t, y, h, y_new, k7);
      } catch (const NumericalError&) {
        ok = false;
      }

      if (ok && err <= 1.0) {
        const double factor =
            err == 0 ? kMaxFactor
                     : std::clamp(kSafety * std::pow(err, -kPiAlpha) * std::pow(err_prev_, kPiBeta),
                                  kMinFactor, kMaxFactor);
        err_prev_ = std::max(err, 1e-4);
        t = last ? t_target : t + h;
        y = y_new;
        k1_ = k7;
        if (!last || h_ <= remaining) h_ = std::min(h * factor, kMaxStep);
      } else {
        const double factor =
            ok ? std::max(kSafety * std::pow(err, -1.0 / 5.0), kMinFactor) : 0.25;
        h_ = h * factor;
        if (h_ < kMinStep) throw NumericalError(at_time("step-size underflow", t), t);
      }
    }
  }

 private:
  double initial_step(double t, const HormoneState& y) const {
    // Hairer's heuristic, first-order estimate.
    auto scale = [&](double v) { return atol_ + rtol_ * std::abs(v); };
    const double d0 = std::max({std::abs(y.R) / scale(y.R), std::abs(y.A) / scale(y.A),
                                std::abs(y.C) / scale(y.C)});
    const double d1 = std::max({std::abs(k1_.dR) / scale(y.R), std::abs(k1_.dA) / scale(y.A),
                                std::abs(k1_.dC) / scale(y.C)});
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-3 : 0.01 * d0 / d1;
    (void)t;
    return std::clamp(h, kMinStep, kMaxStep);
  }

  double trial(double t, const HormoneState& y, double h, HormoneState& y_new, Derivatives& k7) {
    const Derivatives& k1 = k1_;
    const Derivatives k2 = rhs(t + c2 * h, combine(y, h, {a21}, {&k1}), p_);
    const Derivatives k3 = rhs(t + c3 * h, combine(y, h, {a31, a32}, {&k1, &k2}), p_);
    const Derivatives k4 = rhs(t + c4 * h, combine(y, h, {a41, a42, a43}, {&k1, &k2, &k3}), p_);
    const Derivatives k5 =
        rhs(t + c5 * h, combine(y, h, {a51, a52, a53, a54}, {&k1, &k2, &k3, &k4}), p_);
    const Derivatives k6 =
        rhs(t + h, combine(y, h, {a61, a62, a63, a64, a65}, {&k1, &k2, &k3, &k4, &k5}), p_);
    y_new = combine(y, h, {b1, b3, b4, b5, b6}, {&k1, &k3, &k4, &k5, &k6});
    k7 = rhs(t + h, y_new, p_);

    const HormoneState e = combine(HormoneState{}, h, {e1, e3, e4, e5, e6, e7},
                                   {&k1, &k3, &k4, &k5, &k6, &k7});
    auto ratio = [&](double ei, double y0, double y1) {
      return std::abs(ei) / (atol_ + rtol_ * std::max(std::abs(y0), std::abs(y1)));
    };
    return std::max({ratio(e.R, y.R, y_new.R), ratio(e.A, y.A, y_new.A),
                     ratio(e.C, y.C, y_new.C)});
  }

  const ParameterSet& p_;
  double atol_;
  double rtol_;
  double h_ = 0;
  double err_prev_ = 1.0;
  Derivatives k1_;
  bool have_k1_ = false;
};

// Splits [from, to] into equal steps no longer than dt.
std::size_t step_count(double from, double to, double dt) {
  const double n = std::ceil((to - from) / dt * (1 - 1e-12));
  return static_cast<std::size_t>(std::max(n, 0.0));
}

}  // namespace

void IntegrationConfig::validate() const {
  if (!std::isfinite(t0) || !std::isfinite(t_end) || !(t_end >= t0)) {
    throw InputError("integration: t_end must be >= t0");
  }
  if (!(dt > 0)) throw InputError("integration: dt must be > 0");
  if (!(abs_tol > 0) || !(rel_tol > 0)) throw InputError("integration: tolerances must be > 0");
  if (!(burn_in >= 0)) throw InputError("integration: burn_in must be >= 0");
  if (!(output_step > 0)) throw InputError("integration: output_step must be > 0");
  if (initial_state && !initial_state->finite()) {
    throw InputError("integration: initial state must be finite");
  }
}

HormoneState step_rk4(double t, const HormoneState& s, double dt, const ParameterSet& p) {
  HormoneState out;
  try {
    const Derivatives k1 = rhs(t, s, p);
    const Derivatives k2 = rhs(t + dt / 2, axpy(s, dt / 2, k1), p);
    const Derivatives k3 = rhs(t + dt / 2, axpy(s, dt / 2, k2), p);
    const Derivatives k4 = rhs(t + dt, axpy(s, dt, k3), p);
    out = {s.R + dt / 6 * (k1.dR + 2 * k2.dR + 2 * k3.dR + k4.dR),
           s.A + dt / 6 * (k1.dA + 2 * k2.dA + 2 * k3.dA + k4.dA),
           s.C + dt / 6 * (k1.dC + 2 * k2.dC + 2 * k3.dC + k4.dC)};
  } catch (const NumericalError& e) {
    throw NumericalError(at_time(std::string("rk4 step failed: ") + e.what(), t), t);
  }
  if (!out.finite()) throw NumericalError(at_time("non-finite state", t + dt), t + dt);
  return out;
}

Trajectory integrate(const IntegrationConfig& config, const ParameterSet& p,
                     std::span<const double> output_grid) {
  config.validate();
  const double t_start = config.t0 - config.burn_in;
  HormoneState y = config.initial_state ? *config.initial_state
                                        : open_loop_seed(p, daylight(t_start));
  Trajectory traj;
  traj.params = p;

  if (config.mode == StepMode::kFixed) {
    const std::size_t nb = step_count(t_start, config.t0, config.dt);
    for (std::size_t i = 0; i < nb; ++i) {
      const double h = config.burn_in / static_cast<double>(nb);
      y = step_rk4(t_start + static_cast<double>(i) * h, y, h, p);
    }
    const std::size_t n = step_count(config.t0, config.t_end, config.dt);
    const double h = n == 0 ? 0.0 : (config.t_end - config.t0) / static_cast<double>(n);
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.times.push_back(config.t0);
    traj.states.push_back(y);
    for (std::size_t i = 0; i < n; ++i) {
      y = step_rk4(config.t0 + static_cast<double>(i) * h, y, h, p);
      traj.times.push_back(i + 1 == n ? config.t_end : config.t0 + static_cast<double>(i + 1) * h);
      traj.states.push_back(y);
    }
    return traj;
  }

  std::vector<double> grid;
  if (output_grid.empty()) {
    const std::size_t n = step_count(config.t0, config.t_end, config.output_step);
    grid.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      grid.push_back(config.t0 + static_cast<double>(i) * config.output_step);
    }
    grid.push_back(config.t_end);
  } else {
    grid.assign(output_grid.begin(), output_grid.end());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] < config.t0 || grid[i] > config.t_end || (i > 0 && !(grid[i] > grid[i - 1]))) {
        throw InputError("integration: output grid must be strictly increasing within [t0, t_end]");
      }
    }
  }

  DormandPrince stepper(p, config.abs_tol, config.rel_tol);
  double t = t_start;
  if (config.t0 > t) stepper.advance(t, y, config.t0);
  traj.times.reserve(grid.size());
  traj.states.reserve(grid.size());
  for (double tg : grid) {
    if (tg > t) stepper.advance(t, y, tg);
    traj.times.push_back(tg);
    traj.states.push_back(y);
  }
  return traj;
}

std::vector<HormoneState> integrate_at(const IntegrationConfig& config, const ParameterSet& p,
                                       std::span<const double> times) {
  if (config.mode == StepMode::kFixed) return sample(integrate(config, p), times);
  std::vector<double> grid(times.begin(), times.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return sample(integrate(config, p, grid), times);
}

std::vector<HormoneState> sample(const Trajectory& traj, std::span<const double> query_times) {
  if (traj.times.empty()) throw InputError("sample: empty trajectory");
  std::vector<HormoneState> out;
  out.reserve(query_times.size());
  const auto& ts = traj.times;
  for (double q : query_times) {
    if (!(q >= ts.front() && q <= ts.back())) {
      std::ostringstream os;
      os << "sample: query time " << q << " outside [" << ts.front() << ", " << ts.back() << "]";
      throw InputError(os.str());
    }
    auto it = std::lower_bound(ts.begin(), ts.end(), q);
    const auto i = static_cast<std::size_t>(it - ts.begin());
    if (*it == q) {
      out.push_back(traj.states[i]);
      continue;
    }
    const HormoneState& a = traj.states[i - 1];
    const HormoneState& b = traj.states[i];
    const double w = (q - ts[i - 1]) / (ts[i] - ts[i - 1]);
    out.push_back({a.R + w * (b.R - a.R), a.A + w * (b.A - a.A), a.C + w * (b.C - a.C)});
  }
  return out;
}

}  // namespace hpa
