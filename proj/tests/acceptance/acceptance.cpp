// Acceptance suite: one PASS/FAIL line per criterion, with measured values
// and wall time. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hpa/calibration.hpp"
#include "hpa/commands.hpp"
#include "hpa/integrator.hpp"
#include "hpa/io.hpp"
#include "hpa/metrics.hpp"
#include "hpa/model.hpp"
#include "hpa/random.hpp"
#include "hpa/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace hpa;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double inf_norm(const HormoneState& s) { return std::max({std::abs(s.R), std::abs(s.A), std::abs(s.C)}); }

double inf_gap(const HormoneState& a, const HormoneState& b) {
  return std::max({std::abs(a.R - b.R), std::abs(a.A - b.A), std::abs(a.C - b.C)});
}

// ---------------------------------------------------------------------------

Outcome daylight_exactness() {
  Outcome o;
  const double e0 = std::abs(hpa::daylight(0) - (-1.3 - 2.8) / 11.1 - 0.4);
  const double e360 = std::abs(hpa::daylight(360) - (3.9 + 1.3) / 11.1 - 0.4);
  const double e720 = std::abs(hpa::daylight(720) - (-1.3 + 2.8) / 11.1 - 0.4);
  o.check(std::max({e0, e360, e720}) <= 1e-12,
          "max error at 0/360/720 = " + fmt("%.2e", std::max({e0, e360, e720})));
  Rng rng(1);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double t = (rng.uniform() - 0.5) * 1e5;
    worst = std::max(worst, std::abs(hpa::daylight(t) - hpa::daylight(t + 1440)));
  }
  o.check(worst <= 1e-12, "periodicity gap = " + fmt("%.2e", worst));
  return o;
}

Outcome feedback_free_closed_form() {
  Outcome o;
  ParameterSet p;
  p.phi = p.rho = p.psi = p.xi = 0;
  const HormoneState s = steady_state_open_loop(p, hpa::daylight(0));
  // Residual with D held at the value the fixed point was built for.
  ParameterSet frozen = p;
  frozen.k2 = 0;
  frozen.k3 = 0;
  const HormoneState sf = steady_state_open_loop(frozen, 0.0);
  const Derivatives d = rhs(0.0, s, p);
  const Derivatives df = rhs(777.0, sf, frozen);
  const double res = std::max({std::abs(d.dR), std::abs(d.dA), std::abs(d.dC), std::abs(df.dR),
                               std::abs(df.dA), std::abs(df.dC)});
  o.check(res <= 1e-12, "rhs residual = " + fmt("%.2e", res));

  const std::vector<double> grid{0, 360, 720, 1080, 1439};
  const double h = 5e-4;
  double ek5 = 0, eh3 = 0;
  for (double v : si_timeseries(frozen, "k5", grid, h)) ek5 = std::max(ek5, std::abs(v - 1));
  for (double v : si_timeseries(frozen, "h3", grid, h)) eh3 = std::max(eh3, std::abs(v + 1));
  o.check(ek5 <= 1e-6, "|SI(k5) - 1| = " + fmt("%.2e", ek5));
  o.check(eh3 <= 1e-6, "|SI(h3) + 1| = " + fmt("%.2e", eh3) + " (rel_step 5e-4)");
  return o;
}

Outcome integrator_order() {
  Outcome o;
  const ParameterSet p;
  IntegrationConfig ref;
  ref.mode = StepMode::kAdaptive;
  ref.burn_in = 0;
  ref.t_end = 720;
  ref.initial_state = HormoneState{6.0, 12.0, 5.0};
  ref.abs_tol = ref.rel_tol = 1e-12;
  const HormoneState exact = integrate(ref, p).states.back();
  auto error_at = [&](double dt) {
    IntegrationConfig c = ref;
    c.mode = StepMode::kFixed;
    c.dt = dt;
    return inf_gap(integrate(c, p).states.back(), exact);
  };
  const double order = std::log2(error_at(8.0) / error_at(4.0));
  o.check(order >= 3.5 && order <= 4.5, "RK4 order = " + fmt("%.3f", order));

  IntegrationConfig fixed;  // dt 0.5, 10-day burn-in
  IntegrationConfig adaptive = fixed;
  adaptive.mode = StepMode::kAdaptive;
  const Trajectory a = integrate(adaptive, p);
  const std::vector<HormoneState> f = integrate_at(fixed, p, a.times);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, inf_gap(a.states[i], f[i]) / inf_norm(f[i]));
  o.check(worst <= 1e-4, "adaptive vs fixed rel gap = " + fmt("%.2e", worst));
  return o;
}

Outcome periodic_attractor() {
  Outcome o;
  IntegrationConfig c;
  c.mode = StepMode::kAdaptive;
  c.t_end = 2880;
  const Trajectory t = integrate(c, ParameterSet{});
  double worst = 0;
  for (std::size_t i = 0; i < 1440; ++i) {
    worst = std::max(worst, inf_gap(t.states[i], t.states[i + 1440]) / inf_norm(t.states[i + 1440]));
  }
  o.check(worst <= 1e-2, "day-to-day rel gap = " + fmt("%.2e", worst));
  std::size_t peak = 1440;
  for (std::size_t i = 1440; i <= 2880; ++i) {
    if (t.states[i].C > t.states[peak].C) peak = i;
  }
  const double tp = t.times[peak] - 1440;
  o.check(tp >= 240 && tp <= 720, "cortisol peak at t = " + fmt("%.0f", tp) + " min");
  return o;
}

Outcome metric_tests() {
  Outcome o;
  using V = std::vector<double>;
  const bool examples = mape(V{11}, V{10}) == 10.0 && mape(V{12, 8}, V{10, 10}) == 20.0 &&
                        mape(V{3, 4}, V{3, 4}) == 0.0 && rmse(V{13}, V{10}) == 3.0 &&
                        rmse(V{10, 14}, V{10, 10}) == std::sqrt(8.0) && rmse(V{3, 4}, V{3, 4}) == 0.0 &&
                        mape(V{11}, V{10}) != mape(V{10}, V{11});
  o.check(examples, "examples exact");

  Rng rng(5);
  std::size_t bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 40);
    V p(n), a(n), cp(n), ca(n);
    const double c = std::exp(2 * rng.normal());
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::exp(rng.normal());
      a[i] = std::exp(rng.normal());
      cp[i] = c * p[i];
      ca[i] = c * a[i];
    }
    const double m = mape(p, a), r = rmse(p, a);
    V rp(p.rbegin(), p.rend()), ra(a.rbegin(), a.rend());
    const bool ok = std::abs(rmse(a, p) - r) <= 1e-12 * r &&
                    std::abs(rmse(cp, ca) - c * r) <= 1e-10 * c * r &&
                    std::abs(mape(cp, ca) - m) <= 1e-10 * m && std::abs(mape(rp, ra) - m) <= 1e-10 * m &&
                    std::abs(rmse(rp, ra) - r) <= 1e-12 * r;
    if (!ok) ++bad;
  }
  o.check(bad == 0, "property violations = " + std::to_string(bad) + "/1000");
  return o;
}

Outcome fit_recovery() {
  Outcome o;
  const ParameterSet truth;
  const std::vector<std::string> names{"k1", "k2", "k3", "k4", "k5"};
  const FitProblem prob = FitProblem::around(truth, names);
  std::vector<double> init = prob.initial_values();
  for (std::size_t i = 0; i < init.size(); ++i) init[i] *= (i % 2 ? 0.8 : 1.2);
  const std::size_t budget = 5000;

  auto run = [&](double noise, double tol, const char* label) {
    const ObservationSeries obs = synthesize_observations(truth, prob.integration, 30, noise, 7);
    const FitResult r = fit(prob, obs, init, budget, 42);
    std::string worst_name;
    double worst = 0;
    std::ostringstream rels;
    for (const auto& n : names) {
      const double rel = std::abs(r.fitted.get(n) / truth.get(n) - 1);
      rels << ' ' << n << ' ' << fmt("%+.1f%%", 100 * (r.fitted.get(n) / truth.get(n) - 1));
      if (rel > worst) {
        worst = rel;
        worst_name = n;
      }
    }
    o.check(worst <= tol && r.evaluations <= budget,
            std::string(label) + ": evals " + std::to_string(r.evaluations) + ", max rel err " +
                fmt("%.1f%%", 100 * worst) + " (" + worst_name + ");" + rels.str());
    return r;
  };
  const FitResult clean = run(0.0, 0.05, "noise-free");
  run(0.05, 0.15, "5% noise");

  // Not gating: the combinations the observations determine.
  const ParameterSet& f = clean.fitted;
  std::printf("       info: noise-free identifiable combinations k1*k4 %+.2f%%, k2*k4 %+.2f%%, k3 %+.2f%%, k5 %+.2f%%\n",
              100 * (f.k1 * f.k4 / (truth.k1 * truth.k4) - 1), 100 * (f.k2 * f.k4 / (truth.k2 * truth.k4) - 1),
              100 * (f.k3 / truth.k3 - 1), 100 * (f.k5 / truth.k5 - 1));
  return o;
}

Outcome sensitivity_reproduction() {
  Outcome o;
  const SensitivityReport r = rank_parameters(ParameterSet{}, default_sensitivity_grid());
  std::ostringstream top;
  for (std::size_t i = 0; i < 4; ++i) top << (i ? "," : "") << r.ranking[i];
  o.check(r.ranking[0] == "k5" && r.ranking[1] == "k4", "top ranking " + top.str());
  const bool bottom = r.rank_of("alpha") >= 17 && r.rank_of("R_A") >= 17;
  o.check(bottom, "rank(alpha) = " + std::to_string(r.rank_of("alpha")) +
                      ", rank(R_A) = " + std::to_string(r.rank_of("R_A")));
  const double corr = r.correlation[r.index_of("k5")][r.index_of("k4")];
  o.check(corr >= 0.99, "corr(k5,k4) = " + fmt("%.4f", corr));
  std::string unstable;
  for (std::size_t i = 0; i < r.parameter_names.size(); ++i) {
    if (r.fd_unstable[i]) unstable += (unstable.empty() ? "" : ",") + r.parameter_names[i];
  }
  o.check(unstable.empty(), "FD-unstable: " + (unstable.empty() ? std::string("none") : unstable));

  // Not gating: ordering among production and feedback parameters only, and
  // the correlation of unnormalized sensitivities p dC/dp = SI * C.
  std::ostringstream production;
  int shown = 0;
  for (const auto& n : r.ranking) {
    if (n[0] == 'h' || shown == 4) continue;
    production << (shown++ ? "," : "") << n;
  }
  const SensitivityConfig sc;
  const auto states = integrate_at(sc.integration, ParameterSet{}, r.grid);
  std::vector<std::vector<double>> scaled(2);
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    scaled[0].push_back(r.si_series[r.index_of("k5")][i] * states[i].C);
    scaled[1].push_back(r.si_series[r.index_of("k4")][i] * states[i].C);
  }
  std::printf("       info: ranking without removal rates %s; corr(k5,k4) of p*dC/dp = %.4f\n",
              production.str().c_str(), correlation_matrix(scaled)[0][1]);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HPA_DYN_EXE + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_round_trip() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "hpa_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };

  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "sens.grid_step_min = 30\nsens.dt_min = 0.5\nfit.budget = 60\nfit.starts = 2\n";
  }
  bool ran = cli("synth --config " + q(dir / "run.cfg") + " --out " + q(dir / "synth")) == 0;
  const fs::path data = dir / "synth" / "observations.csv";

  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"simulate", {"trajectory.csv"}},
      {"daylight", {"daylight.csv"}},
      {"synth", {"observations.csv"}},
      {"validate", {"scores.csv"}},
      {"fit", {"fitted_params.csv", "scores.csv", "fit_history.csv"}},
      {"sensitivity", {"sensitivity.csv", "correlation.csv", "si_series.csv"}},
  };
  std::size_t identical = 0, total = 0;
  for (const auto& [command, files] : runs) {
    const bool needs_data = command == "validate" || command == "fit";
    ran = ran && cli(command + " --config " + q(dir / "run.cfg") + " --out " + q(dir / (command + "_a")) +
                     (needs_data ? " --data " + q(data) : "")) == 0;
    ran = ran && cli(command + " --config " + q(dir / (command + "_a") / kManifestFile) + " --out " +
                     q(dir / (command + "_b"))) == 0;
    for (const auto& f : files) {
      ++total;
      const std::string a = slurp(dir / (command + "_a") / f);
      if (!a.empty() && a == slurp(dir / (command + "_b") / f)) ++identical;
    }
  }
  o.check(ran && identical == total,
          "manifest replays byte-identical " + std::to_string(identical) + "/" + std::to_string(total));

  bool zero = false;
  try {
    ran = cli("simulate --out " + q(dir / "export")) == 0;
    const Trajectory t = parse_trajectory(dir / "export" / "trajectory.csv");
    ObservationSeries obs;
    obs.times = t.times;
    for (const auto& s : t.states) {
      obs.acth.push_back(s.A);
      obs.cortisol.push_back(s.C);
    }
    {
      std::ofstream f(dir / "ingest.csv");
      write_observations(f, obs);
    }
    ran = ran && cli("validate --data " + q(dir / "ingest.csv") + " --out " + q(dir / "val")) == 0;
    zero = ran && slurp(dir / "val" / "scores.csv") == "hormone,mape_pct,rmse\nacth,0,0\ncortisol,0,0\n";
  } catch (const std::exception&) {
    zero = false;
  }
  o.check(zero, std::string("export->ingest->validate ") + (zero ? "MAPE = RMSE = 0" : "nonzero"));
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "daylight exactness", 1, daylight_exactness},
      {2, "feedback-free closed form", 5, feedback_free_closed_form},
      {3, "integrator order and agreement", 30, integrator_order},
      {4, "24-h periodic attractor", 30, periodic_attractor},
      {5, "metric unit tests", 5, metric_tests},
      {6, "fit recovery oracle", 600, fit_recovery},
      {7, "sensitivity qualitative reproduction", 300, sensitivity_reproduction},
      {8, "CLI round-trip and manifest reproducibility", 60, cli_round_trip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(secs < c.limit_s, fmt("%.2f s", secs) + " < " + fmt("%.0f s", c.limit_s));
    if (!o.pass) ++failed;
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
