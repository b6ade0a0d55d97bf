#include "hpa/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hpa/error.hpp"
#include "hpa/parallel.hpp"

namespace hpa {
namespace {

std::vector<double> cortisol_at(const ParameterSet& p, const IntegrationConfig& integration,
                                std::span<const double> grid) {
  const auto states = integrate_at(integration, p, grid);
  std::vector<double> c(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) c[i] = states[i].C;
  return c;
}

void check_step(double rel_step) {
  if (!(rel_step > 0 && rel_step <= 0.5)) throw InputError("sensitivity: rel_step must be in (0, 0.5]");
}

// Central-difference SI given the unperturbed cortisol series.
std::vector<double> si_from_base(const ParameterSet& p, std::string_view name,
                                 std::span<const double> grid, double rel_step,
                                 const IntegrationConfig& integration,
                                 std::span<const double> base) {
  const double value = p.get(name);
  if (value == 0) {
    throw InputError("sensitivity: parameter '" + std::string(name) + "' is zero");
  }
  ParameterSet plus = p;
  ParameterSet minus = p;
  plus.set(name, value * (1 + rel_step));
  minus.set(name, value * (1 - rel_step));
  const auto cp = cortisol_at(plus, integration, grid);
  const auto cm = cortisol_at(minus, integration, grid);

  std::vector<double> si(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (base[i] == 0) {
      std::ostringstream os;
      os << "sensitivity: cortisol is zero at t = " << grid[i];
      throw NumericalError(os.str(), grid[i]);
    }
    // (C+ - C-) / (2 h p) * p / C0 with the p's cancelled.
    si[i] = (cp[i] - cm[i]) / (2 * rel_step) / base[i];
  }
  return si;
}

double mean_abs(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

}  // namespace

IntegrationConfig SensitivityConfig::default_integration() {
  IntegrationConfig c;
  c.mode = StepMode::kFixed;
  c.dt = 0.25;
  c.burn_in = 14400.0;
  c.t0 = 0.0;
  c.t_end = 1440.0;
  return c;
}

void SensitivityConfig::validate() const {
  check_step(rel_step);
  if (!(stability_tol > 0)) throw InputError("sensitivity: stability_tol must be > 0");
  integration.validate();
}

std::vector<double> default_sensitivity_grid() {
  std::vector<double> g(1440);
  std::iota(g.begin(), g.end(), 0.0);
  return g;
}

std::vector<double> si_timeseries(const ParameterSet& p, std::string_view name,
                                  std::span<const double> grid, double rel_step,
                                  const IntegrationConfig& integration) {
  check_step(rel_step);
  if (grid.empty()) throw InputError("sensitivity: empty grid");
  const auto base = cortisol_at(p, integration, grid);
  return si_from_base(p, name, grid, rel_step, integration, base);
}

std::size_t SensitivityReport::index_of(std::string_view name) const {
  auto it = std::find(parameter_names.begin(), parameter_names.end(), name);
  if (it == parameter_names.end()) {
    throw InputError("sensitivity: no parameter '" + std::string(name) + "' in report");
  }
  return static_cast<std::size_t>(it - parameter_names.begin());
}

std::size_t SensitivityReport::rank_of(std::string_view name) const {
  auto it = std::find(ranking.begin(), ranking.end(), name);
  if (it == ranking.end()) {
    throw InputError("sensitivity: no parameter '" + std::string(name) + "' in ranking");
  }
  return static_cast<std::size_t>(it - ranking.begin()) + 1;
}

SensitivityReport rank_parameters(const ParameterSet& p, std::span<const double> grid,
                                  const SensitivityConfig& config) {
  config.validate();
  if (grid.empty()) throw InputError("sensitivity: empty grid");

  SensitivityReport report;
  for (auto n : ParameterSet::names()) report.parameter_names.emplace_back(n);
  report.grid.assign(grid.begin(), grid.end());
  const std::size_t np = report.parameter_names.size();

  const auto base = cortisol_at(p, config.integration, grid);
  report.si_series.resize(np);
  std::vector<std::vector<double>> half(np);
  // Tasks 0..np-1 at rel_step, np..2np-1 at rel_step / 2.
  parallel_for(2 * np, [&](std::size_t task) {
    const std::size_t i = task % np;
    const double h = task < np ? config.rel_step : config.rel_step / 2;
    auto si = si_from_base(p, report.parameter_names[i], grid, h, config.integration, base);
    (task < np ? report.si_series[i] : half[i]) = std::move(si);
  });

  report.si_aggregate.resize(np);
  report.si_aggregate_half.resize(np);
  report.fd_unstable.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    const double a = mean_abs(report.si_series[i]);
    const double b = mean_abs(half[i]);
    report.si_aggregate[i] = a;
    report.si_aggregate_half[i] = b;
    const double scale = std::max(std::abs(a), std::abs(b));
    report.fd_unstable[i] = scale > 0 && std::abs(a - b) / scale >= config.stability_tol;
  }

  std::vector<std::size_t> order(np);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.si_aggregate[a] > report.si_aggregate[b];
  });
  for (std::size_t i : order) report.ranking.push_back(report.parameter_names[i]);

  report.correlation = correlation_matrix(report.si_series, report.parameter_names);
  return report;
}

std::vector<std::vector<double>> correlation_matrix(std::span<const std::vector<double>> series,
                                                    std::span<const std::string> names) {
  const std::size_t n = series.size();
  if (n == 0) return {};
  const std::size_t len = series.front().size();
  if (len < 3) throw InputError("correlation: series must have at least 3 samples");
  auto label = [&](std::size_t i) {
    return i < names.size() ? names[i] : "#" + std::to_string(i);
  };

  // Centred, unit-norm copies; correlations are their dot products.
  std::vector<std::vector<double>> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (series[i].size() != len) throw InputError("correlation: series lengths differ");
    const double mean =
        std::accumulate(series[i].begin(), series[i].end(), 0.0) / static_cast<double>(len);
    z[i].resize(len);
    double ss = 0;
    for (std::size_t k = 0; k < len; ++k) {
      z[i][k] = series[i][k] - mean;
      ss += z[i][k] * z[i][k];
    }
    if (!(ss > 0)) throw NumericalError("correlation: series '" + label(i) + "' has zero variance");
    const double norm = std::sqrt(ss);
    for (double& v : z[i]) v /= norm;
  }

  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    r[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < len; ++k) dot += z[i][k] * z[j][k];
      r[i][j] = r[j][i] = std::clamp(dot, -1.0, 1.0);
    }
  }
  return r;
}

}  // namespace hpa
