#include "hpa/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hpa/error.hpp"

namespace hpa {
namespace {

struct Field {
  std::string_view name;
  double ParameterSet::*member;
};

constexpr std::array<Field, ParameterSet::kNumScalars> kFields{{
    {"k1", &ParameterSet::k1},       {"k2", &ParameterSet::k2},
    {"k3", &ParameterSet::k3},       {"k4", &ParameterSet::k4},
    {"k5", &ParameterSet::k5},       {"h1", &ParameterSet::h1},
    {"h2", &ParameterSet::h2},       {"h3", &ParameterSet::h3},
    {"R_C", &ParameterSet::R_C},     {"R_A", &ParameterSet::R_A},
    {"R_D", &ParameterSet::R_D},     {"alpha", &ParameterSet::alpha},
    {"beta", &ParameterSet::beta},   {"gamma", &ParameterSet::gamma},
    {"delta", &ParameterSet::delta}, {"phi", &ParameterSet::phi},
    {"psi", &ParameterSet::psi},     {"xi", &ParameterSet::xi},
    {"rho", &ParameterSet::rho},
}};

constexpr std::array<std::string_view, ParameterSet::kNumScalars> kNames = [] {
  std::array<std::string_view, ParameterSet::kNumScalars> out{};
  for (std::size_t i = 0; i < kFields.size(); ++i) out[i] = kFields[i].name;
  return out;
}();

const Field* find_field(std::string_view name) {
  auto it = std::find_if(kFields.begin(), kFields.end(),
                         [&](const Field& f) { return f.name == name; });
  return it == kFields.end() ? nullptr : &*it;
}

[[noreturn]] void fail_domain(std::string_view name, double v, std::string_view rule) {
  std::ostringstream os;
  os << "parameter " << name << " = " << v << " violates " << rule;
  throw InputError(os.str());
}

}  // namespace

std::string_view to_string(XiSign s) {
  return s == XiSign::kExcitatory ? "excitatory" : "inhibitory";
}

std::optional<XiSign> parse_xi_sign(std::string_view s) {
  if (s == "excitatory") return XiSign::kExcitatory;
  if (s == "inhibitory") return XiSign::kInhibitory;
  return std::nullopt;
}

std::span<const std::string_view, ParameterSet::kNumScalars> ParameterSet::names() {
  return kNames;
}

bool ParameterSet::has(std::string_view name) { return find_field(name) != nullptr; }

double ParameterSet::get(std::string_view name) const {
  const Field* f = find_field(name);
  if (!f) throw InputError("unknown parameter '" + std::string(name) + "'");
  return this->*(f->member);
}

void ParameterSet::set(std::string_view name, double value) {
  const Field* f = find_field(name);
  if (!f) throw InputError("unknown parameter '" + std::string(name) + "'");
  this->*(f->member) = value;
}

void ParameterSet::validate() const {
  for (const Field& f : kFields) {
    if (!std::isfinite(this->*(f.member))) fail_domain(f.name, this->*(f.member), "finiteness");
  }
  for (auto name : {"k1", "k2", "k3", "k4", "k5", "h1", "h2", "h3", "R_C", "R_A", "R_D"}) {
    if (!(get(name) > 0)) fail_domain(name, get(name), "> 0");
  }
  for (auto name : {"alpha", "beta", "gamma", "delta"}) {
    if (!(get(name) >= 1)) fail_domain(name, get(name), ">= 1");
  }
  for (auto name : {"phi", "rho"}) {
    if (!(get(name) >= 0 && get(name) <= 1)) fail_domain(name, get(name), "0 <= x <= 1");
  }
  for (auto name : {"psi", "xi"}) {
    if (!(get(name) >= 0)) fail_domain(name, get(name), ">= 0");
  }
}

bool HormoneState::finite() const {
  return std::isfinite(R) && std::isfinite(A) && std::isfinite(C);
}

double hill(double x, double K, double n) {
  if (!(x >= 0)) throw DomainError("hill: x must be >= 0 (got " + std::to_string(x) + ")");
  if (!(K > 0)) throw DomainError("hill: K must be > 0 (got " + std::to_string(K) + ")");
  if (!(n >= 1)) throw DomainError("hill: n must be >= 1 (got " + std::to_string(n) + ")");
  if (x == 0) return 0.0;
  // (K/x)^n form stays finite for large x.
  return 1.0 / (1.0 + std::pow(K / x, n));
}

double daylight(double t) {
  constexpr double w = std::numbers::pi / 720.0;
  // Reduce to one period so D(t) and D(t + 1440) share the same argument.
  const double tr = std::fmod(t, 1440.0);
  return (3.9 * std::sin(w * tr) - std::sin(2 * w * tr) - 1.3 * std::cos(2 * w * tr) -
          2.8 * std::cos(w * tr)) /
             11.1 +
         0.4;
}

double crh_feedback_factor(double C, const ParameterSet& p) {
  const double sign = p.xi_sign == XiSign::kExcitatory ? 1.0 : -1.0;
  const double f = 1.0 + sign * p.xi * hill(C, p.R_C, p.beta) - p.psi * hill(C, p.R_C, p.delta);
  return p.clamp_production ? std::max(f, 0.0) : f;
}

Derivatives rhs(double t, const HormoneState& s, const ParameterSet& p) {
  if (!s.finite()) throw NumericalError("rhs: non-finite state", t);
  const double d = daylight(t);
  const double h_cort = hill(s.C, p.R_C, p.beta);

  Derivatives out;
  out.dR = (p.k1 + d * p.k2) * (1.0 - p.phi * hill(s.A, p.R_A, p.alpha)) *
               crh_feedback_factor(s.C, p) -
           p.h1 * s.R;
  out.dA = (p.k3 * hill(d, p.R_D, p.gamma) + p.k4 * s.R) * (1.0 - p.rho * h_cort) - p.h2 * s.A;
  out.dC = p.k5 * s.A - p.h3 * s.C;
  return out;
}

HormoneState open_loop_seed(const ParameterSet& p, double d_const) {
  HormoneState s;
  s.R = (p.k1 + d_const * p.k2) / p.h1;
  s.A = (p.k3 * hill(d_const, p.R_D, p.gamma) + p.k4 * s.R) / p.h2;
  s.C = p.k5 * s.A / p.h3;
  return s;
}

HormoneState steady_state_open_loop(const ParameterSet& p, double d_const) {
  if (!p.feedback_free()) {
    throw InputError("steady_state_open_loop: requires phi = rho = psi = xi = 0");
  }
  if (!(d_const >= 0)) throw InputError("steady_state_open_loop: D must be >= 0");
  return open_loop_seed(p, d_const);
}

}  // namespace hpa
