#pragma once

// Three-compartment HPA axis model: CRH (R), ACTH (A) and cortisol (C)
// driven by a circadian daylight signal, with Hill-type feedback of ACTH and
// cortisol on CRH release, cortisol feedback on ACTH release, and an
// AVP pathway gated by daylight.
//
// Time is in minutes since midnight throughout.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace hpa {

// Sign of the net C^beta Hill term in the CRH feedback bracket.
//   kExcitatory: F = 1 + xi*H_beta(C) - psi*H_delta(C)   (net GR drive)
//   kInhibitory: F = 1 - xi*H_beta(C) - psi*H_delta(C)
enum class XiSign { kExcitatory, kInhibitory };

std::string_view to_string(XiSign s);
std::optional<XiSign> parse_xi_sign(std::string_view s);

struct ParameterSet {
  // production / stimulation
  double k1 = 0.5703;
  double k2 = 0.4342;
  double k3 = 0.2166;
  double k4 = 0.0821;
  double k5 = 0.00430;
  // first-order removal
  double h1 = 0.1732;
  double h2 = 0.0315;
  double h3 = 0.0105;
  // half-max constants
  double R_C = 1.12;
  double R_A = 0.78;
  double R_D = 1.3;
  // Hill exponents
  double alpha = 4.0;
  double beta = 3.0;
  double gamma = 3.0;
  double delta = 3.0;
  // feedback strengths
  double phi = 0.160;
  double psi = 0.5;
  double xi = 2.0;
  double rho = 0.304;

  bool clamp_production = true;
  XiSign xi_sign = XiSign::kExcitatory;

  static constexpr std::size_t kNumScalars = 19;

  // Scalar parameter names in canonical order.
  static std::span<const std::string_view, kNumScalars> names();

  static bool has(std::string_view name);

  // Throws InputError for unknown names.
  double get(std::string_view name) const;
  void set(std::string_view name, double value);

  // Throws InputError describing the first violated domain constraint.
  void validate() const;

  bool feedback_free() const { return phi == 0 && rho == 0 && psi == 0 && xi == 0; }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

struct HormoneState {
  double R = 0.0;  // CRH
  double A = 0.0;  // ACTH
  double C = 0.0;  // cortisol

  bool finite() const;

  friend bool operator==(const HormoneState&, const HormoneState&) = default;
};

struct Derivatives {
  double dR = 0.0;
  double dA = 0.0;
  double dC = 0.0;
};

// x^n / (K^n + x^n). Throws DomainError if x < 0, K <= 0 or n < 1.
double hill(double x, double K, double n);

// Circadian daylight signal, period 1440 min.
double daylight(double t);

// Cortisol/hippocampal modulation of CRH production, clamped at zero when
// p.clamp_production is set.
double crh_feedback_factor(double C, const ParameterSet& p);

// Right-hand side of the ODE system. Throws NumericalError on non-finite
// state and DomainError on negative concentrations entering a Hill term.
Derivatives rhs(double t, const HormoneState& s, const ParameterSet& p);

// Fixed point of the system with all feedback coefficients zero and the
// daylight input frozen at d_const. Throws InputError if any of
// phi, rho, psi, xi is nonzero.
HormoneState steady_state_open_loop(const ParameterSet& p, double d_const);

// Same closed form with feedback coefficients ignored; used to seed
// integration of the full model.
HormoneState open_loop_seed(const ParameterSet& p, double d_const);

}  // namespace hpa
