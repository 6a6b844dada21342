#pragma once

// Constitutive scalar functions of the phase-field models and per-phase
// property tables (mm-MPa-N units).

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <string_view>

#include "mpfrac/cohesive.hpp"
#include "mpfrac/types.hpp"

namespace mpfrac {

struct PhaseProperties {
  double E = 0.0;        // MPa
  double nu = 0.0;
  double Gc = 0.0;       // N/mm
  double sigma_u = 0.0;  // MPa

  void validate(std::string_view name = "phase") const {
    const std::string n(name);
    if (!(E > 0.0)) throw MaterialError(n + ": E must be > 0");
    if (!(nu >= 0.0 && nu < 0.5)) throw MaterialError(n + ": nu must lie in [0, 0.5)");
    if (!(Gc > 0.0)) throw MaterialError(n + ": Gc must be > 0");
    if (!(sigma_u > 0.0)) throw MaterialError(n + ": sigma_u must be > 0");
  }
};

enum class Scheme { AT1, AT2, CPFM };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::AT1: return "AT1";
    case Scheme::AT2: return "AT2";
    case Scheme::CPFM: return "CPFM";
  }
  return "?";
}

struct FractureModel {
  Scheme scheme = Scheme::AT2;
  double k_residual = 1e-7;  // only used by AT1/AT2
  // Cornelissen softening pair
  double a2 = 1.3868;
  double a3 = 0.6567;

  void validate() const {
    if (scheme != Scheme::CPFM && !(k_residual > 0.0 && k_residual <= 1e-4))
      throw MaterialError("k_residual must lie in (0, 1e-4]");
  }
};

struct DerivedModelConstants {
  double c0 = 2.0;
  double a1 = 0.0;  // CPFM only, per phase
  double lc = 1.0;  // mm
};

// Value and first two derivatives of a scalar function of the damage.
struct ScalarDerivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

namespace detail {
inline double checked_damage(double phi) {
  constexpr double tol = 1e-9;
  if (!(phi >= -tol && phi <= 1.0 + tol))
    throw MaterialError("damage value " + std::to_string(phi) + " outside [0, 1]");
  return std::clamp(phi, 0.0, 1.0);
}
}  // namespace detail

/// Degradation function omega(phi).
///   AT1/AT2: (1-phi)^2 + k
///   CPFM:    (1-phi)^2 / ((1-phi)^2 + a1 phi (1 + a2 phi + a2 a3 phi^2))
inline ScalarDerivs omega(const FractureModel& model, const DerivedModelConstants& consts,
                          double phi) {
  phi = detail::checked_damage(phi);
  const double s = 1.0 - phi;
  if (model.scheme != Scheme::CPFM) return {s * s + model.k_residual, -2.0 * s, 2.0};

  const double a1 = consts.a1, a2 = model.a2, a3 = model.a3;
  const double P = s * s, dP = -2.0 * s, ddP = 2.0;
  const double Q = P + a1 * phi + a1 * a2 * phi * phi + a1 * a2 * a3 * phi * phi * phi;
  const double dQ = dP + a1 + 2.0 * a1 * a2 * phi + 3.0 * a1 * a2 * a3 * phi * phi;
  const double ddQ = ddP + 2.0 * a1 * a2 + 6.0 * a1 * a2 * a3 * phi;
  const double num1 = dP * Q - P * dQ;
  return {P / Q, num1 / (Q * Q), (ddP * Q - P * ddQ) / (Q * Q) - 2.0 * dQ * num1 / (Q * Q * Q)};
}

/// Crack geometric function alpha(phi).
inline ScalarDerivs alpha(const FractureModel& model, double phi) {
  phi = detail::checked_damage(phi);
  switch (model.scheme) {
    case Scheme::AT1: return {phi, 1.0, 0.0};
    case Scheme::AT2: return {phi * phi, 2.0 * phi, 2.0};
    case Scheme::CPFM: return {2.0 * phi - phi * phi, 2.0 - 2.0 * phi, -2.0};
  }
  return {};
}

/// Normalisation constant 4 * int_0^1 sqrt(alpha).
inline double c0(const FractureModel& model) {
  switch (model.scheme) {
    case Scheme::AT1: return 8.0 / 3.0;
    case Scheme::AT2: return 2.0;
    case Scheme::CPFM: return std::numbers::pi;
  }
  return 0.0;
}

/// CPFM coefficient a1 = 4 E Gc / (pi lc sigma_u^2), i.e. 4 l_ch / (pi lc).
/// With this normalisation damage starts exactly when the driving energy
/// reaches sigma_u^2 / (2E).
inline double cpfm_a1(const PhaseProperties& props, double lc) {
  if (!(lc > 0.0)) throw MaterialError("length scale must be > 0");
  return 4.0 * props.E * props.Gc / (props.sigma_u * props.sigma_u * std::numbers::pi * lc);
}

/// General softening-curve coefficients. k0 is the (negative) initial slope of
/// the softening law, p its exponent, du the ultimate opening. No defaults are
/// shipped for these; the Cornelissen pair in FractureModel is used instead.
inline double cpfm_a2(double k0, double Gc, double sigma_u, double p) {
  const double base = -2.0 * k0 * Gc / (sigma_u * sigma_u);
  if (!(base > 0.0)) throw MaterialError("softening slope k0 must be negative");
  return 2.0 * std::cbrt(base * base) - (p + 0.5);
}

inline double cpfm_a3(double a2, double du, double Gc, double sigma_u, double p) {
  if (p > 2.0) return 0.0;
  const double r = du * sigma_u / Gc;
  return (r * r / 8.0 - (1.0 + a2)) / a2;
}

/// Damage threshold of the driving energy, sigma_u^2 / (2E).
inline double psi_eq_threshold(const PhaseProperties& props) {
  return props.sigma_u * props.sigma_u / (2.0 * props.E);
}

inline DerivedModelConstants derive_constants(const FractureModel& model,
                                              const PhaseProperties& props, double lc) {
  DerivedModelConstants c;
  c.c0 = c0(model);
  c.lc = lc;
  c.a1 = model.scheme == Scheme::CPFM ? cpfm_a1(props, lc) : 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Property tables

struct PropertyTables {
  std::map<Phase, PhaseProperties> bulk;
  std::map<Phase, CohesiveLaw> cohesive;

  const PhaseProperties& bulk_props(Phase p) const {
    auto it = bulk.find(p);
    if (it == bulk.end())
      throw MaterialError("missing material entry for phase '" + std::string(to_string(p)) + "'");
    return it->second;
  }

  const CohesiveLaw& cohesive_law(Phase p) const {
    auto it = cohesive.find(p);
    if (it == cohesive.end())
      throw MaterialError("missing cohesive law for phase '" + std::string(to_string(p)) + "'");
    return it->second;
  }

  void validate() const {
    for (Phase p : {Phase::matrix, Phase::inclusion, Phase::interface})
      bulk_props(p).validate(to_string(p));
    for (Phase p : {Phase::cie_matrix, Phase::cie_inclusion, Phase::cie_interface})
      cohesive_law(p).validate(to_string(p));
  }
};

/// Bulk values for phase-field runs and cohesive laws for the CIE sets.
/// Inclusion CIEs carry no damage properties and stay elastic.
inline PropertyTables default_property_tables() {
  PropertyTables t;
  t.bulk[Phase::inclusion] = {72000.0, 0.16, 0.2, 20.0};
  t.bulk[Phase::matrix] = {28000.0, 0.2, 0.06, 4.0};
  t.bulk[Phase::interface] = {21900.0, 0.2, 0.02, 2.4};

  CohesiveLaw interface_law{1e6, 2.4, 10.0, 0.02, 0.4, 1.2, false};
  CohesiveLaw matrix_law{1e6, 4.0, 30.0, 0.06, 1.2, 1.2, false};
  CohesiveLaw inclusion_law{1e6, 1.0, 1.0, 1.0, 1.0, 1.2, true};
  t.cohesive[Phase::cie_interface] = interface_law;
  t.cohesive[Phase::cie_matrix] = matrix_law;
  t.cohesive[Phase::cie_inclusion] = inclusion_law;
  return t;
}

/// Interface strength/toughness variants. interface2 is the default set.
/// Presets set the bulk interface (Gc, sigma_u) and the interface CIE mode-I
/// pair (G_I, sigma_n0); shear properties are left unchanged.
inline void apply_interface_preset(PropertyTables& t, std::string_view name) {
  double gc = 0.0, su = 0.0;
  if (name == "interface1") {
    gc = 0.008;
    su = 1.0;
  } else if (name == "interface2") {
    gc = 0.02;
    su = 2.4;
  } else if (name == "interface3") {
    gc = 0.4;
    su = 6.0;
  } else {
    throw MaterialError("unknown interface preset '" + std::string(name) + "'");
  }
  t.bulk[Phase::interface].Gc = gc;
  t.bulk[Phase::interface].sigma_u = su;
  auto& law = t.cohesive[Phase::cie_interface];
  law.G_I = gc;
  law.sigma_n0 = su;
}

}  // namespace mpfrac
