#pragma once

// Zero-thickness cohesive interface elements with a bilinear mixed-mode
// traction-separation law (quadratic stress initiation, linear softening,
// Benzeggagh-Kenane mixed-mode toughness).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpfrac/types.hpp"

namespace mpfrac {

struct CohesiveLaw {
  double K = 1e6;          // penalty stiffness, MPa/mm (normal and shear)
  double sigma_n0 = 0.0;   // MPa
  double sigma_s0 = 0.0;   // MPa
  double G_I = 0.0;        // N/mm
  double G_II = 0.0;       // N/mm
  double eta = 1.2;        // B-K exponent
  bool elastic_only = false;

  void validate(std::string_view name = "cohesive law") const {
    const std::string n(name);
    if (!(K > 0.0)) throw MaterialError(n + ": K must be > 0");
    if (elastic_only) return;
    if (!(sigma_n0 > 0.0 && sigma_s0 > 0.0)) throw MaterialError(n + ": strengths must be > 0");
    if (!(G_I > 0.0 && G_II > 0.0)) throw MaterialError(n + ": fracture energies must be > 0");
    if (!(eta > 0.0)) throw MaterialError(n + ": eta must be > 0");
  }
};

struct Separation {
  double delta_n = 0.0;  // normal opening (signed)
  double delta_s = 0.0;  // tangential sliding (signed)
};

struct CohesiveState {
  double D = 0.0;
  double delta_m_max = 0.0;
  double delta_m0 = 0.0;
  double delta_mf = 0.0;
  bool initiated = false;
  // Work of the normal (opening part) and shear tractions, for B-K mixity.
  double G_n = 0.0;
  double G_s = 0.0;
  // Last separation/traction, for incremental work.
  double delta_n = 0.0;
  double delta_s = 0.0;
  double t_n = 0.0;
  double t_s = 0.0;
};

inline double effective_displacement(const Separation& s) {
  const double dn = macaulay(s.delta_n);
  return std::sqrt(dn * dn + s.delta_s * s.delta_s);
}

/// Quadratic nominal-stress criterion value.
inline double initiation_criterion(const CohesiveLaw& law, double t_n, double t_s) {
  const double rn = macaulay(t_n) / law.sigma_n0;
  const double rs = t_s / law.sigma_s0;
  return rn * rn + rs * rs;
}

struct InitiationResult {
  bool initiated = false;
  double criterion = 0.0;
  double mixity = 0.0;  // delta_s / <delta_n>; +inf for pure shear
};

inline InitiationResult initiation_check(const CohesiveLaw& law, const Separation& s) {
  InitiationResult r;
  if (law.elastic_only) return r;
  r.criterion = initiation_criterion(law, law.K * s.delta_n, law.K * s.delta_s);
  r.initiated = r.criterion >= 1.0;
  const double dn = macaulay(s.delta_n);
  r.mixity = dn > 0.0 ? std::abs(s.delta_s) / dn : std::numeric_limits<double>::infinity();
  return r;
}

/// Effective opening at which the quadratic criterion is first met along a
/// proportional path of mixity beta.
inline double mixed_mode_initiation_opening(const CohesiveLaw& law, double beta) {
  const double dn0 = law.sigma_n0 / law.K;
  const double ds0 = law.sigma_s0 / law.K;
  if (std::isinf(beta)) return ds0;
  return dn0 * ds0 * std::sqrt((1.0 + beta * beta) / (ds0 * ds0 + beta * beta * dn0 * dn0));
}

/// B-K effective opening at complete failure.
inline double bk_final_opening(const CohesiveLaw& law, double delta_m0, double G_n, double G_s) {
  if (!(delta_m0 > 0.0)) throw Error("bk_final_opening: delta_m0 must be > 0");
  if (!(G_n + G_s > 0.0)) throw Error("bk_final_opening: undefined mode mixity (G_n + G_s = 0)");
  const double ratio = G_s / (G_n + G_s);
  const double gc = law.G_I + (law.G_II - law.G_I) * std::pow(ratio, law.eta);
  return 2.0 * gc / (law.K * delta_m0);
}

/// Linear-softening damage from the peak effective opening; never decreases.
inline CohesiveState damage_update(CohesiveState state, double delta_m_current) {
  if (!state.initiated) throw Error("damage_update: element has not initiated");
  if (!(state.delta_mf > state.delta_m0))
    throw Error("damage_update: delta_mf must exceed delta_m0 (non-dissipative law)");
  state.delta_m_max = std::max(state.delta_m_max, delta_m_current);
  if (state.delta_m_max <= 0.0) return state;
  double d = state.delta_mf * (state.delta_m_max - state.delta_m0) /
             (state.delta_m_max * (state.delta_mf - state.delta_m0));
  d = std::clamp(d, 0.0, 1.0);
  state.D = std::max(state.D, d);
  return state;
}

struct TractionResult {
  double t_n = 0.0;
  double t_s = 0.0;
  Eigen::Matrix2d tangent = Eigen::Matrix2d::Zero();  // d(t_s, t_n)/d(delta_s, delta_n)
};

/// Tractions for frozen damage; compression keeps the full penalty.
inline TractionResult traction(const CohesiveLaw& law, const CohesiveState& state,
                               const Separation& s) {
  TractionResult r;
  const double kd = (1.0 - state.D) * law.K;
  r.t_s = kd * s.delta_s;
  if (s.delta_n >= 0.0) {
    r.t_n = kd * s.delta_n;
    r.tangent(1, 1) = kd;
  } else {
    r.t_n = law.K * s.delta_n;
    r.tangent(1, 1) = law.K;
  }
  r.tangent(0, 0) = kd;
  return r;
}

struct PointUpdate {
  CohesiveState state;  // trial state, committed by the caller on acceptance
  TractionResult traction;
};

/// Full constitutive update of one integration point from its last committed
/// state to the separation `s`.
inline PointUpdate update_point(const CohesiveLaw& law, const CohesiveState& committed,
                                const Separation& s) {
  PointUpdate out;
  CohesiveState st = committed;
  const double dm = effective_displacement(s);

  // Work increments at frozen damage, used for B-K mixity.
  auto work_increments = [&](const CohesiveState& base, double tn, double ts) {
    const double dn_old = macaulay(base.delta_n), dn_new = macaulay(s.delta_n);
    const double gn = 0.5 * (macaulay(base.t_n) + macaulay(tn)) * (dn_new - dn_old);
    const double gs = 0.5 * (base.t_s + ts) * (s.delta_s - base.delta_s);
    return std::pair{gn, gs};
  };

  if (!st.initiated && !law.elastic_only) {
    const auto init = initiation_check(law, s);
    if (init.initiated) {
      const auto [gn, gs] = work_increments(committed, law.K * s.delta_n, law.K * s.delta_s);
      double Gn = std::max(0.0, committed.G_n + gn);
      double Gs = std::max(0.0, committed.G_s + gs);
      if (Gn + Gs <= 0.0) {
        Gn = macaulay(s.delta_n) * macaulay(s.delta_n);
        Gs = s.delta_s * s.delta_s;
      }
      st.initiated = true;
      st.delta_m0 = mixed_mode_initiation_opening(law, init.mixity);
      st.delta_mf = std::max(bk_final_opening(law, st.delta_m0, Gn, Gs),
                             st.delta_m0 * (1.0 + 1e-9));
    }
  }
  if (st.initiated) st = damage_update(st, dm);

  out.traction = traction(law, st, s);
  // Consistent tangent while the damage grows: D depends on the effective
  // opening, dD/d(delta_m) = delta_mf delta_m0 / (delta_m^2 (delta_mf - delta_m0)).
  if (st.initiated && st.D < 1.0 && dm > committed.delta_m_max && dm > st.delta_m0) {
    const double dD = st.delta_mf * st.delta_m0 / (dm * dm * (st.delta_mf - st.delta_m0));
    const Eigen::Vector2d v(s.delta_s, macaulay(s.delta_n));
    out.traction.tangent -= law.K * dD / dm * v * v.transpose();
  }
  const auto [gn, gs] = work_increments(committed, out.traction.t_n, out.traction.t_s);
  st.G_n = committed.G_n + gn;
  st.G_s = committed.G_s + gs;
  st.delta_n = s.delta_n;
  st.delta_s = s.delta_s;
  st.t_n = out.traction.t_n;
  st.t_s = out.traction.t_s;
  out.state = st;
  return out;
}

/// Energy per unit area dissipated so far (area under the effective envelope
/// up to delta_m_max minus what is recoverable along the unloading secant).
inline double dissipated_at_state(const CohesiveLaw& law, const CohesiveState& st) {
  if (!st.initiated || st.D <= 0.0) return 0.0;
  const double d0 = st.delta_m0, df = st.delta_mf;
  const double dmax = std::min(st.delta_m_max, df);
  double area = 0.5 * law.K * d0 * d0;
  area += law.K * d0 * (df * (dmax - d0) - 0.5 * (dmax * dmax - d0 * d0)) / (df - d0);
  if (st.delta_m_max >= df) return 0.5 * law.K * d0 * df;
  return area - 0.5 * (1.0 - st.D) * law.K * dmax * dmax;
}

/// Elastic energy per unit area stored at separation s.
inline double recoverable_energy(const CohesiveLaw& law, const CohesiveState& st,
                                 const Separation& s) {
  const double kd = (1.0 - st.D) * law.K;
  const double en = s.delta_n >= 0.0 ? kd * s.delta_n * s.delta_n : law.K * s.delta_n * s.delta_n;
  return 0.5 * (en + kd * s.delta_s * s.delta_s);
}

struct TractionSeparationSample {
  double t_n = 0.0, t_s = 0.0;
  double delta_n = 0.0, delta_s = 0.0;
};

/// Trapezoidal integral of traction over separation along a recorded history.
inline double dissipated_energy(std::span<const TractionSeparationSample> history) {
  double w = 0.0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const auto& a = history[i - 1];
    const auto& b = history[i];
    w += 0.5 * (a.t_n + b.t_n) * (b.delta_n - a.delta_n);
    w += 0.5 * (a.t_s + b.t_s) * (b.delta_s - a.delta_s);
  }
  return w;
}

// ---------------------------------------------------------------------------
// 4-node line element, nodes (bottom-left, bottom-right, top-right, top-left),
// two Newton-Cotes points at the node pairs.

struct CieKinematics {
  Eigen::Vector2d tangent;
  Eigen::Vector2d normal;
  double length = 0.0;
  std::array<Separation, 2> sep;  // [0] at the left pair, [1] at the right pair
};

inline CieKinematics cie_kinematics(const std::array<Eigen::Vector2d, 4>& X,
                                    std::span<const double, 8> u) {
  auto pos = [&](int a) { return Eigen::Vector2d(X[a].x() + u[2 * a], X[a].y() + u[2 * a + 1]); };
  const Eigen::Vector2d left = 0.5 * (pos(0) + pos(3));
  const Eigen::Vector2d right = 0.5 * (pos(1) + pos(2));
  CieKinematics k;
  const Eigen::Vector2d d = right - left;
  k.length = d.norm();
  if (!(k.length > 1e-14)) throw MeshError("cohesive element has a degenerate mid-plane");
  k.tangent = d / k.length;
  k.normal = Eigen::Vector2d(-k.tangent.y(), k.tangent.x());
  const std::array<std::pair<int, int>, 2> pairs{{{0, 3}, {1, 2}}};
  for (int i = 0; i < 2; ++i) {
    const auto [bot, top] = pairs[i];
    const Eigen::Vector2d jump(u[2 * top] - u[2 * bot], u[2 * top + 1] - u[2 * bot + 1]);
    k.sep[i] = {k.normal.dot(jump), k.tangent.dot(jump)};
  }
  return k;
}

struct CieKernelOutput {
  Eigen::Matrix<double, 8, 1> residual = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> stiffness = Eigen::Matrix<double, 8, 8>::Zero();
  std::array<CohesiveState, 2> trial;
  double elastic_energy = 0.0;
  double dissipated = 0.0;
};

inline CieKernelOutput cie_element_kernel(const std::array<Eigen::Vector2d, 4>& X,
                                          std::span<const double, 8> u, const CohesiveLaw& law,
                                          const std::array<CohesiveState, 2>& committed,
                                          double thickness = 1.0) {
  const CieKinematics kin = cie_kinematics(X, u);
  CieKernelOutput out;
  const std::array<std::pair<int, int>, 2> pairs{{{0, 3}, {1, 2}}};
  // rows: (s, n) components in global coordinates
  Eigen::Matrix2d R;
  R.row(0) = kin.tangent.transpose();
  R.row(1) = kin.normal.transpose();
  const double w = 0.5 * kin.length * thickness;
  for (int i = 0; i < 2; ++i) {
    const auto upd = update_point(law, committed[i], kin.sep[i]);
    out.trial[i] = upd.state;
    const Eigen::Vector2d t_local(upd.traction.t_s, upd.traction.t_n);
    const Eigen::Vector2d t_global = R.transpose() * t_local;
    const Eigen::Matrix2d k_global = R.transpose() * upd.traction.tangent * R;
    const auto [bot, top] = pairs[i];
    out.residual.segment<2>(2 * top) += w * t_global;
    out.residual.segment<2>(2 * bot) -= w * t_global;
    const std::array<int, 2> nodes{bot, top};
    const std::array<double, 2> sign{-1.0, 1.0};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        out.stiffness.block<2, 2>(2 * nodes[a], 2 * nodes[b]) += sign[a] * sign[b] * w * k_global;
    out.elastic_energy += w * recoverable_energy(law, upd.state, kin.sep[i]);
    out.dissipated += w * dissipated_at_state(law, upd.state);
  }
  return out;
}

}  // namespace mpfrac
