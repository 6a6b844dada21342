#pragma once

// Element-level kernels of the staggered displacement / phase-field problem:
// shape functions, plane-stress elasticity with a tension split, history
// update, and residual/stiffness pairs for both sub-problems.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <span>
#include <string>

#include "mpfrac/geometry.hpp"
#include "mpfrac/materials.hpp"
#include "mpfrac/types.hpp"

namespace mpfrac {

using Vec3 = Eigen::Vector3d;  // Voigt (xx, yy, xy); strains carry engineering shear
using Mat3 = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Shape functions and quadrature

struct ShapeEval {
  Eigen::Vector4d N = Eigen::Vector4d::Zero();
  Eigen::Matrix<double, 4, 2> dNdx = Eigen::Matrix<double, 4, 2>::Zero();
  double detJ = 0.0;
};

struct QuadraturePoint {
  double xi = 0.0, eta = 0.0, weight = 0.0;
};

/// 2x2 Gauss for quad4, centroid rule for tri3.
inline std::span<const QuadraturePoint> quadrature_rule(ElementKind kind) {
  static const double g = 1.0 / std::sqrt(3.0);
  static const std::array<QuadraturePoint, 4> quad{{{-g, -g, 1.0}, {g, -g, 1.0}, {g, g, 1.0}, {-g, g, 1.0}}};
  static const std::array<QuadraturePoint, 1> tri{{{1.0 / 3.0, 1.0 / 3.0, 0.5}}};
  switch (kind) {
    case ElementKind::quad4: return quad;
    case ElementKind::tri3: return tri;
    default: throw Error("no bulk quadrature rule for cohesive elements");
  }
}

inline int qp_count(ElementKind kind) { return static_cast<int>(quadrature_rule(kind).size()); }

/// Values and spatial gradients at reference coordinates (xi, eta).
/// `element_id` only labels the error message.
inline ShapeEval shape_functions(ElementKind kind, std::span<const Vec2> X, double xi, double eta,
                                 long element_id = -1) {
  ShapeEval s;
  Eigen::Matrix<double, 4, 2> dNdxi = Eigen::Matrix<double, 4, 2>::Zero();
  int n = 0;
  if (kind == ElementKind::quad4) {
    n = 4;
    const double xs[4] = {-1, 1, 1, -1}, es[4] = {-1, -1, 1, 1};
    for (int a = 0; a < 4; ++a) {
      s.N[a] = 0.25 * (1 + xs[a] * xi) * (1 + es[a] * eta);
      dNdxi(a, 0) = 0.25 * xs[a] * (1 + es[a] * eta);
      dNdxi(a, 1) = 0.25 * es[a] * (1 + xs[a] * xi);
    }
  } else if (kind == ElementKind::tri3) {
    n = 3;
    s.N.head<3>() << 1 - xi - eta, xi, eta;
    dNdxi.topRows<3>() << -1, -1, 1, 0, 0, 1;
  } else {
    throw Error("shape_functions: cohesive elements have no bulk shape functions");
  }
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();  // J(i,j) = dx_j / dxi_i
  for (int a = 0; a < n; ++a) J += dNdxi.row(a).transpose() * X[a].transpose();
  s.detJ = J.determinant();
  if (!(s.detJ > 0.0))
    throw MeshError("non-positive Jacobian in element " + std::to_string(element_id));
  const Eigen::Matrix2d Jinv = J.inverse();
  for (int a = 0; a < n; ++a) s.dNdx.row(a) = (Jinv * dNdxi.row(a).transpose()).transpose();
  return s;
}

/// Precomputed quadrature data of one bulk element; `w` includes detJ and
/// thickness.
struct ElementQuadrature {
  ElementKind kind = ElementKind::quad4;
  int n = 4;
  int nq = 4;
  std::array<Eigen::Vector4d, 4> N;
  std::array<Eigen::Matrix<double, 4, 2>, 4> dNdx;
  std::array<double, 4> w{};
  double area = 0.0;
};

inline ElementQuadrature element_quadrature(ElementKind kind, std::span<const Vec2> X,
                                            double thickness = 1.0, long element_id = -1) {
  ElementQuadrature q;
  q.kind = kind;
  q.n = node_count(kind);
  const auto rule = quadrature_rule(kind);
  q.nq = static_cast<int>(rule.size());
  for (int i = 0; i < q.nq; ++i) {
    const auto s = shape_functions(kind, X, rule[i].xi, rule[i].eta, element_id);
    q.N[i] = s.N;
    q.dNdx[i] = s.dNdx;
    q.w[i] = rule[i].weight * s.detJ * thickness;
    q.area += rule[i].weight * s.detJ;
  }
  return q;
}

/// Strain-displacement matrix (3 x 2n).
inline Eigen::Matrix<double, 3, 8> strain_displacement(const ElementQuadrature& q, int i) {
  Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
  for (int a = 0; a < q.n; ++a) {
    const double dx = q.dNdx[i](a, 0), dy = q.dNdx[i](a, 1);
    B(0, 2 * a) = dx;
    B(1, 2 * a + 1) = dy;
    B(2, 2 * a) = dy;
    B(2, 2 * a + 1) = dx;
  }
  return B;
}

// ---------------------------------------------------------------------------
// Elasticity and tension split

inline Mat3 plane_stress_stiffness(const PhaseProperties& p) {
  const double c = p.E / (1.0 - p.nu * p.nu);
  Mat3 D;
  D << c, c * p.nu, 0, c * p.nu, c, 0, 0, 0, c * (1.0 - p.nu) / 2.0;
  return D;
}

inline Vec3 effective_stress(const PhaseProperties& p, const Vec3& strain) {
  return plane_stress_stiffness(p) * strain;
}

struct Principal {
  double s1 = 0.0, s2 = 0.0;
  Vec2 n1 = Vec2::UnitX();
};

/// Principal values of a symmetric tensor in Voigt form with tensor shear.
inline Principal principal(double xx, double yy, double xy) {
  Principal p;
  const double c = 0.5 * (xx + yy);
  const double r = std::hypot(0.5 * (xx - yy), xy);
  p.s1 = c + r;
  p.s2 = c - r;
  const double th = 0.5 * std::atan2(2.0 * xy, xx - yy);
  p.n1 = Vec2(std::cos(th), std::sin(th));
  return p;
}

/// Rankine-type driving energy <sigma_1>^2 / (2E).
inline double driving_energy(const PhaseProperties& p, const Vec3& stress) {
  const double s1 = macaulay(principal(stress[0], stress[1], stress[2]).s1);
  return s1 * s1 / (2.0 * p.E);
}

/// Energy-consistent split of the plane-stress strain energy into a part
/// carried by the major principal tensile stress and a remainder.
/// psi_plus = (1 - nu^2) <sigma_1>^2 / (2E) while the minor principal strain
/// is compressive; the whole energy once both principal strains are tensile.
/// stress = omega * E_plus * eps + (D - E_plus) * eps is the exact gradient of
/// omega * psi_plus + psi_minus.
struct TensionSplit {
  Mat3 E_plus = Mat3::Zero();          // secant: psi_plus = eps . E_plus eps / 2
  Mat3 E_plus_tangent = Mat3::Zero();  // Hessian of psi_plus
  double psi_plus = 0.0;
  double psi_minus = 0.0;
};

inline TensionSplit tension_split(const PhaseProperties& p, const Mat3& D, const Vec3& eps) {
  TensionSplit out;
  const Vec3 sig = D * eps;
  const double psi0 = 0.5 * eps.dot(sig);
  const Principal ps = principal(sig[0], sig[1], sig[2]);
  if (ps.s1 <= 0.0) {
    out.psi_minus = psi0;
    return out;
  }
  const double e2 = principal(eps[0], eps[1], 0.5 * eps[2]).s2;
  if (e2 >= 0.0) {
    out.E_plus = D;
    out.E_plus_tangent = D;
    out.psi_plus = psi0;
    return out;
  }
  const Vec3 e1(ps.n1.x() * ps.n1.x(), ps.n1.y() * ps.n1.y(), 2.0 * ps.n1.x() * ps.n1.y());
  const Vec3 De1 = D * e1;
  const double c = (1.0 - p.nu * p.nu) / p.E;
  out.E_plus = c * De1 * De1.transpose();
  out.E_plus_tangent = out.E_plus;
  // curvature of sigma_1 with respect to the stress: w w^T / R
  const double a = 0.5 * (sig[0] - sig[1]), b = sig[2];
  const double R = std::hypot(a, b);
  if (R > 1e-12 * (std::abs(sig[0]) + std::abs(sig[1]) + std::abs(b))) {
    const Vec3 w(0.5 * b / R, -0.5 * b / R, -a / R);
    const Vec3 Dw = D * w;
    out.E_plus_tangent += c * ps.s1 / R * Dw * Dw.transpose();
  }
  out.psi_plus = 0.5 * c * ps.s1 * ps.s1;
  out.psi_minus = psi0 - out.psi_plus;
  return out;
}

// ---------------------------------------------------------------------------
// History

struct QuadraturePointState {
  double H = 0.0;
  double phi = 0.0;
  Vec3 strain = Vec3::Zero();
  Vec3 effective_stress = Vec3::Zero();
};

inline double initial_history(const FractureModel& model, const PhaseProperties& props) {
  return model.scheme == Scheme::CPFM ? psi_eq_threshold(props) : 0.0;
}

inline QuadraturePointState update_history(QuadraturePointState state, double psi_eq,
                                           const FractureModel& model, const PhaseProperties& props) {
  state.H = std::max({state.H, psi_eq, initial_history(model, props)});
  return state;
}

// ---------------------------------------------------------------------------
// Element kernels

struct DisplacementKernelOutput {
  Eigen::Matrix<double, 8, 1> residual = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> K = Eigen::Matrix<double, 8, 8>::Zero();
  double energy = 0.0;
  std::array<Vec3, 4> strain{};
  std::array<Vec3, 4> effective_stress{};
  std::array<Vec3, 4> stress{};
  std::array<double, 4> psi_eq{};
};

/// Residual R_u = int B^T sigma and the consistent stiffness
/// int B^T (D - (1 - omega) d2psi+/deps2) B, with the damage interpolated from
/// nodal values. u_e has 2n entries.
inline DisplacementKernelOutput displacement_kernel(const ElementQuadrature& q,
                                                    const PhaseProperties& props,
                                                    const FractureModel& model,
                                                    const DerivedModelConstants& consts,
                                                    std::span<const double> u_e,
                                                    std::span<const double> phi_e) {
  DisplacementKernelOutput out;
  const int nd = 2 * q.n;
  Eigen::Matrix<double, 8, 1> u = Eigen::Matrix<double, 8, 1>::Zero();
  for (int i = 0; i < nd; ++i) {
    if (!std::isfinite(u_e[i])) throw SolverError("non-finite nodal displacement");
    u[i] = u_e[i];
  }
  const Mat3 D = plane_stress_stiffness(props);
  for (int i = 0; i < q.nq; ++i) {
    double phi = 0.0;
    for (int a = 0; a < q.n; ++a) phi += q.N[i][a] * phi_e[a];
    const double om = omega(model, consts, std::clamp(phi, 0.0, 1.0)).value;
    const auto B = strain_displacement(q, i);
    const Vec3 eps = B * u;
    const TensionSplit sp = tension_split(props, D, eps);
    const Vec3 sig = om * (sp.E_plus * eps) + (D - sp.E_plus) * eps;
    const Mat3 C = D - (1.0 - om) * sp.E_plus_tangent;
    out.residual.head(nd) += q.w[i] * B.leftCols(nd).transpose() * sig;
    out.K.topLeftCorner(nd, nd) += q.w[i] * B.leftCols(nd).transpose() * C * B.leftCols(nd);
    out.energy += q.w[i] * (om * sp.psi_plus + sp.psi_minus);
    out.strain[i] = eps;
    out.effective_stress[i] = D * eps;
    out.stress[i] = sig;
    out.psi_eq[i] = driving_energy(props, out.effective_stress[i]);
  }
  return out;
}

struct PhaseFieldKernelOutput {
  Eigen::Vector4d residual = Eigen::Vector4d::Zero();
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  double energy = 0.0;        // int omega H + Gc gamma
  double crack_energy = 0.0;  // int Gc gamma
  std::array<double, 4> phi_qp{};
};

/// R_phi = int N (omega' H + Gc/(c0 lc) alpha') + (2 lc Gc / c0) B^T B phi,
/// K_phiphi from omega'' and alpha''. H holds one value per quadrature point.
inline PhaseFieldKernelOutput phasefield_kernel(const ElementQuadrature& q,
                                                const PhaseProperties& props,
                                                const FractureModel& model,
                                                const DerivedModelConstants& consts,
                                                std::span<const double> phi_e,
                                                std::span<const double> H) {
  PhaseFieldKernelOutput out;
  Eigen::Vector4d ph = Eigen::Vector4d::Zero();
  for (int a = 0; a < q.n; ++a) {
    if (!std::isfinite(phi_e[a])) throw SolverError("non-finite nodal damage");
    ph[a] = phi_e[a];
  }
  const double loc = props.Gc / (consts.c0 * consts.lc);
  const double grad = 2.0 * consts.lc * props.Gc / consts.c0;
  for (int i = 0; i < q.nq; ++i) {
    const Eigen::Vector4d& N = q.N[i];
    const double phi = N.dot(ph);
    const auto om = omega(model, consts, phi);
    const auto al = alpha(model, phi);
    const Eigen::Matrix<double, 4, 2>& Bp = q.dNdx[i];
    const Vec2 gphi = Bp.transpose() * ph;
    out.residual += q.w[i] * (N * (om.d1 * H[i] + loc * al.d1) + grad * Bp * gphi);
    out.K += q.w[i] * ((om.d2 * H[i] + loc * al.d2) * N * N.transpose() + grad * Bp * Bp.transpose());
    const double gamma_gc = loc * (al.value + consts.lc * consts.lc * gphi.squaredNorm());
    out.energy += q.w[i] * (om.value * H[i] + gamma_gc);
    out.crack_energy += q.w[i] * gamma_gc;
    out.phi_qp[i] = phi;
  }
  return out;
}

/// Von Mises equivalent of a plane-stress state.
inline double von_mises(const Vec3& s) {
  return std::sqrt(s[0] * s[0] - s[0] * s[1] + s[1] * s[1] + 3.0 * s[2] * s[2]);
}

}  // namespace mpfrac
