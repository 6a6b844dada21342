#pragma once

// Random multi-inclusion layouts (random sequential addition) and the fixed
// elliptical layouts with matched inclusion / interface areas.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mpfrac/geometry.hpp"
#include "mpfrac/types.hpp"

namespace mpfrac {

struct MicrostructureSpec {
  double width = 50.0;
  double height = 50.0;
  Shape shape = Shape::circle;
  double size_min = 6.0;  // diameter / major axis / circumscribed diameter, mm
  double size_max = 8.0;
  double aspect_min = 0.6;  // ellipse minor/major ratio range
  double aspect_max = 1.0;
  double fraction = 0.20;
  double interface_thickness = 0.5;
  std::uint64_t seed = 1;
  double min_gap = 1.0;
  double element_size = 0.3;
  int max_rejections = 10000;

  void validate() const {
    if (!(width > 0.0 && height > 0.0)) throw MicrostructureError("domain dimensions must be > 0");
    if (!(fraction > 0.0)) throw MicrostructureError("volume fraction must be > 0");
    if (fraction > 0.5)
      throw MicrostructureError("jamming: fraction " + std::to_string(fraction) +
                                " is beyond the 0.5 limit of sequential addition; reduce fraction or sizes");
    if (!(size_min > 0.0 && size_max >= size_min)) throw MicrostructureError("invalid size range");
    if (!(aspect_min > 0.0 && aspect_max <= 1.0 && aspect_max >= aspect_min))
      throw MicrostructureError("invalid aspect range");
    if (!(interface_thickness > 0.0)) throw MicrostructureError("interface thickness must be > 0");
    if (min_gap < 0.0) throw MicrostructureError("min gap must be >= 0");
    const double clear = size_max + 2.0 * (interface_thickness + min_gap);
    if (clear >= std::min(width, height)) throw MicrostructureError("inclusion sizes do not fit the domain");
  }
};

namespace detail {

inline std::vector<Vec2> probe_points(const Inclusion& inc) {
  auto pts = inc.boundary_samples(192);
  if (inc.shape == Shape::polygon) pts.insert(pts.end(), inc.vertices.begin(), inc.vertices.end());
  return pts;
}

/// True when the two inclusions keep `clearance` between their boundaries.
inline bool separated(const Inclusion& a, const Inclusion& b, double clearance) {
  const double reach = a.circumradius() + b.circumradius() + clearance;
  if ((a.center - b.center).norm() > reach) return true;
  for (const auto& p : probe_points(b))
    if (a.signed_distance(p) < clearance) return false;
  for (const auto& p : probe_points(a))
    if (b.signed_distance(p) < clearance) return false;
  return true;
}

inline bool inside_domain(const Inclusion& inc, double width, double height, double clearance) {
  for (const auto& p : probe_points(inc))
    if (p.x() < clearance || p.y() < clearance || p.x() > width - clearance || p.y() > height - clearance)
      return false;
  return true;
}

/// Shape instance with characteristic size `size` (diameter-like) and the
/// given aspect / rotation.
inline Inclusion make_inclusion(Shape shape, Vec2 c, double size, double aspect, double angle, int sides,
                                double t) {
  switch (shape) {
    case Shape::circle: return Inclusion::circle(c, 0.5 * size, t);
    case Shape::ellipse: return Inclusion::ellipse(c, 0.5 * size, 0.5 * size * aspect, angle, t);
    case Shape::polygon: return Inclusion::regular_polygon(c, 0.5 * size, sides, angle, t);
  }
  return {};
}

/// Area of the shape per unit size^2 (area scales with size^2).
inline double unit_area(Shape shape, double aspect, int sides) {
  switch (shape) {
    case Shape::circle: return std::numbers::pi / 4.0;
    case Shape::ellipse: return std::numbers::pi / 4.0 * aspect;
    case Shape::polygon:
      return 0.5 * sides * 0.25 * std::sin(2.0 * std::numbers::pi / sides);
  }
  return 0.0;
}

}  // namespace detail

/// Random sequential addition. Candidates are drawn uniformly (size, aspect,
/// orientation, position) and accepted when the inclusion plus its ring keeps
/// `min_gap` to all accepted ones and to the boundary. Once the remaining area
/// is within reach of one inclusion, the size is chosen to land on the target
/// fraction (inside the size range where possible, else within 1% of the
/// domain area).
inline GeometrySpec place_inclusions(const MicrostructureSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GeometrySpec g;
  g.width = spec.width;
  g.height = spec.height;
  g.element_size = spec.element_size;

  const double domain = spec.width * spec.height;
  const double target = spec.fraction * domain;
  const double tol = 0.01 * domain;
  const double t = spec.interface_thickness;
  double placed = 0.0;
  int rejections = 0;
  while (target - placed > tol) {
    const double aspect = spec.shape == Shape::ellipse
                              ? spec.aspect_min + (spec.aspect_max - spec.aspect_min) * U(rng)
                              : 1.0;
    const int sides = spec.shape == Shape::polygon ? 5 + static_cast<int>(U(rng) * 4.0) : 0;
    double size = spec.size_min + (spec.size_max - spec.size_min) * U(rng);
    const double angle = 2.0 * std::numbers::pi * U(rng);
    const double ua = detail::unit_area(spec.shape, aspect, sides);
    const double a_min = ua * spec.size_min * spec.size_min;
    const double a_max = ua * spec.size_max * spec.size_max;
    const double remaining = target - placed;
    if (remaining <= a_max + tol) size = std::sqrt(std::clamp(remaining, a_min, a_max) / ua);
    const double margin = 0.5 * size + t + spec.min_gap;
    const Vec2 c(margin + (spec.width - 2.0 * margin) * U(rng), margin + (spec.height - 2.0 * margin) * U(rng));
    Inclusion cand = detail::make_inclusion(spec.shape, c, size, aspect, angle, sides, t);

    bool ok = detail::inside_domain(cand, spec.width, spec.height, t + spec.min_gap);
    for (std::size_t i = 0; ok && i < g.inclusions.size(); ++i)
      ok = detail::separated(g.inclusions[i], cand, g.inclusions[i].interface_thickness + t + spec.min_gap);
    if (!ok) {
      if (++rejections >= spec.max_rejections) throw MicrostructureError("jamming: reduce fraction or sizes");
      continue;
    }
    rejections = 0;
    g.inclusions.push_back(cand);
    placed += cand.area();
  }
  return g;
}

// ---------------------------------------------------------------------------
// Fixed layouts on the 20 x 20 mm benchmark domain. Every layout carries the
// inclusion area of the circular benchmark (radius 4) split over its
// ellipses, and a ring thickness chosen so that the total interface area
// equals that of the single-ellipse layout with a 0.6 mm ring.

inline constexpr double layout_aspect = 0.6;
inline constexpr double layout_base_ring = 0.6;

namespace detail {

// Ring thickness giving total ring area `ring` for `n` copies of an ellipse of
// perimeter P: n (P t + pi t^2) = ring.
inline double matched_ring_thickness(int n, double perimeter, double ring) {
  const double a = n * std::numbers::pi, b = n * perimeter;
  return (-b + std::sqrt(b * b + 4.0 * a * ring)) / (2.0 * a);
}

}  // namespace detail

inline std::vector<std::string> fixed_layout_names() {
  return {"single", "two_ellipses_a", "two_ellipses_b", "four_ellipses"};
}

/// single: one ellipse (major axis vertical) at the centre.
/// two_ellipses_a: two ellipses stacked on the vertical centre line.
/// two_ellipses_b: two ellipses on a diagonal, offset in both x and y.
/// four_ellipses: 2 x 2 arrangement.
inline GeometrySpec fixed_layout(std::string_view name, double element_size = 0.3) {
  const double W = 20.0, H = 20.0;
  const double area_total = std::numbers::pi * 16.0;
  const double vertical = 0.5 * std::numbers::pi;
  auto semi_axes = [&](int n) {
    const double ab = area_total / (n * std::numbers::pi);
    const double a = std::sqrt(ab / layout_aspect);
    return std::pair{a, a * layout_aspect};
  };
  const auto [a1, b1] = semi_axes(1);
  const double ring_total = Inclusion::ellipse({0, 0}, a1, b1, 0, layout_base_ring).ring_area();

  std::vector<Vec2> centers;
  if (name == "single") centers = {{10.0, 10.0}};
  else if (name == "two_ellipses_a") centers = {{10.0, 5.5}, {10.0, 14.5}};
  else if (name == "two_ellipses_b") centers = {{6.0, 14.0}, {14.0, 6.0}};
  else if (name == "four_ellipses") centers = {{6.0, 6.0}, {14.0, 6.0}, {6.0, 14.0}, {14.0, 14.0}};
  else throw MicrostructureError("unknown layout '" + std::string(name) + "'");

  const int n = static_cast<int>(centers.size());
  const auto [a, b] = semi_axes(n);
  const double per = Inclusion::ellipse({0, 0}, a, b, 0, 1.0).perimeter();
  const double t = n == 1 ? layout_base_ring : detail::matched_ring_thickness(n, per, ring_total);
  GeometrySpec g;
  g.width = W;
  g.height = H;
  g.element_size = element_size;
  for (const auto& c : centers) g.inclusions.push_back(Inclusion::ellipse(c, a, b, vertical, t));
  g.validate();
  for (std::size_t i = 0; i < g.inclusions.size(); ++i)
    for (std::size_t j = i + 1; j < g.inclusions.size(); ++j)
      if (!detail::separated(g.inclusions[i], g.inclusions[j], 2.0 * t))
        throw MicrostructureError("layout '" + std::string(name) + "' has overlapping rings");
  return g;
}

}  // namespace mpfrac
