#pragma once

// Inclusion shapes (circle, ellipse, polygon) with interface rings, and the
// rectangular-domain geometry description shared by meshing and
// microstructure generation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mpfrac/types.hpp"

namespace mpfrac {

using Vec2 = Eigen::Vector2d;

enum class Shape { circle, ellipse, polygon };

inline std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::circle: return "circle";
    case Shape::ellipse: return "ellipse";
    case Shape::polygon: return "polygon";
  }
  return "?";
}

inline Shape parse_shape(std::string_view s) {
  if (s == "circle") return Shape::circle;
  if (s == "ellipse") return Shape::ellipse;
  if (s == "polygon") return Shape::polygon;
  throw Error("unknown inclusion shape '" + std::string(s) + "'");
}

namespace detail {

// Closest-point distance from (y0, y1) in the first quadrant to the ellipse
// with semi-axes e0 >= e1 (Eberly's bisection formulation).
inline double ellipse_quadrant_distance(double e0, double e1, double y0, double y1) {
  auto robust_length = [](double a, double b) { return std::hypot(a, b); };
  auto get_root = [&](double r0, double z0, double z1, double g) {
    const double n0 = r0 * z0;
    double s0 = z1 - 1.0;
    double s1 = g < 0.0 ? 0.0 : robust_length(n0, z1) - 1.0;
    double s = 0.0;
    for (int i = 0; i < 200; ++i) {
      s = 0.5 * (s0 + s1);
      if (s == s0 || s == s1) break;
      const double ratio0 = n0 / (s + r0);
      const double ratio1 = z1 / (s + 1.0);
      const double gg = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
      if (gg > 0.0)
        s0 = s;
      else if (gg < 0.0)
        s1 = s;
      else
        break;
    }
    return s;
  };

  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = get_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (sbar + r0);
      const double x1 = y1 / (sbar + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

}  // namespace detail

struct Inclusion {
  Shape shape = Shape::circle;
  Vec2 center = Vec2::Zero();
  double rx = 0.0;     // circle radius / ellipse semi-axis along the rotated x axis
  double ry = 0.0;     // ellipse semi-axis along the rotated y axis
  double angle = 0.0;  // rotation, radians
  std::vector<Vec2> vertices;  // polygon, absolute coordinates, counter-clockwise
  double interface_thickness = 0.0;

  static Inclusion circle(Vec2 c, double r, double t) {
    Inclusion inc;
    inc.shape = Shape::circle;
    inc.center = c;
    inc.rx = inc.ry = r;
    inc.interface_thickness = t;
    return inc;
  }

  static Inclusion ellipse(Vec2 c, double a, double b, double angle, double t) {
    Inclusion inc;
    inc.shape = Shape::ellipse;
    inc.center = c;
    inc.rx = a;
    inc.ry = b;
    inc.angle = angle;
    inc.interface_thickness = t;
    return inc;
  }

  /// Regular n-gon with circumradius r.
  static Inclusion regular_polygon(Vec2 c, double r, int n, double angle, double t) {
    Inclusion inc;
    inc.shape = Shape::polygon;
    inc.center = c;
    inc.rx = inc.ry = r;
    inc.angle = angle;
    inc.interface_thickness = t;
    for (int i = 0; i < n; ++i) {
      const double th = angle + 2.0 * std::numbers::pi * i / n;
      inc.vertices.emplace_back(c.x() + r * std::cos(th), c.y() + r * std::sin(th));
    }
    return inc;
  }

  /// Negative inside, positive outside, Euclidean distance to the boundary.
  double signed_distance(const Vec2& p) const {
    switch (shape) {
      case Shape::circle: return (p - center).norm() - rx;
      case Shape::ellipse: {
        const Vec2 d = p - center;
        const double c = std::cos(angle), s = std::sin(angle);
        double x = std::abs(c * d.x() + s * d.y());
        double y = std::abs(-s * d.x() + c * d.y());
        double a = rx, b = ry;
        if (a < b) {
          std::swap(a, b);
          std::swap(x, y);
        }
        const double dist = detail::ellipse_quadrant_distance(a, b, x, y);
        const bool inside = (x / a) * (x / a) + (y / b) * (y / b) < 1.0;
        return inside ? -dist : dist;
      }
      case Shape::polygon: {
        double dmin = std::numeric_limits<double>::infinity();
        bool inside = false;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
          const Vec2& a = vertices[i];
          const Vec2& b = vertices[j];
          dmin = std::min(dmin, detail::segment_distance(p, a, b));
          if (((a.y() > p.y()) != (b.y() > p.y())) &&
              (p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()))
            inside = !inside;
        }
        return inside ? -dmin : dmin;
      }
    }
    return 0.0;
  }

  double area() const {
    switch (shape) {
      case Shape::circle:
      case Shape::ellipse: return std::numbers::pi * rx * ry;
      case Shape::polygon: {
        double a = 0.0;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++)
          a += vertices[j].x() * vertices[i].y() - vertices[i].x() * vertices[j].y();
        return 0.5 * std::abs(a);
      }
    }
    return 0.0;
  }

  double perimeter() const {
    switch (shape) {
      case Shape::circle: return 2.0 * std::numbers::pi * rx;
      case Shape::ellipse: {
        // Ramanujan II; relative error < 1e-9 for the aspect ratios used here.
        const double h = std::pow(rx - ry, 2) / std::pow(rx + ry, 2);
        return std::numbers::pi * (rx + ry) * (1.0 + 3.0 * h / (10.0 + std::sqrt(4.0 - 3.0 * h)));
      }
      case Shape::polygon: {
        double p = 0.0;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) p += (vertices[i] - vertices[j]).norm();
        return p;
      }
    }
    return 0.0;
  }

  /// Area of the interface ring (exact for convex shapes).
  double ring_area() const {
    const double t = interface_thickness;
    return perimeter() * t + std::numbers::pi * t * t;
  }

  double circumradius() const {
    switch (shape) {
      case Shape::circle: return rx;
      case Shape::ellipse: return std::max(rx, ry);
      case Shape::polygon: {
        double r = 0.0;
        for (const auto& v : vertices) r = std::max(r, (v - center).norm());
        return r;
      }
    }
    return 0.0;
  }

  /// Points on the boundary, counter-clockwise.
  std::vector<Vec2> boundary_samples(int n) const {
    std::vector<Vec2> pts;
    pts.reserve(n);
    if (shape == Shape::polygon) {
      const double per = perimeter();
      const std::size_t nv = vertices.size();
      for (int k = 0; k < n; ++k) {
        double s = per * k / n;
        for (std::size_t i = 0; i < nv; ++i) {
          const Vec2& a = vertices[i];
          const Vec2& b = vertices[(i + 1) % nv];
          const double len = (b - a).norm();
          if (s <= len || i + 1 == nv) {
            pts.push_back(a + (b - a) * std::min(1.0, s / len));
            break;
          }
          s -= len;
        }
      }
      return pts;
    }
    const double c = std::cos(angle), s = std::sin(angle);
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n;
      const double lx = rx * std::cos(th), ly = ry * std::sin(th);
      pts.emplace_back(center.x() + c * lx - s * ly, center.y() + s * lx + c * ly);
    }
    return pts;
  }
};

struct GeometrySpec {
  double width = 20.0;
  double height = 20.0;
  std::vector<Inclusion> inclusions;
  double element_size = 0.3;

  void validate() const {
    if (!(width > 0.0 && height > 0.0)) throw MeshError("domain dimensions must be > 0");
    if (!(element_size > 0.0)) throw MeshError("element edge length must be > 0");
    for (std::size_t i = 0; i < inclusions.size(); ++i) {
      const auto& inc = inclusions[i];
      const std::string tag = "inclusion " + std::to_string(i);
      if (!(inc.interface_thickness > 0.0)) throw MeshError(tag + ": interface thickness must be > 0");
      if (!(inc.rx > 0.0 && inc.ry > 0.0)) throw MeshError(tag + ": size must be > 0");
      if (inc.shape == Shape::polygon && inc.vertices.size() < 3)
        throw MeshError(tag + ": polygon needs at least 3 vertices");
      for (const auto& p : inc.boundary_samples(256)) {
        const double t = inc.interface_thickness;
        if (p.x() - t <= 0.0 || p.x() + t >= width || p.y() - t <= 0.0 || p.y() + t >= height)
          throw MeshError(tag + " (with interface ring) does not lie strictly inside the domain");
      }
    }
  }

  double inclusion_area() const {
    double a = 0.0;
    for (const auto& inc : inclusions) a += inc.area();
    return a;
  }

  double ring_area() const {
    double a = 0.0;
    for (const auto& inc : inclusions) a += inc.ring_area();
    return a;
  }
};

/// Single circular inclusion benchmark: 20 x 20 mm, radius 4 mm, 0.6 mm ring.
inline GeometrySpec benchmark_geometry(double element_size = 0.3, double width = 20.0,
                                       double height = 20.0, double radius = 4.0,
                                       double interface_thickness = 0.6) {
  GeometrySpec g;
  g.width = width;
  g.height = height;
  g.element_size = element_size;
  g.inclusions.push_back(
      Inclusion::circle(Vec2(0.5 * width, 0.5 * height), radius, interface_thickness));
  return g;
}

// ---------------------------------------------------------------------------
// Geometry text format (see docs/formats.md)

inline void write_geometry(std::ostream& os, const GeometrySpec& g) {
  os << std::setprecision(17);
  os << "MPFRAC-GEOMETRY 1\n";
  os << "DOMAIN " << g.width << ' ' << g.height << '\n';
  os << "EDGE " << g.element_size << '\n';
  os << "INCLUSIONS " << g.inclusions.size() << '\n';
  for (const auto& inc : g.inclusions) {
    os << to_string(inc.shape) << ' ' << inc.center.x() << ' ' << inc.center.y() << ' ';
    switch (inc.shape) {
      case Shape::circle: os << inc.rx; break;
      case Shape::ellipse: os << inc.rx << ' ' << inc.ry << ' ' << inc.angle; break;
      case Shape::polygon:
        os << inc.vertices.size();
        for (const auto& v : inc.vertices) os << ' ' << v.x() << ' ' << v.y();
        break;
    }
    os << ' ' << inc.interface_thickness << '\n';
  }
  os << "END\n";
}

inline GeometrySpec read_geometry(std::istream& is) {
  auto fail = [](const std::string& what) { throw MeshError("geometry file: " + what); };
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "MPFRAC-GEOMETRY" || version != 1)
    fail("bad header (expected 'MPFRAC-GEOMETRY 1')");
  GeometrySpec g;
  std::size_t n = 0;
  if (!(is >> word) || word != "DOMAIN" || !(is >> g.width >> g.height)) fail("expected DOMAIN");
  if (!(is >> word) || word != "EDGE" || !(is >> g.element_size)) fail("expected EDGE");
  if (!(is >> word) || word != "INCLUSIONS" || !(is >> n)) fail("expected INCLUSIONS");
  for (std::size_t i = 0; i < n; ++i) {
    std::string shape;
    double cx = 0, cy = 0;
    if (!(is >> shape >> cx >> cy)) fail("truncated inclusion record");
    Inclusion inc;
    inc.shape = parse_shape(shape);
    inc.center = Vec2(cx, cy);
    switch (inc.shape) {
      case Shape::circle:
        is >> inc.rx;
        inc.ry = inc.rx;
        break;
      case Shape::ellipse: is >> inc.rx >> inc.ry >> inc.angle; break;
      case Shape::polygon: {
        std::size_t nv = 0;
        is >> nv;
        for (std::size_t k = 0; k < nv; ++k) {
          double x = 0, y = 0;
          is >> x >> y;
          inc.vertices.emplace_back(x, y);
        }
        double r = 0.0;
        for (const auto& v : inc.vertices) r = std::max(r, (v - inc.center).norm());
        inc.rx = inc.ry = r;
        break;
      }
    }
    if (!(is >> inc.interface_thickness)) fail("truncated inclusion record");
    g.inclusions.push_back(std::move(inc));
  }
  if (!(is >> word) || word != "END") fail("missing END");
  return g;
}

inline void save_geometry(const std::string& path, const GeometrySpec& g) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_geometry(os, g);
}

inline GeometrySpec load_geometry(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return read_geometry(is);
}

}  // namespace mpfrac
