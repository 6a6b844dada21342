#pragma once

// Conforming 2D meshes: structured generation, phase tagging, interface
// resolution checks, cohesive-element insertion by node duplication, and the
// versioned text mesh format.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpfrac/geometry.hpp"
#include "mpfrac/types.hpp"

namespace mpfrac {

struct Node {
  double x = 0.0;
  double y = 0.0;
};

struct Element {
  ElementKind kind = ElementKind::quad4;
  std::array<int, 4> nodes{-1, -1, -1, -1};
  Phase phase = Phase::matrix;

  int size() const { return node_count(kind); }
};

struct Mesh {
  std::vector<Node> nodes;
  std::vector<Element> elements;
  std::map<std::string, std::vector<int>> node_sets;
  std::map<std::string, std::vector<int>> element_sets;

  std::size_t num_nodes() const { return nodes.size(); }

  std::size_t count(ElementKind k) const {
    return static_cast<std::size_t>(
        std::count_if(elements.begin(), elements.end(), [k](const Element& e) { return e.kind == k; }));
  }

  std::size_t num_bulk() const { return elements.size() - count(ElementKind::cie4); }
  std::size_t num_cie() const { return count(ElementKind::cie4); }

  Vec2 coord(int n) const { return {nodes[n].x, nodes[n].y}; }

  Vec2 centroid(const Element& e) const {
    Vec2 c = Vec2::Zero();
    for (int a = 0; a < e.size(); ++a) c += coord(e.nodes[a]);
    return c / e.size();
  }

  const std::vector<int>& node_set(const std::string& name) const {
    auto it = node_sets.find(name);
    if (it == node_sets.end() || it->second.empty())
      throw MeshError("node set '" + name + "' is missing or empty");
    return it->second;
  }

  void rebuild_element_sets() {
    element_sets.clear();
    for (std::size_t e = 0; e < elements.size(); ++e)
      element_sets[std::string(to_string(elements[e].phase))].push_back(static_cast<int>(e));
  }

  /// Reference checks: every element/set references existing nodes, bulk
  /// elements are counter-clockwise, cie4 pairs are coincident.
  void validate() const {
    const int n = static_cast<int>(nodes.size());
    for (const auto& nd : nodes)
      if (!std::isfinite(nd.x) || !std::isfinite(nd.y)) throw MeshError("non-finite node coordinate");
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const auto& el = elements[e];
      for (int a = 0; a < el.size(); ++a)
        if (el.nodes[a] < 0 || el.nodes[a] >= n)
          throw MeshError("element " + std::to_string(e) + " references a missing node");
      if (is_bulk(el.kind)) {
        if (signed_area(el) <= 0.0)
          throw MeshError("element " + std::to_string(e) + " has non-positive area (clockwise?)");
      } else {
        if ((coord(el.nodes[0]) - coord(el.nodes[3])).norm() > 1e-12 ||
            (coord(el.nodes[1]) - coord(el.nodes[2])).norm() > 1e-12)
          throw MeshError("cohesive element " + std::to_string(e) + " has non-coincident node pairs");
      }
    }
    for (const auto& [name, ids] : node_sets)
      for (int id : ids)
        if (id < 0 || id >= n) throw MeshError("node set '" + name + "' references a missing node");
  }

  double signed_area(const Element& el) const {
    double a = 0.0;
    const int m = el.size();
    for (int i = 0; i < m; ++i) {
      const Vec2 p = coord(el.nodes[i]);
      const Vec2 q = coord(el.nodes[(i + 1) % m]);
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }
};

namespace detail {

inline int cells_along(double length, double h) {
  return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9)));
}

inline void assign_boundary_sets(Mesh& m, double width, double height) {
  const double tol = 1e-9 * std::max(width, height);
  m.node_sets.clear();
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const auto& p = m.nodes[i];
    const int id = static_cast<int>(i);
    if (std::abs(p.x) <= tol) m.node_sets["left_edge"].push_back(id);
    if (std::abs(p.x - width) <= tol) m.node_sets["right_edge"].push_back(id);
    if (std::abs(p.y) <= tol) m.node_sets["bottom_edge"].push_back(id);
    if (std::abs(p.y - height) <= tol) m.node_sets["top_edge"].push_back(id);
    if (std::abs(p.x) <= tol && std::abs(p.y) <= tol) m.node_sets["bottom_left_corner"].push_back(id);
  }
}

}  // namespace detail

/// Structured rectangular mesh. tri3 cells are split along alternating
/// diagonals so that every 2x2 block forms a crossed pattern.
inline Mesh generate_structured_mesh(const GeometrySpec& spec, ElementKind kind) {
  if (kind == ElementKind::cie4) throw MeshError("structured meshes are built from quad4 or tri3");
  if (!(spec.element_size > 0.0)) throw MeshError("element edge length must be > 0");
  if (spec.element_size > std::min(spec.width, spec.height) / 2.0)
    throw MeshError("element edge length " + std::to_string(spec.element_size) +
                    " exceeds half of the smallest domain dimension");
  const int nx = detail::cells_along(spec.width, spec.element_size);
  const int ny = detail::cells_along(spec.height, spec.element_size);
  const double hx = spec.width / nx, hy = spec.height / ny;

  Mesh m;
  m.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.nodes.push_back({i == nx ? spec.width : i * hx, j == ny ? spec.height : j * hy});
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n0 = id(i, j), n1 = id(i + 1, j), n2 = id(i + 1, j + 1), n3 = id(i, j + 1);
      if (kind == ElementKind::quad4) {
        m.elements.push_back({ElementKind::quad4, {n0, n1, n2, n3}, Phase::matrix});
      } else if ((i + j) % 2 == 0) {
        m.elements.push_back({ElementKind::tri3, {n0, n1, n2, -1}, Phase::matrix});
        m.elements.push_back({ElementKind::tri3, {n0, n2, n3, -1}, Phase::matrix});
      } else {
        m.elements.push_back({ElementKind::tri3, {n0, n1, n3, -1}, Phase::matrix});
        m.elements.push_back({ElementKind::tri3, {n1, n2, n3, -1}, Phase::matrix});
      }
    }
  }
  detail::assign_boundary_sets(m, spec.width, spec.height);
  m.rebuild_element_sets();
  return m;
}

/// Phase of a point: inside an inclusion, within its interface ring, or matrix.
inline Phase phase_at(const GeometrySpec& spec, const Vec2& p) {
  bool in_ring = false;
  for (const auto& inc : spec.inclusions) {
    const double d = inc.signed_distance(p);
    if (d <= 0.0) return Phase::inclusion;
    if (d <= inc.interface_thickness) in_ring = true;
  }
  return in_ring ? Phase::interface : Phase::matrix;
}

/// Tags every bulk element by the phase containing its centroid.
inline Mesh tag_phases(Mesh mesh, const GeometrySpec& spec) {
  for (auto& el : mesh.elements)
    if (is_bulk(el.kind)) el.phase = phase_at(spec, mesh.centroid(el));
  mesh.rebuild_element_sets();
  return mesh;
}

/// Retags interface-band elements as matrix (the interface is then carried by
/// cohesive elements on the inclusion boundary).
inline Mesh absorb_interface_band(Mesh mesh) {
  for (auto& el : mesh.elements)
    if (el.phase == Phase::interface) el.phase = Phase::matrix;
  mesh.rebuild_element_sets();
  return mesh;
}

// ---------------------------------------------------------------------------
// Point location over bulk elements (uniform bins)

class ElementLocator {
 public:
  explicit ElementLocator(const Mesh& mesh, int bins_per_axis = 0) : mesh_(&mesh) {
    lo_ = Vec2::Constant(std::numeric_limits<double>::infinity());
    hi_ = -lo_;
    for (const auto& n : mesh.nodes) {
      lo_ = lo_.cwiseMin(Vec2(n.x, n.y));
      hi_ = hi_.cwiseMax(Vec2(n.x, n.y));
    }
    const std::size_t nb = mesh.num_bulk();
    nb_ = bins_per_axis > 0 ? bins_per_axis
                            : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nb)) / 2));
    bins_.assign(static_cast<std::size_t>(nb_) * nb_, {});
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
      const auto& el = mesh.elements[e];
      if (!is_bulk(el.kind)) continue;
      Vec2 a = Vec2::Constant(std::numeric_limits<double>::infinity()), b = -a;
      for (int k = 0; k < el.size(); ++k) {
        a = a.cwiseMin(mesh.coord(el.nodes[k]));
        b = b.cwiseMax(mesh.coord(el.nodes[k]));
      }
      const auto [i0, j0] = bin(a);
      const auto [i1, j1] = bin(b);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j) * nb_ + i].push_back(static_cast<int>(e));
    }
  }

  /// Index of a bulk element containing p, or -1.
  int find(const Vec2& p) const {
    const auto [i, j] = bin(p);
    for (int e : bins_[static_cast<std::size_t>(j) * nb_ + i])
      if (contains(mesh_->elements[e], p)) return e;
    return -1;
  }

 private:
  std::pair<int, int> bin(const Vec2& p) const {
    const Vec2 span = (hi_ - lo_).cwiseMax(Vec2::Constant(1e-300));
    auto clampi = [this](double v) { return std::clamp(static_cast<int>(v), 0, nb_ - 1); };
    return {clampi((p.x() - lo_.x()) / span.x() * nb_), clampi((p.y() - lo_.y()) / span.y() * nb_)};
  }

  bool in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) const {
    auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
    const double eps = -1e-12;
    return cross(b - a, p - a) >= eps && cross(c - b, p - b) >= eps && cross(a - c, p - c) >= eps;
  }

  bool contains(const Element& el, const Vec2& p) const {
    const Vec2 a = mesh_->coord(el.nodes[0]), b = mesh_->coord(el.nodes[1]),
               c = mesh_->coord(el.nodes[2]);
    if (el.kind == ElementKind::tri3) return in_triangle(p, a, b, c);
    const Vec2 d = mesh_->coord(el.nodes[3]);
    return in_triangle(p, a, b, c) || in_triangle(p, a, c, d);
  }

  const Mesh* mesh_;
  Vec2 lo_, hi_;
  int nb_ = 1;
  std::vector<std::vector<int>> bins_;
};

struct InterfaceResolutionReport {
  std::vector<int> min_count_per_inclusion;
  int min_count = 0;
  int rays_per_inclusion = 0;
  bool pass = false;
};

/// Counts interface-tagged elements crossed along rays normal to every
/// inclusion boundary; the interface is resolved when every ray crosses at
/// least `required` elements.
inline InterfaceResolutionReport validate_interface_resolution(const Mesh& mesh,
                                                               const GeometrySpec& spec,
                                                               int rays = 16, int required = 4) {
  rays = std::max(rays, 16);
  InterfaceResolutionReport rep;
  rep.rays_per_inclusion = rays;
  rep.min_count = std::numeric_limits<int>::max();
  const ElementLocator loc(mesh);
  const double h = spec.element_size;
  for (const auto& inc : spec.inclusions) {
    const double t = inc.interface_thickness;
    // Rays start half an angular step off the principal directions so that
    // they do not run exactly through grid vertices (where a ray touches only
    // corner-adjacent cells).
    const int m = 2 * rays;
    const auto pts = inc.boundary_samples(m);
    int worst = std::numeric_limits<int>::max();
    for (int k = 1; k < m; k += 2) {
      // outward normal from the neighbouring boundary samples (CCW curve)
      const Vec2 tan = pts[(k + 1) % m] - pts[k - 1];
      Vec2 nrm(tan.y(), -tan.x());
      nrm.normalize();
      std::set<int> crossed;
      const double ds = std::min(h, t) / 50.0;
      for (double s = -t; s <= 2.0 * t; s += ds) {
        const int e = loc.find(pts[k] + s * nrm);
        if (e >= 0 && mesh.elements[e].phase == Phase::interface) crossed.insert(e);
      }
      worst = std::min(worst, static_cast<int>(crossed.size()));
    }
    rep.min_count_per_inclusion.push_back(worst);
    rep.min_count = std::min(rep.min_count, worst);
  }
  if (spec.inclusions.empty()) rep.min_count = 0;
  rep.pass = !spec.inclusions.empty() && rep.min_count >= required;
  return rep;
}

// ---------------------------------------------------------------------------
// Cohesive element insertion

enum class CieMode { all_facets, interface_boundary_only };

inline CieMode parse_cie_mode(std::string_view s) {
  if (s == "all_facets") return CieMode::all_facets;
  if (s == "interface_boundary_only") return CieMode::interface_boundary_only;
  throw MeshError("unknown cohesive insertion mode '" + std::string(s) + "'");
}

namespace detail {

struct FacetUse {
  int element = -1;
  int local = -1;  // edge from local node `local` to `local + 1`
};

struct Facet {
  int a = -1, b = -1;  // sorted node ids
  std::vector<FacetUse> uses;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

inline std::vector<Facet> build_facets(const Mesh& mesh) {
  std::unordered_map<std::uint64_t, int> index;
  std::vector<Facet> facets;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    if (!is_bulk(el.kind)) continue;
    const int m = el.size();
    for (int k = 0; k < m; ++k) {
      const int p = el.nodes[k], q = el.nodes[(k + 1) % m];
      const int a = std::min(p, q), b = std::max(p, q);
      const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      auto [it, fresh] = index.emplace(key, static_cast<int>(facets.size()));
      if (fresh) facets.push_back({a, b, {}});
      facets[it->second].uses.push_back({static_cast<int>(e), k});
    }
  }
  return facets;
}

inline Phase cie_phase(Phase p, Phase q) {
  if (p == q && p == Phase::matrix) return Phase::cie_matrix;
  if (p == q && p == Phase::inclusion) return Phase::cie_inclusion;
  return Phase::cie_interface;
}

}  // namespace detail

/// Splits selected interior facets into zero-thickness cie4 elements.
/// all_facets splits every bulk-bulk facet; interface_boundary_only splits
/// facets whose neighbours carry different phases.
inline Mesh insert_cohesive_elements(const Mesh& mesh, CieMode mode) {
  for (const auto& el : mesh.elements)
    if (!is_bulk(el.kind)) throw MeshError("mesh already contains cohesive elements");
  mesh.validate();
  if (mode == CieMode::all_facets)
    for (const auto& el : mesh.elements)
      if (el.kind != ElementKind::tri3) throw MeshError("all_facets insertion requires a tri3 bulk mesh");

  const auto facets = detail::build_facets(mesh);

  // conformity: no facet shared by more than two elements, no node lying
  // inside a boundary facet (hanging node / dangling facet)
  std::vector<int> boundary_facets;
  for (std::size_t f = 0; f < facets.size(); ++f) {
    if (facets[f].uses.size() > 2)
      throw MeshError("non-conforming mesh: facet shared by more than two elements");
    if (facets[f].uses.size() == 1) boundary_facets.push_back(static_cast<int>(f));
  }
  {
    double hmax = 0.0;
    for (int f : boundary_facets)
      hmax = std::max(hmax, (mesh.coord(facets[f].a) - mesh.coord(facets[f].b)).norm());
    std::map<std::pair<long, long>, std::vector<int>> grid;
    const double cell = std::max(hmax, 1e-12);
    auto key = [cell](const Vec2& p) {
      return std::pair<long, long>(static_cast<long>(std::floor(p.x() / cell)),
                                   static_cast<long>(std::floor(p.y() / cell)));
    };
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) grid[key(mesh.coord(static_cast<int>(i)))].push_back(static_cast<int>(i));
    for (int f : boundary_facets) {
      const Vec2 a = mesh.coord(facets[f].a), b = mesh.coord(facets[f].b);
      const double len = (b - a).norm();
      const auto [ka0, ka1] = key(a.cwiseMin(b));
      const auto [kb0, kb1] = key(a.cwiseMax(b));
      for (long i = ka0; i <= kb0; ++i)
        for (long j = ka1; j <= kb1; ++j) {
          auto it = grid.find({i, j});
          if (it == grid.end()) continue;
          for (int n : it->second) {
            if (n == facets[f].a || n == facets[f].b) continue;
            const Vec2 p = mesh.coord(n);
            const double t = (p - a).dot(b - a) / (len * len);
            if (t <= 1e-9 || t >= 1.0 - 1e-9) continue;
            if ((a + t * (b - a) - p).norm() <= 1e-9 * len)
              throw MeshError("non-conforming mesh: dangling facet with hanging node " + std::to_string(n));
          }
        }
    }
  }

  auto split = [&](const detail::Facet& f) {
    if (f.uses.size() != 2) return false;
    if (mode == CieMode::all_facets) return true;
    return mesh.elements[f.uses[0].element].phase != mesh.elements[f.uses[1].element].phase;
  };

  // group element-node incidences connected through unsplit facets
  detail::UnionFind uf(mesh.elements.size() * 4);
  auto inc = [](int e, int local) { return e * 4 + local; };
  auto local_of = [&](int e, int node) {
    const auto& el = mesh.elements[e];
    for (int k = 0; k < el.size(); ++k)
      if (el.nodes[k] == node) return k;
    throw MeshError("internal: node not found in element");
  };
  for (const auto& f : facets) {
    if (f.uses.size() != 2 || split(f)) continue;
    const int e1 = f.uses[0].element, e2 = f.uses[1].element;
    for (int n : {f.a, f.b}) uf.unite(inc(e1, local_of(e1, n)), inc(e2, local_of(e2, n)));
  }

  Mesh out;
  out.nodes = mesh.nodes;
  out.elements = mesh.elements;
  std::vector<std::vector<int>> copies(mesh.nodes.size());
  std::unordered_map<int, int> root_to_node;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    auto& el = out.elements[e];
    for (int k = 0; k < el.size(); ++k) {
      const int orig = mesh.elements[e].nodes[k];
      const int root = uf.find(inc(static_cast<int>(e), k));
      auto it = root_to_node.find(root);
      int id;
      if (it != root_to_node.end()) {
        id = it->second;
      } else {
        if (copies[orig].empty()) {
          id = orig;
        } else {
          id = static_cast<int>(out.nodes.size());
          out.nodes.push_back(mesh.nodes[orig]);
        }
        copies[orig].push_back(id);
        root_to_node.emplace(root, id);
      }
      el.nodes[k] = id;
    }
  }

  for (const auto& f : facets) {
    if (!split(f)) continue;
    const auto& u1 = f.uses[0];
    const auto& u2 = f.uses[1];
    const auto& bot = out.elements[u1.element];
    const auto& top = out.elements[u2.element];
    const int m = bot.size();
    const int a_orig = mesh.elements[u1.element].nodes[u1.local];
    const int b_orig = mesh.elements[u1.element].nodes[(u1.local + 1) % m];
    const int bot_a = bot.nodes[u1.local];
    const int bot_b = bot.nodes[(u1.local + 1) % m];
    const int top_a = top.nodes[local_of(u2.element, a_orig)];
    const int top_b = top.nodes[local_of(u2.element, b_orig)];
    Element cie;
    cie.kind = ElementKind::cie4;
    cie.nodes = {bot_b, bot_a, top_a, top_b};
    cie.phase = detail::cie_phase(bot.phase, top.phase);
    out.elements.push_back(cie);
  }

  for (const auto& [name, ids] : mesh.node_sets) {
    auto& dst = out.node_sets[name];
    for (int id : ids) dst.insert(dst.end(), copies[id].begin(), copies[id].end());
    std::sort(dst.begin(), dst.end());
  }
  out.rebuild_element_sets();
  return out;
}

/// Merges geometrically coincident nodes (within tol) and drops cohesive
/// elements. Merged nodes take the lowest id of their cluster; ids are then
/// compacted preserving order.
inline Mesh merge_coincident_nodes(const Mesh& mesh, double tol = 1e-12) {
  const std::size_t n = mesh.nodes.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (mesh.nodes[a].x != mesh.nodes[b].x) return mesh.nodes[a].x < mesh.nodes[b].x;
    return mesh.nodes[a].y < mesh.nodes[b].y;
  });
  detail::UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = mesh.nodes[order[i]];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& q = mesh.nodes[order[j]];
      if (q.x - p.x > tol) break;
      if (std::abs(q.y - p.y) <= tol) uf.unite(order[i], order[j]);
    }
  }
  std::vector<int> rep(n), compact(n, -1);
  for (std::size_t i = 0; i < n; ++i) rep[i] = uf.find(static_cast<int>(i));
  Mesh out;
  for (std::size_t i = 0; i < n; ++i)
    if (rep[i] == static_cast<int>(i)) {
      compact[i] = static_cast<int>(out.nodes.size());
      out.nodes.push_back(mesh.nodes[i]);
    }
  auto map_id = [&](int id) { return compact[rep[id]]; };
  for (const auto& el : mesh.elements) {
    if (!is_bulk(el.kind)) continue;
    Element e = el;
    for (int k = 0; k < e.size(); ++k) e.nodes[k] = map_id(e.nodes[k]);
    out.elements.push_back(e);
  }
  for (const auto& [name, ids] : mesh.node_sets) {
    std::set<int> s;
    for (int id : ids) s.insert(map_id(id));
    out.node_sets[name] = std::vector<int>(s.begin(), s.end());
  }
  out.rebuild_element_sets();
  return out;
}

// ---------------------------------------------------------------------------
// Mesh text format (see docs/formats.md)

inline void write_mesh(std::ostream& os, const Mesh& m) {
  os << std::setprecision(17);
  os << "MPFRAC-MESH 1\n";
  os << "NODES " << m.nodes.size() << '\n';
  for (std::size_t i = 0; i < m.nodes.size(); ++i) os << i << ' ' << m.nodes[i].x << ' ' << m.nodes[i].y << '\n';
  os << "ELEMENTS " << m.elements.size() << '\n';
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    os << e << ' ' << to_string(el.kind) << ' ' << to_string(el.phase);
    for (int k = 0; k < el.size(); ++k) os << ' ' << el.nodes[k];
    os << '\n';
  }
  auto sets = [&os](const char* tag, const std::map<std::string, std::vector<int>>& s) {
    os << tag << ' ' << s.size() << '\n';
    for (const auto& [name, ids] : s) {
      os << name << ' ' << ids.size();
      for (int id : ids) os << ' ' << id;
      os << '\n';
    }
  };
  sets("NODESETS", m.node_sets);
  sets("ELEMSETS", m.element_sets);
  os << "END\n";
}

inline Mesh read_mesh(std::istream& is) {
  auto fail = [](const std::string& what) { throw MeshError("mesh file: " + what); };
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "MPFRAC-MESH" || version != 1)
    fail("bad header (expected 'MPFRAC-MESH 1')");
  Mesh m;
  std::size_t n = 0;
  if (!(is >> word) || word != "NODES" || !(is >> n)) fail("expected NODES");
  m.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t id = 0;
    if (!(is >> id >> m.nodes[i].x >> m.nodes[i].y) || id != i) fail("bad node record " + std::to_string(i));
  }
  if (!(is >> word) || word != "ELEMENTS" || !(is >> n)) fail("expected ELEMENTS");
  m.elements.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    std::size_t id = 0;
    std::string kind, phase;
    if (!(is >> id >> kind >> phase) || id != e) fail("bad element record " + std::to_string(e));
    auto& el = m.elements[e];
    el.kind = parse_element_kind(kind);
    el.phase = parse_phase(phase);
    for (int k = 0; k < el.size(); ++k)
      if (!(is >> el.nodes[k])) fail("truncated element record " + std::to_string(e));
  }
  auto sets = [&](const char* tag, std::map<std::string, std::vector<int>>& s) {
    std::size_t count = 0;
    if (!(is >> word) || word != tag || !(is >> count)) fail(std::string("expected ") + tag);
    for (std::size_t i = 0; i < count; ++i) {
      std::string name;
      std::size_t k = 0;
      if (!(is >> name >> k)) fail(std::string("bad ") + tag + " record");
      auto& ids = s[name];
      ids.resize(k);
      for (auto& id : ids)
        if (!(is >> id)) fail(std::string("truncated ") + tag + " record");
    }
  };
  sets("NODESETS", m.node_sets);
  sets("ELEMSETS", m.element_sets);
  if (!(is >> word) || word != "END") fail("missing END");
  m.validate();
  return m;
}

inline void save_mesh(const std::string& path, const Mesh& m) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_mesh(os, m);
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return read_mesh(is);
}

}  // namespace mpfrac
