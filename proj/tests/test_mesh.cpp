#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "mpfrac/mesh.hpp"

using namespace mpfrac;

namespace {

GeometrySpec empty_domain(double w, double h, double edge) {
  GeometrySpec g;
  g.width = w;
  g.height = h;
  g.element_size = edge;
  return g;
}

Mesh two_triangles() {
  Mesh m;
  m.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.elements = {{ElementKind::tri3, {0, 1, 2, -1}, Phase::matrix}, {ElementKind::tri3, {0, 2, 3, -1}, Phase::matrix}};
  m.node_sets["left_edge"] = {0, 3};
  m.rebuild_element_sets();
  return m;
}

Mesh benchmark_mesh(double h, ElementKind kind) {
  const auto g = benchmark_geometry(h);
  return tag_phases(generate_structured_mesh(g, kind), g);
}

double cie_length(const Mesh& m, const Element& e) {
  const Vec2 l = 0.5 * (m.coord(e.nodes[0]) + m.coord(e.nodes[3]));
  const Vec2 r = 0.5 * (m.coord(e.nodes[1]) + m.coord(e.nodes[2]));
  return (r - l).norm();
}

}  // namespace

TEST(StructuredMesh, UnitSquareCounts) {
  const Mesh m = generate_structured_mesh(empty_domain(1, 1, 0.5), ElementKind::quad4);
  EXPECT_EQ(m.elements.size(), 4u);
  EXPECT_EQ(m.nodes.size(), 9u);
  EXPECT_NO_THROW(m.validate());
}

TEST(StructuredMesh, LargeDomainCellCount) {
  const Mesh m = generate_structured_mesh(empty_domain(50, 50, 0.15), ElementKind::quad4);
  EXPECT_EQ(m.elements.size(), 334u * 334u);
}

TEST(StructuredMesh, CoarseEdgeRejected) {
  EXPECT_THROW(generate_structured_mesh(empty_domain(50, 50, 30), ElementKind::quad4), MeshError);
  EXPECT_THROW(generate_structured_mesh(empty_domain(50, 50, 0), ElementKind::quad4), MeshError);
}

TEST(StructuredMesh, BoundarySets) {
  const Mesh m = generate_structured_mesh(empty_domain(3, 2, 0.5), ElementKind::tri3);
  for (int n : m.node_set("left_edge")) EXPECT_EQ(m.nodes[n].x, 0.0);
  for (int n : m.node_set("right_edge")) EXPECT_EQ(m.nodes[n].x, 3.0);
  EXPECT_EQ(m.node_set("left_edge").size(), 5u);
  EXPECT_EQ(m.node_set("right_edge").size(), 5u);
  ASSERT_EQ(m.node_set("bottom_left_corner").size(), 1u);
  const int c = m.node_set("bottom_left_corner")[0];
  EXPECT_EQ(m.nodes[c].x, 0.0);
  EXPECT_EQ(m.nodes[c].y, 0.0);
}

TEST(StructuredMesh, TrianglesUseBothDiagonals) {
  const Mesh m = generate_structured_mesh(empty_domain(2, 2, 0.5), ElementKind::tri3);
  EXPECT_EQ(m.elements.size(), 32u);
  int rising = 0, falling = 0;
  for (const auto& el : m.elements) {
    EXPECT_GT(m.signed_area(el), 0.0);
    // the hypotenuse is the longest edge; classify its slope
    for (int k = 0; k < 3; ++k) {
      const Vec2 d = m.coord(el.nodes[(k + 1) % 3]) - m.coord(el.nodes[k]);
      if (d.norm() > 0.6) (d.x() * d.y() > 0 ? rising : falling)++;
    }
  }
  EXPECT_EQ(rising, 16);
  EXPECT_EQ(falling, 16);
}

TEST(PhaseTagging, CentroidRule) {
  const auto g = benchmark_geometry(0.3);
  const Vec2 c(10, 10);
  EXPECT_EQ(phase_at(g, c), Phase::inclusion);
  EXPECT_EQ(phase_at(g, c + Vec2(4.0 + 0.3, 0.0)), Phase::interface);
  EXPECT_EQ(phase_at(g, Vec2(19.9, 19.9)), Phase::matrix);
}

TEST(PhaseTagging, TotalAndDeterministic) {
  const Mesh a = benchmark_mesh(0.3, ElementKind::quad4);
  const Mesh b = benchmark_mesh(0.3, ElementKind::quad4);
  std::size_t total = 0;
  for (const char* name : {"matrix", "inclusion", "interface"}) {
    ASSERT_TRUE(a.element_sets.count(name)) << name;
    EXPECT_FALSE(a.element_sets.at(name).empty());
    total += a.element_sets.at(name).size();
    EXPECT_EQ(a.element_sets.at(name), b.element_sets.at(name));
  }
  EXPECT_EQ(total, a.elements.size());
}

TEST(InterfaceResolution, ElementsAcrossTheBand) {
  {
    const auto g = benchmark_geometry(0.15);
    const auto r = validate_interface_resolution(tag_phases(generate_structured_mesh(g, ElementKind::quad4), g), g);
    EXPECT_TRUE(r.pass) << r.min_count;
    EXPECT_GE(r.min_count, 4);
  }
  {
    const auto g = benchmark_geometry(0.3);
    const auto r = validate_interface_resolution(tag_phases(generate_structured_mesh(g, ElementKind::quad4), g), g);
    EXPECT_FALSE(r.pass);
    EXPECT_LE(r.min_count, 3);
    EXPECT_GE(r.rays_per_inclusion, 16);
  }
  {
    const auto g = benchmark_geometry(0.1, 20, 20, 4, 0.5);
    const auto r = validate_interface_resolution(tag_phases(generate_structured_mesh(g, ElementKind::quad4), g), g);
    EXPECT_TRUE(r.pass) << r.min_count;
  }
}

TEST(CohesiveInsertion, SingleSharedFacet) {
  const Mesh m = insert_cohesive_elements(two_triangles(), CieMode::all_facets);
  EXPECT_EQ(m.num_cie(), 1u);
  EXPECT_EQ(m.num_bulk(), 2u);
  // the two shared nodes are duplicated once each: 4 + 2
  EXPECT_EQ(m.nodes.size(), 6u);
  const auto& cie = m.elements.back();
  EXPECT_EQ(cie.kind, ElementKind::cie4);
  EXPECT_EQ(cie.phase, Phase::cie_matrix);
  std::set<int> ids(cie.nodes.begin(), cie.nodes.end());
  EXPECT_EQ(ids.size(), 4u);
  EXPECT_NO_THROW(m.validate());
  // boundary node sets follow the copies
  EXPECT_EQ(m.node_set("left_edge").size(), 3u);
}

TEST(CohesiveInsertion, NoInteriorFacetsLeavesMeshUnchanged) {
  Mesh m;
  m.nodes = {{0, 0}, {1, 0}, {0, 1}};
  m.elements = {{ElementKind::tri3, {0, 1, 2, -1}, Phase::matrix}};
  m.rebuild_element_sets();
  const Mesh out = insert_cohesive_elements(m, CieMode::all_facets);
  EXPECT_EQ(out.num_cie(), 0u);
  EXPECT_EQ(out.nodes.size(), 3u);
  EXPECT_EQ(out.elements[0].nodes, m.elements[0].nodes);
}

TEST(CohesiveInsertion, NormalPointsFromFirstToSecondElement) {
  const Mesh m = insert_cohesive_elements(two_triangles(), CieMode::all_facets);
  const auto& cie = m.elements.back();
  const Vec2 t = (m.coord(cie.nodes[1]) - m.coord(cie.nodes[0])).normalized();
  const Vec2 n(-t.y(), t.x());
  // bottom element owns nodes 0/1, the top element nodes 2/3
  auto owner = [&](int node) {
    for (std::size_t e = 0; e < 2; ++e)
      for (int k = 0; k < 3; ++k)
        if (m.elements[e].nodes[k] == node) return static_cast<int>(e);
    return -1;
  };
  const int bot = owner(cie.nodes[0]), top = owner(cie.nodes[3]);
  ASSERT_NE(bot, top);
  EXPECT_EQ(owner(cie.nodes[1]), bot);
  EXPECT_EQ(owner(cie.nodes[2]), top);
  EXPECT_GT(n.dot(m.centroid(m.elements[top]) - m.centroid(m.elements[bot])), 0.0);
}

TEST(CohesiveInsertion, BenchmarkRatioAndInvariants) {
  const Mesh bulk = benchmark_mesh(0.3, ElementKind::tri3);
  const Mesh m = insert_cohesive_elements(bulk, CieMode::all_facets);
  const double ratio = double(m.num_cie()) / double(m.num_bulk());
  EXPECT_NEAR(ratio, 1.5, 0.1);
  // coincident pairs and facet length conservation
  double split_length = 0.0, cie_total = 0.0;
  for (const auto& f : detail::build_facets(bulk))
    if (f.uses.size() == 2) split_length += (bulk.coord(f.a) - bulk.coord(f.b)).norm();
  for (const auto& el : m.elements) {
    if (el.kind != ElementKind::cie4) continue;
    EXPECT_LE((m.coord(el.nodes[0]) - m.coord(el.nodes[3])).norm(), 1e-12);
    EXPECT_LE((m.coord(el.nodes[1]) - m.coord(el.nodes[2])).norm(), 1e-12);
    cie_total += cie_length(m, el);
  }
  EXPECT_NEAR(split_length, cie_total, 1e-9 * split_length);
  // each bulk element now owns private nodes
  std::vector<int> users(m.nodes.size(), 0);
  for (const auto& el : m.elements)
    if (is_bulk(el.kind))
      for (int k = 0; k < el.size(); ++k) users[el.nodes[k]]++;
  for (int u : users) EXPECT_EQ(u, 1);
}

TEST(CohesiveInsertion, MergeRoundTripRestoresOriginal) {
  for (auto mode : {CieMode::all_facets, CieMode::interface_boundary_only}) {
    const Mesh bulk = benchmark_mesh(0.5, ElementKind::tri3);
    const Mesh split = insert_cohesive_elements(bulk, mode);
    const Mesh merged = merge_coincident_nodes(split);
    ASSERT_EQ(merged.nodes.size(), bulk.nodes.size());
    ASSERT_EQ(merged.elements.size(), bulk.elements.size());
    for (std::size_t i = 0; i < bulk.nodes.size(); ++i) {
      EXPECT_EQ(merged.nodes[i].x, bulk.nodes[i].x);
      EXPECT_EQ(merged.nodes[i].y, bulk.nodes[i].y);
    }
    for (std::size_t e = 0; e < bulk.elements.size(); ++e) {
      EXPECT_EQ(merged.elements[e].nodes, bulk.elements[e].nodes);
      EXPECT_EQ(merged.elements[e].phase, bulk.elements[e].phase);
    }
    EXPECT_EQ(merged.node_sets, bulk.node_sets);
  }
}

TEST(CohesiveInsertion, InterfaceBoundaryOnlyTargetsPhaseChanges) {
  const Mesh bulk = absorb_interface_band(benchmark_mesh(0.3, ElementKind::quad4));
  EXPECT_FALSE(bulk.element_sets.count("interface"));
  const Mesh m = insert_cohesive_elements(bulk, CieMode::interface_boundary_only);
  ASSERT_GT(m.num_cie(), 0u);
  double length = 0.0;
  for (const auto& el : m.elements)
    if (el.kind == ElementKind::cie4) {
      EXPECT_EQ(el.phase, Phase::cie_interface);
      length += cie_length(m, el);
    }
  // staircase boundary of a radius-4 circle: between the perimeter and the
  // bounding-square perimeter
  EXPECT_GT(length, 2 * std::numbers::pi * 4.0);
  EXPECT_LT(length, 4 * 8.0 * 1.05);
}

TEST(CohesiveInsertion, RejectsNonConformingInput) {
  // a big quad next to two small quads: hanging node at (1, 0.5)
  Mesh m;
  m.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0}, {2, 0.5}, {1, 0.5}, {2, 1}};
  m.elements = {{ElementKind::quad4, {0, 1, 2, 3}, Phase::matrix},
                {ElementKind::quad4, {1, 4, 5, 6}, Phase::matrix},
                {ElementKind::quad4, {6, 5, 7, 2}, Phase::inclusion}};
  m.rebuild_element_sets();
  EXPECT_THROW(insert_cohesive_elements(m, CieMode::interface_boundary_only), MeshError);

  Mesh fan;  // one facet used by three triangles
  fan.nodes = {{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 2}};
  fan.elements = {{ElementKind::tri3, {0, 1, 2, -1}, Phase::matrix},
                  {ElementKind::tri3, {0, 3, 1, -1}, Phase::matrix},
                  {ElementKind::tri3, {0, 1, 4, -1}, Phase::matrix}};
  EXPECT_THROW(insert_cohesive_elements(fan, CieMode::all_facets), MeshError);
}

TEST(CohesiveInsertion, AllFacetsNeedsTriangles) {
  const Mesh m = generate_structured_mesh(empty_domain(1, 1, 0.25), ElementKind::quad4);
  EXPECT_THROW(insert_cohesive_elements(m, CieMode::all_facets), MeshError);
}

TEST(MeshFile, RoundTripIsBitExact) {
  const Mesh m = insert_cohesive_elements(benchmark_mesh(0.5, ElementKind::tri3), CieMode::all_facets);
  std::ostringstream a;
  write_mesh(a, m);
  std::istringstream in(a.str());
  const Mesh r = read_mesh(in);
  std::ostringstream b;
  write_mesh(b, r);
  EXPECT_EQ(a.str(), b.str());
  ASSERT_EQ(r.nodes.size(), m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    EXPECT_EQ(r.nodes[i].x, m.nodes[i].x);
    EXPECT_EQ(r.nodes[i].y, m.nodes[i].y);
  }
}

TEST(MeshFile, MalformedInputRejected) {
  std::istringstream bad("MPFRAC-MESH 2\n");
  EXPECT_THROW(read_mesh(bad), MeshError);
  std::istringstream truncated("MPFRAC-MESH 1\nNODES 2\n0 0 0\n");
  EXPECT_THROW(read_mesh(truncated), MeshError);
}

TEST(MeshValidation, ClockwiseElementRejected) {
  Mesh m;
  m.nodes = {{0, 0}, {1, 0}, {0, 1}};
  m.elements = {{ElementKind::tri3, {0, 2, 1, -1}, Phase::matrix}};
  EXPECT_THROW(m.validate(), MeshError);
}

TEST(MeshValidation, MissingNodeSetReported) {
  const Mesh m = two_triangles();
  EXPECT_THROW(m.node_set("right_edge"), MeshError);
}

TEST(ElementLocatorTest, FindsContainingElement) {
  const Mesh m = benchmark_mesh(0.5, ElementKind::tri3);
  const ElementLocator loc(m);
  for (const Vec2& p : {Vec2(0.1, 0.1), Vec2(10.0, 10.0), Vec2(19.9, 3.3)}) {
    const int e = loc.find(p);
    ASSERT_GE(e, 0);
    const Vec2 c = m.centroid(m.elements[e]);
    EXPECT_LT((c - p).norm(), 0.5);
  }
  EXPECT_EQ(loc.find(Vec2(30, 30)), -1);
}
