#include <gtest/gtest.h>

#include <sstream>

#include "mpfrac/microstructure.hpp"

using namespace mpfrac;

namespace {

MicrostructureSpec random_spec(Shape shape, std::uint64_t seed) {
  MicrostructureSpec s;
  s.shape = shape;
  s.seed = seed;
  return s;
}

std::string serialize(const GeometrySpec& g) {
  std::ostringstream os;
  write_geometry(os, g);
  return os.str();
}

double fraction_of(const GeometrySpec& g) { return g.inclusion_area() / (g.width * g.height); }

}  // namespace

TEST(RandomPlacement, CirclesAtTwentyPercentCountMatchesAreaArithmetic) {
  // 500 mm^2 of inclusions: at most 18 circles of 6 mm, at least 10 of 8 mm
  for (std::uint64_t seed : {1, 7, 42, 1234}) {
    const auto g = place_inclusions(random_spec(Shape::circle, seed));
    EXPECT_GE(g.inclusions.size(), 10u) << "seed " << seed;
    EXPECT_LE(g.inclusions.size(), 18u) << "seed " << seed;
  }
  const auto g7 = place_inclusions(random_spec(Shape::circle, 7));
  EXPECT_GE(g7.inclusions.size(), 12u);
  EXPECT_LE(g7.inclusions.size(), 18u);
}

TEST(RandomPlacement, FractionWithinOnePercentForEveryShape) {
  for (Shape shape : {Shape::circle, Shape::ellipse, Shape::polygon})
    for (std::uint64_t seed : {3, 7, 11}) {
      const auto g = place_inclusions(random_spec(shape, seed));
      EXPECT_NEAR(fraction_of(g), 0.20, 0.01) << to_string(shape) << " seed " << seed;
    }
}

TEST(RandomPlacement, RingsKeepTheGapToEachOtherAndToTheBoundary) {
  for (Shape shape : {Shape::circle, Shape::ellipse, Shape::polygon}) {
    const auto spec = random_spec(shape, 5);
    const auto g = place_inclusions(spec);
    for (std::size_t i = 0; i < g.inclusions.size(); ++i) {
      const auto& a = g.inclusions[i];
      for (const auto& p : a.boundary_samples(360)) {
        const double clear = a.interface_thickness + spec.min_gap;
        EXPECT_GT(p.x(), clear - 1e-9);
        EXPECT_GT(p.y(), clear - 1e-9);
        EXPECT_LT(p.x(), g.width - clear + 1e-9);
        EXPECT_LT(p.y(), g.height - clear + 1e-9);
      }
      for (std::size_t j = 0; j < g.inclusions.size(); ++j) {
        if (i == j) continue;
        const auto& b = g.inclusions[j];
        for (const auto& p : a.boundary_samples(360))
          EXPECT_GT(b.signed_distance(p), a.interface_thickness + b.interface_thickness + spec.min_gap - 0.02)
              << to_string(shape) << ' ' << i << ' ' << j;
      }
    }
  }
}

TEST(RandomPlacement, SizesStayInRange) {
  const auto spec = random_spec(Shape::circle, 9);
  const auto g = place_inclusions(spec);
  for (const auto& inc : g.inclusions) {
    EXPECT_GE(2.0 * inc.rx, spec.size_min - 1e-12);
    EXPECT_LE(2.0 * inc.rx, spec.size_max + 1e-12);
  }
}

TEST(RandomPlacement, DeterministicForAFixedSeed) {
  for (Shape shape : {Shape::circle, Shape::ellipse, Shape::polygon}) {
    const auto a = serialize(place_inclusions(random_spec(shape, 7)));
    const auto b = serialize(place_inclusions(random_spec(shape, 7)));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, serialize(place_inclusions(random_spec(shape, 8))));
  }
}

TEST(RandomPlacement, ExcessiveFractionReportsJamming) {
  auto spec = random_spec(Shape::circle, 1);
  spec.fraction = 0.9;
  try {
    place_inclusions(spec);
    FAIL() << "expected a jamming error";
  } catch (const MicrostructureError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("jamming", 0), 0u) << e.what();
  }
}

TEST(RandomPlacement, CrowdedDomainJamsAfterConsecutiveRejections) {
  auto spec = random_spec(Shape::circle, 1);
  spec.width = spec.height = 20.0;
  spec.fraction = 0.5;
  spec.max_rejections = 500;
  EXPECT_THROW(place_inclusions(spec), MicrostructureError);
}

TEST(RandomPlacement, InvalidSpecificationsRejected) {
  auto bad = [](auto edit) {
    auto s = random_spec(Shape::circle, 1);
    edit(s);
    return s;
  };
  EXPECT_THROW(place_inclusions(bad([](auto& s) { s.fraction = 0.0; })), MicrostructureError);
  EXPECT_THROW(place_inclusions(bad([](auto& s) { s.size_min = 9.0; })), MicrostructureError);
  EXPECT_THROW(place_inclusions(bad([](auto& s) { s.width = 8.0; })), MicrostructureError);
  EXPECT_THROW(place_inclusions(bad([](auto& s) { s.aspect_min = 0.0; })), MicrostructureError);
  EXPECT_THROW(place_inclusions(bad([](auto& s) { s.min_gap = -1.0; })), MicrostructureError);
}

TEST(FixedLayouts, EqualInclusionAndInterfaceFractions) {
  const auto ref = fixed_layout("single");
  for (const auto& name : fixed_layout_names()) {
    const auto g = fixed_layout(name);
    EXPECT_NEAR(g.inclusion_area() / ref.inclusion_area(), 1.0, 0.005) << name;
    EXPECT_NEAR(g.ring_area() / ref.ring_area(), 1.0, 0.005) << name;
  }
}

TEST(FixedLayouts, InclusionCountsAndSeparation) {
  const std::map<std::string, std::size_t> count{
      {"single", 1}, {"two_ellipses_a", 2}, {"two_ellipses_b", 2}, {"four_ellipses", 4}};
  for (const auto& [name, n] : count) EXPECT_EQ(fixed_layout(name).inclusions.size(), n) << name;
  EXPECT_THROW(fixed_layout("three_ellipses"), MicrostructureError);
}

TEST(FixedLayouts, MatchedRingThicknessSolvesTheAreaBalance) {
  const double P = 10.0, ring = 7.5;
  const double t = detail::matched_ring_thickness(3, P, ring);
  EXPECT_NEAR(3.0 * (P * t + std::numbers::pi * t * t), ring, 1e-12);
}
