#include <gtest/gtest.h>

#include <sstream>

#include "mpfrac/solver.hpp"

using namespace mpfrac;

namespace {

Mesh plate(double w, double h, double edge, ElementKind kind = ElementKind::quad4) {
  GeometrySpec g;
  g.width = w;
  g.height = h;
  g.element_size = edge;
  return tag_phases(generate_structured_mesh(g, kind), g);
}

Mesh small_benchmark(ElementKind kind = ElementKind::quad4) {
  const auto g = benchmark_geometry(0.5, 10.0, 10.0, 2.0, 0.6);
  return tag_phases(generate_structured_mesh(g, kind), g);
}

SolverConfig damaging_config(double lc = 1.0) {
  SolverConfig c;
  c.lc = lc;
  c.total_displacement = 0.03;
  c.step_increment = 1.0 / 30.0;
  return c;
}

}  // namespace

TEST(Staggered, HomogeneousPlateReactionMatchesUniaxialStress) {
  SolverConfig c;
  c.total_displacement = 1e-4;  // stress 0.7 MPa, below every strength
  c.step_increment = 0.5;
  StaggeredSolver s(plate(4.0, 2.0, 0.5), default_property_tables(), ModelKind::CPFM, {}, c);
  const auto& r = s.run();
  const double E = default_property_tables().bulk_props(Phase::matrix).E;
  EXPECT_NEAR(r.curve.back().reaction_sum, E * 2.0 * 1e-4 / 4.0, 1e-9);
  EXPECT_NEAR(r.curve.back().E_elastic, 0.5 * E * 2.0 * 4.0 * std::pow(1e-4 / 4.0, 2), 1e-12);
  for (double p : s.damage()) EXPECT_EQ(p, 0.0);
}

TEST(Staggered, ReactionsBalanceAtEveryStep) {
  for (ModelKind kind : {ModelKind::CPFM, ModelKind::AT2}) {
    StaggeredSolver s(small_benchmark(), default_property_tables(), kind, {}, damaging_config(kind == ModelKind::AT2 ? 0.5 : 1.0));
    const auto& r = s.run();
    ASSERT_FALSE(r.aborted) << r.message;
    for (const auto& rec : r.curve) {
      const double scale = std::max(std::abs(rec.reaction_sum), 1e-3);
      EXPECT_NEAR(rec.reaction_sum, rec.reaction_right, 1e-6 * scale) << to_string(kind) << " step " << rec.step;
    }
    EXPECT_GT(r.peak_reaction(), 0.0);
  }
}

TEST(Staggered, HistoryAndDamageNeverDecrease) {
  auto c = damaging_config();
  c.total_displacement = 0.05;
  StaggeredSolver s(small_benchmark(), default_property_tables(), ModelKind::CPFM, {}, c);
  std::vector<double> H = s.history();
  std::vector<double> phi(s.damage().data(), s.damage().data() + s.damage().size());
  bool damaged = false;
  s.run([&](const StaggeredSolver& x) {
    for (std::size_t i = 0; i < H.size(); ++i) EXPECT_GE(x.history()[i], H[i]);
    for (std::size_t i = 0; i < phi.size(); ++i) EXPECT_GE(x.damage()[static_cast<Eigen::Index>(i)], phi[i]);
    H = x.history();
    phi.assign(x.damage().data(), x.damage().data() + x.damage().size());
  });
  for (double p : phi) damaged = damaged || p > 0.5;
  EXPECT_TRUE(damaged);
}

TEST(Staggered, DamageStaysWithinBounds) {
  StaggeredSolver s(small_benchmark(), default_property_tables(), ModelKind::AT1, {}, damaging_config(0.5));
  s.run();
  for (double p : s.damage()) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Staggered, BitIdenticalReruns) {
  auto run = [] {
    StaggeredSolver s(small_benchmark(), default_property_tables(), ModelKind::CPFM, {}, damaging_config());
    s.run();
    return std::pair{s.result().curve, std::vector<double>(s.damage().data(), s.damage().data() + s.damage().size())};
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.first.size(), b.first.size());
  for (std::size_t i = 0; i < a.first.size(); ++i) {
    EXPECT_EQ(a.first[i].reaction_sum, b.first[i].reaction_sum);
    EXPECT_EQ(a.first[i].E_dissipated, b.first[i].E_dissipated);
  }
  EXPECT_EQ(a.second, b.second);
}

TEST(Staggered, CheckpointRestartReproducesTheUninterruptedRun) {
  const auto mesh = small_benchmark();
  StaggeredSolver full(mesh, default_property_tables(), ModelKind::CPFM, {}, damaging_config());
  full.run();

  StaggeredSolver first(mesh, default_property_tables(), ModelKind::CPFM, {}, damaging_config());
  for (int k = 0; k < 12; ++k) first.advance();
  std::stringstream ck;
  first.save_checkpoint(ck);
  StaggeredSolver second(mesh, default_property_tables(), ModelKind::CPFM, {}, damaging_config());
  second.load_checkpoint(ck);
  EXPECT_EQ(second.step(), 12);
  second.run();
  ASSERT_EQ(second.result().curve.size(), full.result().curve.size());
  for (std::size_t i = 0; i < full.result().curve.size(); ++i)
    EXPECT_EQ(second.result().curve[i].reaction_sum, full.result().curve[i].reaction_sum) << i;
  for (Eigen::Index i = 0; i < full.damage().size(); ++i) EXPECT_EQ(second.damage()[i], full.damage()[i]);
}

TEST(Staggered, CheckpointForDifferentModelRejected) {
  const auto mesh = small_benchmark();
  StaggeredSolver a(mesh, default_property_tables(), ModelKind::CPFM, {}, damaging_config());
  std::stringstream ck;
  a.save_checkpoint(ck);
  StaggeredSolver b(plate(4.0, 2.0, 0.5), default_property_tables(), ModelKind::CPFM, {}, damaging_config());
  EXPECT_THROW(b.load_checkpoint(ck), Error);
}

TEST(Staggered, DivergenceAbortsWithAMessage) {
  auto c = damaging_config();
  c.newton_max_iter = 1;
  c.newton_tol = 1e-15;
  c.max_halvings = 1;
  StaggeredSolver s(small_benchmark(), default_property_tables(), ModelKind::CPFM, {}, c);
  const auto& r = s.run();
  // the first increments are linear and converge in one iteration; damage
  // growth needs more
  EXPECT_TRUE(r.aborted);
  EXPECT_NE(r.message.find("Newton divergence"), std::string::npos) << r.message;
}

TEST(Staggered, CohesiveModelNeedsTheExplicitSolver) {
  EXPECT_THROW(StaggeredSolver(small_benchmark(), default_property_tables(), ModelKind::CZM, {}, damaging_config()),
               ConfigError);
}

TEST(Staggered, HybridInterfaceDebondsMonotonically) {
  auto mesh = insert_cohesive_elements(absorb_interface_band(small_benchmark()), CieMode::interface_boundary_only);
  auto c = damaging_config();
  c.total_displacement = 0.01;
  c.step_increment = 0.05;
  StaggeredSolver s(mesh, default_property_tables(), ModelKind::HYBRID, {}, c);
  std::vector<double> D(s.cohesive_states().size() * 2, 0.0);
  const auto& r = s.run([&](const StaggeredSolver& x) {
    for (std::size_t i = 0; i < x.cohesive_states().size(); ++i)
      for (int k = 0; k < 2; ++k) {
        EXPECT_GE(x.cohesive_states()[i][k].D, D[2 * i + k]);
        D[2 * i + k] = x.cohesive_states()[i][k].D;
      }
  });
  ASSERT_FALSE(r.aborted) << r.message;
  ASSERT_TRUE(r.first_failure.has_value());
  EXPECT_EQ(r.first_failure->phase, Phase::cie_interface);
}

TEST(Explicit, QuasiStaticElasticPullMatchesStaticReaction) {
  SolverConfig c;
  c.mode = SolverConfig::Mode::explicit_dynamic;
  c.total_displacement = 1e-4;
  c.total_time = 1.0;
  c.step_increment = 5e-4;
  ExplicitSolver s(plate(4.0, 2.0, 0.5, ElementKind::tri3), default_property_tables(), c);
  const auto& r = s.run();
  const double E = default_property_tables().bulk_props(Phase::matrix).E;
  EXPECT_NEAR(r.curve.back().reaction_sum / (E * 2.0 * 1e-4 / 4.0), 1.0, 0.02);
  EXPECT_LT(r.max_kinetic_ratio, 0.05);
  EXPECT_GE(s.mass_scaling(), 1.0);
  EXPECT_LE(s.time_step(), s.stable_time_step());
}

TEST(Explicit, UndampedFreeVibrationConservesEnergy) {
  SolverConfig c;
  c.mode = SolverConfig::Mode::explicit_dynamic;
  c.total_displacement = 1e-4;
  c.step_increment = 1e-3;
  c.bulk_viscosity = 0.0;
  ExplicitSolver s(plate(4.0, 2.0, 0.5, ElementKind::tri3), default_property_tables(), c);
  for (int k = 0; k < 200; ++k) s.step();
  s.set_free(true);
  s.step();
  const double e0 = s.elastic_energy() + s.kinetic_energy();
  ASSERT_GT(e0, 0.0);
  for (int k = 0; k < 2000; ++k) {
    s.step();
    // central differences keep a bounded oscillation of the sampled energy
    EXPECT_NEAR((s.elastic_energy() + s.kinetic_energy()) / e0, 1.0, 0.05);
  }
}

TEST(Explicit, UnstableStepRejected) {
  SolverConfig c;
  c.mode = SolverConfig::Mode::explicit_dynamic;
  c.step_increment = 1e-3;
  c.mass_scaling = 1.0;
  EXPECT_THROW(ExplicitSolver(plate(4.0, 2.0, 0.5, ElementKind::tri3), default_property_tables(), c), SolverError);
}

TEST(BoundaryConditions, LeftFixedRightPulledCornerPinned) {
  const auto mesh = plate(4.0, 2.0, 0.5);
  const auto bc = apply_boundary_conditions(mesh, 0.02);
  std::size_t pulled = 0, held = 0;
  for (std::size_t k = 0; k < bc.dofs.size(); ++k) {
    if (bc.values[k] == 0.02) ++pulled;
    else if (bc.values[k] == 0.0) ++held;
  }
  EXPECT_EQ(pulled, mesh.node_set("right_edge").size());
  EXPECT_EQ(held, mesh.node_set("left_edge").size() + 1);
}
