#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mpfrac/mpfrac.hpp"

using namespace mpfrac;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mpfrac_test_io" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(MPFRAC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallConfig = R"(
[model]
type = CPFM
lc = 1.0

[geometry]
source = benchmark
width = 10
height = 10
radius = 2
element = quad4
element_size = 0.5

[solver]
total_displacement = 0.01
step_increment = 0.1

[output]
directory = out
snapshot_interval = 5
)";

RunConfig parse(const std::string& text, const fs::path& base = ".") {
  std::istringstream is(text);
  return parse_run_config(is, base);
}

std::vector<LoadStepRecord> sample_curve() {
  std::vector<LoadStepRecord> c;
  for (int i = 0; i < 5; ++i) {
    LoadStepRecord r;
    r.step = i;
    r.u_applied = 0.1 * i / 3.0;
    r.reaction_sum = std::sin(1.0 + i) * 100.0;
    r.reaction_avg = r.reaction_sum / 7.0;
    r.reaction_right = r.reaction_sum * (1.0 + 1e-13);
    r.iterations = 3 * i;
    r.E_elastic = 1e-3 / (i + 1.0);
    r.E_dissipated = std::sqrt(2.0) * i;
    r.E_kinetic = 0.0;
    r.E_fracture = 0.5 * i;
    c.push_back(r);
  }
  return c;
}

}  // namespace

TEST(CurveCsv, RoundTripIsBitExact) {
  const auto c = sample_curve();
  std::stringstream ss;
  write_curve_csv(ss, c);
  const auto back = read_curve_csv(ss);
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back[i].step, c[i].step);
    EXPECT_EQ(back[i].u_applied, c[i].u_applied);
    EXPECT_EQ(back[i].reaction_sum, c[i].reaction_sum);
    EXPECT_EQ(back[i].reaction_right, c[i].reaction_right);
    EXPECT_EQ(back[i].E_dissipated, c[i].E_dissipated);
    EXPECT_EQ(back[i].iterations, c[i].iterations);
  }
}

TEST(CurveCsv, NonFiniteValuesAndBadHeadersRejected) {
  auto c = sample_curve();
  c[2].reaction_sum = std::nan("");
  std::stringstream ss;
  EXPECT_THROW(write_curve_csv(ss, c), Error);
  std::istringstream bad("step,u\n0,0\n");
  EXPECT_THROW(read_curve_csv(bad), Error);
  std::istringstream row(std::string(curve_header()) + "\n1,2,x\n");
  EXPECT_THROW(read_curve_csv(row), Error);
}

TEST(CurveCsv, NegativeZeroPrintedAsZero) {
  std::vector<LoadStepRecord> c(1);
  c[0].reaction_sum = -0.0;
  std::stringstream ss;
  write_curve_csv(ss, c);
  EXPECT_EQ(ss.str().find("-0"), std::string::npos);
}

TEST(Vtk, SnapshotRoundTripKeepsGeometryAndFields) {
  const auto g = benchmark_geometry(1.0, 10.0, 10.0, 2.0, 0.6);
  auto mesh = tag_phases(generate_structured_mesh(g, ElementKind::quad4), g);
  mesh = insert_cohesive_elements(absorb_interface_band(std::move(mesh)), CieMode::interface_boundary_only);
  FieldSnapshot s;
  s.step = 7;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    s.u.push_back(1e-3 * i);
    s.u.push_back(-2e-3 * i);
    s.phi.push_back(std::fmod(0.37 * i, 1.0));
  }
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    s.von_mises.push_back(0.5 * e);
    s.damage.push_back(e % 3 == 0 ? 1.0 : 0.0);
  }
  std::stringstream ss;
  write_vtk(ss, mesh, s);
  const auto d = read_vtk(ss);
  ASSERT_EQ(d.points.size(), mesh.nodes.size());
  ASSERT_EQ(d.cells.size(), mesh.elements.size());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    EXPECT_EQ(d.cell_types[e], mesh.elements[e].kind == ElementKind::tri3 ? 5 : 9);
    EXPECT_EQ(static_cast<int>(d.cells[e].size()), mesh.elements[e].size());
    EXPECT_EQ(d.cell_data.at("phase")[e], static_cast<int>(mesh.elements[e].phase));
  }
  EXPECT_EQ(d.point_data.at("u").size(), 3 * mesh.nodes.size());
  EXPECT_NEAR(d.point_data.at("u")[3 * 5 + 1], s.u[11], 1e-15);
  EXPECT_NEAR(d.point_data.at("phi")[9], s.phi[9], 1e-12);
  EXPECT_EQ(d.cell_data.at("damage"), s.damage);
}

TEST(Vtk, MismatchedSnapshotRejected) {
  const auto g = benchmark_geometry(1.0, 10.0, 10.0, 2.0, 0.6);
  const auto mesh = tag_phases(generate_structured_mesh(g, ElementKind::quad4), g);
  std::stringstream ss;
  EXPECT_THROW(write_vtk(ss, mesh, FieldSnapshot{}), Error);
  std::istringstream bad("# vtk DataFile Version 3.0\nx\nBINARY\n");
  EXPECT_THROW(read_vtk(bad), Error);
}

TEST(RunSummaryFile, RoundTrip) {
  RunSummary s;
  s.model = "HYBRID";
  s.steps = 160;
  s.newton_iterations = 1234;
  s.wall_time = 12.5;
  s.peak_reaction = 86.25;
  s.dissipated_energy = 1.75;
  s.fracture_energy = 1.5;
  s.first_failure_phase = "cie_interface";
  s.first_failure_step = 6;
  s.message = "complete fracture";
  std::stringstream ss;
  write_run_summary(ss, s);
  const auto b = read_run_summary(ss);
  EXPECT_EQ(b.model, s.model);
  EXPECT_EQ(b.steps, s.steps);
  EXPECT_EQ(b.newton_iterations, s.newton_iterations);
  EXPECT_EQ(b.peak_reaction, s.peak_reaction);
  EXPECT_EQ(b.first_failure_phase, s.first_failure_phase);
  EXPECT_EQ(b.first_failure_step, 6);
  EXPECT_EQ(b.message, s.message);
  EXPECT_EQ(snapshot_name(42), "snapshot_000042.vtk");
}

TEST(Svg, PlotContainsOnePathPerSeries) {
  PlotSeries a{"lc 0.8", {0, 1, 2}, {0, 5, 3}}, b{"lc 1.1", {0, 1, 2}, {0, 4, 2}};
  std::stringstream ss;
  write_svg_plot(ss, {a, b}, "displacement [mm]", "reaction force [N]");
  const auto s = ss.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  std::size_t count = 0;
  for (auto p = s.find("stroke-width=\"1.5\""); p != std::string::npos; p = s.find("stroke-width=\"1.5\"", p + 1)) ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_NE(s.find("lc 1.1"), std::string::npos);
}

TEST(Config, ParsesSectionsAndResolvesRelativePaths) {
  const auto rc = parse(kSmallConfig, "/tmp/cfgdir");
  EXPECT_EQ(rc.model, ModelKind::CPFM);
  EXPECT_EQ(rc.solver.lc, 1.0);
  EXPECT_EQ(rc.geometry.width, 10.0);
  EXPECT_EQ(rc.geometry.inclusions.at(0).rx, 2.0);
  EXPECT_EQ(rc.solver.num_steps(), 10);
  EXPECT_EQ(rc.solver.snapshot_interval, 5);
  EXPECT_EQ(fs::path(rc.output_dir), fs::path("/tmp/cfgdir/out"));
}

TEST(Config, MaterialOverridesApplyAfterThePreset) {
  const auto rc = parse(std::string(kSmallConfig) +
                        "\n[materials]\ninterface_preset = interface3\n[materials.interface]\nsigma_u = 5.5\n");
  EXPECT_EQ(rc.tables.bulk_props(Phase::interface).Gc, 0.4);
  EXPECT_EQ(rc.tables.bulk_props(Phase::interface).sigma_u, 5.5);
  EXPECT_EQ(rc.tables.cohesive_law(Phase::cie_interface).G_I, 0.4);
}

TEST(Config, CohesiveModelDefaultsToExplicitTriangles) {
  const auto rc = parse("[model]\ntype = CZM\n[output]\ndirectory = o\n");
  EXPECT_EQ(rc.solver.mode, SolverConfig::Mode::explicit_dynamic);
  EXPECT_EQ(rc.element, ElementKind::tri3);
  EXPECT_EQ(rc.solver.step_increment, 5e-5);
  EXPECT_THROW(parse("[model]\ntype = CZM\n[geometry]\nelement = quad4\n[output]\ndirectory = o\n"), ConfigError);
}

TEST(Config, ErrorsAreReported) {
  EXPECT_THROW(parse("[output]\ndirectory = o\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ntype = CPFM\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ntype = XYZ\n[output]\ndirectory = o\n"), ConfigError);
  EXPECT_THROW(parse(std::string(kSmallConfig) + "\n[solver2]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ntype = CPFM\nlcc = 1\n[output]\ndirectory = o\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ntype = CPFM\nlc = abc\n[output]\ndirectory = o\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ntype = CPFM\nlc = -1\n[output]\ndirectory = o\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ntype = CPFM\n[materials]\ninterface_preset = interface9\n[output]\ndirectory = o\n"),
               Error);
  EXPECT_THROW(parse("[model]\ntype = CPFM\n[materials.concrete]\nE = 1\n[output]\ndirectory = o\n"), Error);
}

TEST(Config, SweepValuesChangeOneParameter) {
  const auto base = parse(kSmallConfig);
  EXPECT_EQ(with_sweep_value(base, SweepParameter::lc, "0.8").solver.lc, 0.8);
  EXPECT_EQ(with_sweep_value(base, SweepParameter::mesh_size, "0.25").geometry.element_size, 0.25);
  EXPECT_EQ(with_sweep_value(base, SweepParameter::interface_preset, "interface1").tables.bulk_props(Phase::interface).Gc,
            0.008);
  EXPECT_THROW(with_sweep_value(base, SweepParameter::lc, "0.8x"), ConfigError);
  EXPECT_THROW(parse_sweep_parameter("density"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(fs::path(MPFRAC_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_run_config(entry.path().string())) << entry.path();
  }
}

TEST(Cli, GenerateWritesATaggedMesh) {
  const auto dir = scratch("generate");
  ASSERT_EQ(cli("generate --source benchmark --element quad4 --edge 0.3 --mesh-out " + (dir / "m.txt").string()), 0);
  const auto m = load_mesh((dir / "m.txt").string());
  for (const char* set : {"matrix", "inclusion", "interface"}) EXPECT_FALSE(m.element_sets.at(set).empty()) << set;
}

TEST(Cli, RandomGeometryIsDeterministicForASeed) {
  const auto dir = scratch("random");
  const std::string common = "generate --source random --seed 7 --fraction 0.2 --edge 0.5 --geometry-out ";
  ASSERT_EQ(cli(common + (dir / "a.txt").string() + " --mesh-out " + (dir / "ma.txt").string()), 0);
  ASSERT_EQ(cli(common + (dir / "b.txt").string() + " --mesh-out " + (dir / "mb.txt").string()), 0);
  EXPECT_EQ(slurp(dir / "a.txt"), slurp(dir / "b.txt"));
  EXPECT_EQ(slurp(dir / "ma.txt"), slurp(dir / "mb.txt"));
  EXPECT_FALSE(slurp(dir / "a.txt").empty());
}

TEST(Cli, BadInputsExitWithConfigurationError) {
  const auto dir = scratch("bad");
  EXPECT_EQ(cli("generate --source random --fraction 0.9 --geometry-out " + (dir / "g.txt").string()), 2);
  EXPECT_EQ(cli("generate --source nowhere"), 2);
  EXPECT_EQ(cli("run " + (dir / "missing.ini").string()), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  std::ofstream(dir / "bad.ini") << "[model]\ntype = CPFM\nbogus = 1\n[output]\ndirectory = out\n";
  EXPECT_EQ(cli("run " + (dir / "bad.ini").string()), 2);
}

TEST(Cli, RunWritesCurveSnapshotsAndSummary) {
  const auto dir = scratch("run");
  std::ofstream(dir / "small.ini") << kSmallConfig;
  ASSERT_EQ(cli("run -q " + (dir / "small.ini").string()), 0);
  const auto out = dir / "out";
  const auto curve = load_curve_csv((out / "curve.csv").string());
  EXPECT_EQ(curve.size(), 11u);
  EXPECT_TRUE(fs::exists(out / snapshot_name(5)));
  EXPECT_TRUE(fs::exists(out / snapshot_name(10)));
  EXPECT_TRUE(fs::exists(out / "mesh.txt"));
  EXPECT_FALSE(fs::exists(out / "FAILED"));
  std::ifstream sum(out / "run_summary.txt");
  const auto s = read_run_summary(sum);
  EXPECT_EQ(s.model, "CPFM");
  EXPECT_EQ(s.steps, 10);
}

TEST(Cli, SolverFailureExitsWithThreeAndLeavesAMarker) {
  const auto dir = scratch("fail");
  std::ofstream(dir / "f.ini") << "[model]\ntype = CPFM\n[geometry]\nwidth = 10\nheight = 10\nradius = 2\n"
                               << "element_size = 0.5\n[solver]\ntotal_displacement = 0.03\nstep_increment = 0.0333333333333\n"
                               << "newton_max_iter = 1\nnewton_tol = 1e-15\nmax_halvings = 1\n"
                               << "[output]\ndirectory = out\n";
  EXPECT_EQ(cli("run -q " + (dir / "f.ini").string()), 3);
  EXPECT_TRUE(fs::exists(dir / "out" / "FAILED"));
}

TEST(Cli, SweepAndPostProduceSummariesAndPlot) {
  const auto dir = scratch("sweep");
  std::ofstream(dir / "small.ini") << kSmallConfig;
  ASSERT_EQ(cli("sweep " + (dir / "small.ini").string() + " --parameter lc --values 0.8 1.2"), 0);
  const auto out = dir / "out";
  const auto summary = slurp(out / "sweep_summary.csv");
  EXPECT_NE(summary.find("lc,0.8,ok"), std::string::npos) << summary;
  EXPECT_NE(summary.find("lc,1.2,ok"), std::string::npos) << summary;
  EXPECT_TRUE(fs::exists(out / "lc_0.8" / "curve.csv"));
  ASSERT_EQ(cli("post " + (out / "lc_0.8" / "curve.csv").string() + " " + (out / "lc_1.2" / "curve.csv").string() +
                " -o " + (dir / "plot.svg").string()),
            0);
  EXPECT_NE(slurp(dir / "plot.svg").find("stroke-width=\"1.5\""), std::string::npos);
}

TEST(Cli, InsertCohesiveElements) {
  const auto dir = scratch("insert");
  ASSERT_EQ(cli("generate --source benchmark --element tri3 --edge 1.0 --mesh-out " + (dir / "m.txt").string()), 0);
  ASSERT_EQ(cli("insert-cie " + (dir / "m.txt").string() + " -o " + (dir / "c.txt").string() + " --mode all_facets"),
            0);
  const auto m = load_mesh((dir / "c.txt").string());
  EXPECT_GT(m.num_cie(), m.num_bulk());
  EXPECT_EQ(cli("insert-cie " + (dir / "m.txt").string() + " -o " + (dir / "d.txt").string() + " --mode sideways"), 2);
}
