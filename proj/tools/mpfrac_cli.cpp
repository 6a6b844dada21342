// Command-line front end: generate, insert-cie, run, sweep, post.
// Exit codes: 0 success, 2 configuration/input error, 3 solver failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mpfrac/mpfrac.hpp"

namespace fs = std::filesystem;
using namespace mpfrac;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

struct GenerateArgs {
  std::string source = "benchmark";
  std::string layout = "single";
  std::string geometry_in;
  std::string element = "quad4";
  double h = 0.3;
  MicrostructureSpec random;
  std::string shape = "circle";
  std::string geometry_out;
  std::string mesh_out;
  std::string cie_mode;
};

int cmd_generate(const GenerateArgs& a) {
  GeometrySpec g;
  if (a.source == "benchmark") {
    g = benchmark_geometry(a.h);
  } else if (a.source == "layout") {
    g = fixed_layout(a.layout, a.h);
  } else if (a.source == "random") {
    MicrostructureSpec m = a.random;
    m.shape = parse_shape(a.shape);
    m.element_size = a.h;
    g = place_inclusions(m);
  } else if (a.source == "file") {
    g = load_geometry(a.geometry_in);
    g.element_size = a.h;
  } else {
    throw ConfigError("--source must be benchmark, layout, random or file");
  }
  g.validate();
  if (!a.geometry_out.empty()) save_geometry(a.geometry_out, g);
  Mesh m = tag_phases(generate_structured_mesh(g, parse_element_kind(a.element)), g);
  const auto rep = validate_interface_resolution(m, g);
  std::cout << "inclusions " << g.inclusions.size() << ", inclusion area fraction "
            << g.inclusion_area() / (g.width * g.height) << '\n';
  std::cout << "nodes " << m.nodes.size() << ", elements " << m.elements.size() << '\n';
  for (const char* name : {"matrix", "inclusion", "interface"}) {
    auto it = m.element_sets.find(name);
    std::cout << "  " << name << ' ' << (it == m.element_sets.end() ? 0 : it->second.size()) << '\n';
  }
  std::cout << "interface resolution: min " << rep.min_count << " elements across the band ("
            << (rep.pass ? "pass" : "FAIL: fewer than 4") << ")\n";
  if (!a.cie_mode.empty()) {
    const auto mode = parse_cie_mode(a.cie_mode);
    if (mode == CieMode::interface_boundary_only) m = absorb_interface_band(std::move(m));
    m = insert_cohesive_elements(m, mode);
    std::cout << "cohesive elements " << m.num_cie() << '\n';
  }
  if (!a.mesh_out.empty()) save_mesh(a.mesh_out, m);
  return 0;
}

int cmd_insert(const std::string& in, const std::string& out, const std::string& mode_name, bool absorb) {
  Mesh m = load_mesh(in);
  const auto mode = parse_cie_mode(mode_name);
  if (absorb) m = absorb_interface_band(std::move(m));
  const std::size_t bulk = m.num_bulk();
  m = insert_cohesive_elements(m, mode);
  std::cout << "bulk " << bulk << ", cohesive " << m.num_cie() << ", nodes " << m.nodes.size() << '\n';
  save_mesh(out, m);
  return 0;
}

int cmd_run(const std::string& config_path, bool quiet) {
  const RunConfig rc = load_run_config(config_path);
  const fs::path dir = rc.output_dir;
  fs::create_directories(dir);
  Mesh mesh;
  try {
    mesh = prepare_model_mesh(rc, build_bulk_mesh(rc));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  save_mesh((dir / "mesh.txt").string(), mesh);
  SimulationResult r;
  try {
    r = run_model(rc, mesh, [&](int step, double u) {
      if (!quiet && step % 20 == 0) std::cerr << "step " << step << "  u = " << u << " mm\n";
    });
  } catch (const SolverError& e) {
    write_failure_marker(dir, e.what());
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  write_run_outputs(dir, mesh, r, rc.model);
  const auto s = summarize(r, rc.model);
  std::cout << "steps " << s.steps << ", Newton iterations " << s.newton_iterations << ", peak reaction "
            << s.peak_reaction << " N, dissipated " << s.dissipated_energy << " N*mm, wall " << s.wall_time << " s\n";
  if (r.aborted) {
    std::cerr << "run aborted: " << r.message << '\n';
    return kSolverFailure;
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& parameter, const std::vector<std::string>& values) {
  const RunConfig base = load_run_config(config_path);
  const auto p = parse_sweep_parameter(parameter);
  if (values.empty()) throw ConfigError("sweep: empty value list");
  const fs::path dir = base.output_dir;
  fs::create_directories(dir);
  const auto rows = run_sweep(base, p, values, [&](const RunConfig& rc, const Mesh& mesh, const SweepRow& row) {
    write_run_outputs(dir / (parameter + "_" + row.value), mesh, row.result, rc.model);
    std::cerr << parameter << " = " << row.value << ": peak " << row.peak_reaction << " N\n";
  });
  std::ofstream sum(dir / "sweep_summary.csv");
  sum << std::setprecision(12) << "parameter,value,status,peak_reaction_N,dissipated_energy_Nmm,total_iterations\n";
  std::ofstream curves(dir / "sweep_curves.csv");
  curves << std::setprecision(12) << "value,step,u_applied_mm,reaction_sum_N\n";
  bool all_ok = true;
  for (const auto& r : rows) {
    all_ok = all_ok && r.ok;
    sum << parameter << ',' << r.value << ',' << (r.ok ? "ok" : "failed") << ',' << r.peak_reaction << ','
        << r.dissipated_energy << ',' << r.total_iterations << '\n';
    for (const auto& c : r.result.curve)
      curves << r.value << ',' << c.step << ',' << c.u_applied << ',' << c.reaction_sum << '\n';
    std::cout << parameter << ' ' << r.value << ' ' << (r.ok ? "ok" : "failed") << " peak " << r.peak_reaction
              << " dissipated " << r.dissipated_energy << " iterations " << r.total_iterations
              << (r.ok ? "" : " (" + r.message + ")") << '\n';
  }
  return all_ok ? 0 : kSolverFailure;
}

int cmd_post(const std::vector<std::string>& curves, const std::string& out) {
  std::vector<PlotSeries> series;
  for (const auto& path : curves) {
    const auto c = load_curve_csv(path);
    PlotSeries s;
    s.label = fs::path(path).parent_path().filename().string();
    if (s.label.empty()) s.label = path;
    for (const auto& r : c) {
      s.x.push_back(r.u_applied);
      s.y.push_back(r.reaction_sum);
    }
    series.push_back(std::move(s));
  }
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot write '" + out + "'");
  write_svg_plot(os, series, "displacement [mm]", "reaction force [N]");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mpfrac: phase-field and cohesive fracture of particulate composites"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write geometry and mesh files");
  g->add_option("--source", gen.source, "benchmark | layout | random | file")->capture_default_str();
  g->add_option("--layout", gen.layout, "single | two_ellipses_a | two_ellipses_b | four_ellipses");
  g->add_option("--geometry", gen.geometry_in, "input geometry file (source = file)");
  g->add_option("--element", gen.element, "quad4 | tri3")->capture_default_str();
  g->add_option("--edge", gen.h, "element edge length [mm]")->capture_default_str();
  g->add_option("--seed", gen.random.seed, "random layout seed");
  g->add_option("--fraction", gen.random.fraction, "inclusion area fraction");
  g->add_option("--shape", gen.shape, "circle | ellipse | polygon");
  g->add_option("--width", gen.random.width);
  g->add_option("--height", gen.random.height);
  g->add_option("--size-min", gen.random.size_min);
  g->add_option("--size-max", gen.random.size_max);
  g->add_option("--interface", gen.random.interface_thickness, "interface ring thickness [mm]");
  g->add_option("--gap", gen.random.min_gap, "minimum gap between rings [mm]");
  g->add_option("--geometry-out", gen.geometry_out, "geometry output file");
  g->add_option("--mesh-out", gen.mesh_out, "mesh output file");
  g->add_option("--cie", gen.cie_mode, "also insert cohesive elements: all_facets | interface_boundary_only");

  std::string ins_in, ins_out, ins_mode = "all_facets";
  bool ins_absorb = false;
  auto* ins = app.add_subcommand("insert-cie", "insert zero-thickness cohesive elements into a mesh file");
  ins->add_option("mesh", ins_in)->required();
  ins->add_option("-o,--out", ins_out)->required();
  ins->add_option("--mode", ins_mode, "all_facets | interface_boundary_only")->capture_default_str();
  ins->add_flag("--absorb-band", ins_absorb, "retag interface-band elements as matrix first");

  std::string run_cfg;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run a simulation from a config file");
  run->add_option("config", run_cfg)->required();
  run->add_flag("-q,--quiet", quiet);

  std::string sw_cfg, sw_param;
  std::vector<std::string> sw_values;
  auto* sw = app.add_subcommand("sweep", "run a config over a list of parameter values");
  sw->add_option("config", sw_cfg)->required();
  sw->add_option("--parameter", sw_param, "lc | mesh_size | interface_preset")->required();
  sw->add_option("--values", sw_values, "values to run")->required()->expected(1, -1);

  std::vector<std::string> post_curves;
  std::string post_out = "curves.svg";
  auto* post = app.add_subcommand("post", "plot reaction-displacement curves to SVG");
  post->add_option("curves", post_curves, "curve.csv files")->required()->expected(1, -1);
  post->add_option("-o,--out", post_out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*ins) return cmd_insert(ins_in, ins_out, ins_mode, ins_absorb);
    if (*run) return cmd_run(run_cfg, quiet);
    if (*sw) return cmd_sweep(sw_cfg, sw_param, sw_values);
    if (*post) return cmd_post(post_curves, post_out);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
