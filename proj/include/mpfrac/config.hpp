#pragma once

// Run configuration: INI-style sections parsed with Boost.PropertyTree, model
// assembly (geometry -> mesh -> cohesive insertion) and run dispatch.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "mpfrac/geometry.hpp"
#include "mpfrac/materials.hpp"
#include "mpfrac/mesh.hpp"
#include "mpfrac/microstructure.hpp"
#include "mpfrac/solver.hpp"

namespace mpfrac {

struct RunConfig {
  ModelKind model = ModelKind::CPFM;
  FractureModel fracture;

  // geometry
  std::string geometry_source = "benchmark";  // benchmark | file | layout | random
  GeometrySpec geometry = benchmark_geometry();
  std::string geometry_file;
  std::string layout;
  MicrostructureSpec random;
  std::string mesh_file;  // optional prebuilt bulk mesh (phases tagged)
  ElementKind element = ElementKind::quad4;

  std::string interface_preset = "interface2";
  PropertyTables tables = default_property_tables();
  SolverConfig solver;

  std::string output_dir;

  void validate() const {
    fracture.validate();
    solver.validate();
    tables.validate();
    geometry.validate();
    if (model == ModelKind::CZM && element != ElementKind::tri3)
      throw ConfigError("model CZM requires tri3 elements (cohesive elements on all facets)");
    if (model == ModelKind::CZM && solver.mode != SolverConfig::Mode::explicit_dynamic)
      throw ConfigError("model CZM runs with the explicit solver");
    if (model != ModelKind::CZM && solver.mode != SolverConfig::Mode::staggered_implicit)
      throw ConfigError("phase-field and hybrid models run with the staggered implicit solver");
  }
};

namespace detail {

using boost::property_tree::ptree;

// Reads the keys of one section into typed targets; unknown keys are errors.
class SectionReader {
 public:
  SectionReader(const ptree& section, std::string name) : section_(section), name_(std::move(name)) {}

  template <class T>
  SectionReader& opt(const std::string& key, T& target) {
    known_.insert(key);
    if (auto v = section_.get_optional<std::string>(key)) target = convert<T>(key, *v);
    return *this;
  }

  template <class T>
  SectionReader& req(const std::string& key, T& target) {
    if (!section_.get_optional<std::string>(key)) throw ConfigError("missing key '" + name_ + "." + key + "'");
    return opt(key, target);
  }

  bool has(const std::string& key) const { return section_.get_optional<std::string>(key).has_value(); }

  void finish() const {
    for (const auto& [k, v] : section_)
      if (!known_.count(k)) throw ConfigError("unknown key '" + name_ + "." + k + "'");
  }

 private:
  template <class T>
  T convert(const std::string& key, const std::string& raw) const {
    if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "1" || raw == "yes") return true;
      if (raw == "false" || raw == "0" || raw == "no") return false;
      throw ConfigError("key '" + name_ + "." + key + "': expected a boolean, got '" + raw + "'");
    } else {
      std::istringstream is(raw);
      T v{};
      is >> v;
      if (is.fail() || !(is >> std::ws).eof())
        throw ConfigError("key '" + name_ + "." + key + "': cannot parse '" + raw + "'");
      return v;
    }
  }

  const ptree& section_;
  std::string name_;
  std::set<std::string> known_;
};

inline Phase bulk_phase_for(const std::string& name) {
  if (name == "matrix") return Phase::matrix;
  if (name == "inclusion") return Phase::inclusion;
  if (name == "interface") return Phase::interface;
  throw ConfigError("unknown material section 'materials." + name + "'");
}

inline Phase cohesive_phase_for(const std::string& name) {
  if (name == "matrix") return Phase::cie_matrix;
  if (name == "inclusion") return Phase::cie_inclusion;
  if (name == "interface") return Phase::cie_interface;
  throw ConfigError("unknown cohesive section 'cohesive." + name + "'");
}

}  // namespace detail

/// Parses a run configuration. Relative file paths are resolved against
/// `base_dir`. Errors name the offending key.
inline RunConfig parse_run_config(std::istream& is, const std::filesystem::path& base_dir = ".") {
  using detail::ptree;
  ptree root;
  try {
    boost::property_tree::read_ini(is, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  auto resolve = [&](const std::string& p) {
    return p.empty() ? p : (std::filesystem::path(p).is_absolute() ? p : (base_dir / p).string());
  };

  RunConfig rc;
  const ptree empty;
  auto section = [&](const std::string& name) -> const ptree& {
    // Section names contain dots, so look them up as literal keys.
    auto it = root.find(name);
    return it == root.not_found() ? empty : it->second;
  };
  for (const auto& [name, sec] : root) {
    static const std::set<std::string> fixed = {"model", "geometry", "materials", "solver", "output"};
    if (fixed.count(name)) continue;
    if (name.rfind("materials.", 0) == 0) {
      detail::bulk_phase_for(name.substr(10));
      continue;
    }
    if (name.rfind("cohesive.", 0) == 0) {
      detail::cohesive_phase_for(name.substr(9));
      continue;
    }
    if (sec.empty() && !sec.data().empty()) throw ConfigError("key '" + name + "' outside of any section");
    throw ConfigError("unknown section '" + name + "'");
  }
  if (root.find("model") == root.not_found()) throw ConfigError("missing section 'model'");
  if (root.find("output") == root.not_found()) throw ConfigError("missing section 'output'");

  // [model]
  {
    std::string type;
    detail::SectionReader r(section("model"), "model");
    r.req("type", type)
        .opt("lc", rc.solver.lc)
        .opt("k_residual", rc.fracture.k_residual)
        .opt("a2", rc.fracture.a2)
        .opt("a3", rc.fracture.a3);
    r.finish();
    rc.model = parse_model_kind(type);
    rc.fracture.scheme = bulk_scheme(rc.model);
  }
  if (rc.model == ModelKind::CZM) {
    rc.solver.mode = SolverConfig::Mode::explicit_dynamic;
    rc.solver.step_increment = 5e-5;
    rc.element = ElementKind::tri3;
  }

  // [geometry]
  {
    detail::SectionReader r(section("geometry"), "geometry");
    std::string element = std::string(to_string(rc.element));
    double h = 0.3;
    r.opt("source", rc.geometry_source).opt("element", element).opt("element_size", h).opt("mesh", rc.mesh_file);
    rc.element = parse_element_kind(element);
    if (rc.element == ElementKind::cie4) throw ConfigError("geometry.element must be quad4 or tri3");
    rc.mesh_file = resolve(rc.mesh_file);
    if (rc.geometry_source == "benchmark") {
      double W = 20.0, H = 20.0, radius = 4.0, t = 0.6;
      r.opt("width", W).opt("height", H).opt("radius", radius).opt("interface_thickness", t);
      rc.geometry = benchmark_geometry(h, W, H, radius, t);
    } else if (rc.geometry_source == "file") {
      r.req("path", rc.geometry_file);
      rc.geometry_file = resolve(rc.geometry_file);
      rc.geometry = load_geometry(rc.geometry_file);
      if (r.has("element_size")) rc.geometry.element_size = h;
    } else if (rc.geometry_source == "layout") {
      r.req("layout", rc.layout);
      rc.geometry = fixed_layout(rc.layout, h);
    } else if (rc.geometry_source == "random") {
      auto& m = rc.random;
      std::string shape = std::string(to_string(m.shape));
      r.opt("width", m.width)
          .opt("height", m.height)
          .opt("shape", shape)
          .opt("size_min", m.size_min)
          .opt("size_max", m.size_max)
          .opt("aspect_min", m.aspect_min)
          .opt("aspect_max", m.aspect_max)
          .opt("fraction", m.fraction)
          .opt("interface_thickness", m.interface_thickness)
          .opt("seed", m.seed)
          .opt("min_gap", m.min_gap);
      m.shape = parse_shape(shape);
      m.element_size = h;
      rc.geometry = place_inclusions(m);
    } else {
      throw ConfigError("geometry.source must be benchmark, file, layout or random (got '" + rc.geometry_source +
                        "')");
    }
    r.finish();
  }

  // [materials] and per-phase overrides (applied after the preset)
  {
    detail::SectionReader r(section("materials"), "materials");
    r.opt("interface_preset", rc.interface_preset);
    r.finish();
    apply_interface_preset(rc.tables, rc.interface_preset);
  }
  for (const char* name : {"matrix", "inclusion", "interface"}) {
    const std::string sname = std::string("materials.") + name;
    auto& p = rc.tables.bulk[detail::bulk_phase_for(name)];
    detail::SectionReader r(section(sname), sname);
    r.opt("E", p.E).opt("nu", p.nu).opt("Gc", p.Gc).opt("sigma_u", p.sigma_u);
    r.finish();
  }
  for (const char* name : {"matrix", "inclusion", "interface"}) {
    const std::string sname = std::string("cohesive.") + name;
    auto& l = rc.tables.cohesive[detail::cohesive_phase_for(name)];
    detail::SectionReader r(section(sname), sname);
    r.opt("K", l.K)
        .opt("sigma_n0", l.sigma_n0)
        .opt("sigma_s0", l.sigma_s0)
        .opt("G_I", l.G_I)
        .opt("G_II", l.G_II)
        .opt("eta", l.eta)
        .opt("elastic_only", l.elastic_only);
    r.finish();
  }

  // [solver]
  {
    auto& s = rc.solver;
    detail::SectionReader r(section("solver"), "solver");
    r.opt("total_displacement", s.total_displacement)
        .opt("total_time", s.total_time)
        .opt("step_increment", s.step_increment)
        .opt("newton_tol", s.newton_tol)
        .opt("newton_max_iter", s.newton_max_iter)
        .opt("passes_per_step", s.passes_per_step)
        .opt("max_halvings", s.max_halvings)
        .opt("thickness", s.thickness)
        .opt("density", s.density)
        .opt("mass_scaling", s.mass_scaling)
        .opt("dt_safety", s.dt_safety)
        .opt("bulk_viscosity", s.bulk_viscosity)
        .opt("record_interval", s.record_interval)
        .opt("stop_drop_fraction", s.stop_drop_fraction);
    r.finish();
  }

  // [output]
  {
    detail::SectionReader r(section("output"), "output");
    r.req("directory", rc.output_dir).opt("snapshot_interval", rc.solver.snapshot_interval);
    r.finish();
    rc.output_dir = resolve(rc.output_dir);
  }

  try {
    rc.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_run_config(in, std::filesystem::path(path).parent_path());
}

/// Bulk mesh for a configuration: the prebuilt mesh file if given, otherwise a
/// structured mesh tagged by phase.
inline Mesh build_bulk_mesh(const RunConfig& rc) {
  if (!rc.mesh_file.empty()) return load_mesh(rc.mesh_file);
  return tag_phases(generate_structured_mesh(rc.geometry, rc.element), rc.geometry);
}

/// Finishes the bulk mesh for the configured model: cohesive elements on all
/// facets (CZM) or on the inclusion boundaries with the band absorbed into the
/// matrix (HYBRID).
inline Mesh prepare_model_mesh(const RunConfig& rc, Mesh bulk) {
  if (bulk.num_cie() > 0) return bulk;
  switch (rc.model) {
    case ModelKind::CZM: return insert_cohesive_elements(bulk, CieMode::all_facets);
    case ModelKind::HYBRID:
      return insert_cohesive_elements(absorb_interface_band(std::move(bulk)), CieMode::interface_boundary_only);
    default: return bulk;
  }
}

/// Runs the configured model on a prepared mesh.
inline SimulationResult run_model(const RunConfig& rc, const Mesh& mesh,
                                  const std::function<void(int, double)>& progress = {}) {
  if (rc.model == ModelKind::CZM) {
    ExplicitSolver s(mesh, rc.tables, rc.solver);
    return s.run([&](const ExplicitSolver& x) {
      if (progress && !x.result().curve.empty()) progress(x.result().curve.back().step, x.result().curve.back().u_applied);
    });
  }
  StaggeredSolver s(mesh, rc.tables, rc.model, rc.fracture, rc.solver);
  return s.run([&](const StaggeredSolver& x) {
    if (progress) progress(x.step(), x.applied_displacement());
  });
}

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepParameter { lc, mesh_size, interface_preset };

inline SweepParameter parse_sweep_parameter(std::string_view s) {
  if (s == "lc") return SweepParameter::lc;
  if (s == "mesh_size") return SweepParameter::mesh_size;
  if (s == "interface_preset") return SweepParameter::interface_preset;
  throw ConfigError("sweep parameter must be lc, mesh_size or interface_preset (got '" + std::string(s) + "')");
}

/// Copy of `base` with one parameter changed.
inline RunConfig with_sweep_value(const RunConfig& base, SweepParameter p, const std::string& value) {
  RunConfig rc = base;
  auto number = [&] {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size()) throw ConfigError("sweep value '" + value + "' is not a number");
    return v;
  };
  switch (p) {
    case SweepParameter::lc: rc.solver.lc = number(); break;
    case SweepParameter::mesh_size:
      if (!rc.mesh_file.empty()) throw ConfigError("mesh_size sweeps need a generated mesh (drop geometry.mesh)");
      rc.geometry.element_size = number();
      break;
    case SweepParameter::interface_preset:
      rc.interface_preset = value;
      apply_interface_preset(rc.tables, value);
      break;
  }
  rc.validate();
  return rc;
}

struct SweepRow {
  std::string value;
  bool ok = false;
  double peak_reaction = 0.0;
  double dissipated_energy = 0.0;
  long total_iterations = 0;
  std::string message;
  SimulationResult result;
};

/// Runs every value in turn. A failing run is recorded and the sweep moves on.
inline std::vector<SweepRow> run_sweep(const RunConfig& base, SweepParameter p, const std::vector<std::string>& values,
                                       const std::function<void(const RunConfig&, const Mesh&,
                                                                const SweepRow&)>& on_done = {}) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  std::vector<SweepRow> rows;
  for (const auto& v : values) {
    SweepRow row;
    row.value = v;
    try {
      const RunConfig rc = with_sweep_value(base, p, v);
      const Mesh mesh = prepare_model_mesh(rc, build_bulk_mesh(rc));
      row.result = run_model(rc, mesh);
      row.ok = !row.result.aborted;
      row.peak_reaction = row.result.peak_reaction();
      row.dissipated_energy = dissipated_fracture_energy(row.result);
      row.total_iterations = row.result.total_iterations;
      row.message = row.result.message;
      if (on_done) on_done(rc, mesh, row);
    } catch (const Error& e) {
      row.ok = false;
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mpfrac
