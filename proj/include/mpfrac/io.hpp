#pragma once

// Result emission and re-reading: curve CSV, VTK legacy ASCII snapshots, run
// summary, failure marker, and SVG curve plots.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mpfrac/mesh.hpp"
#include "mpfrac/solver.hpp"

namespace mpfrac {

// ---------------------------------------------------------------------------
// curve.csv

inline const char* curve_header() {
  return "step,u_applied_mm,reaction_sum_N,reaction_avg_N,iterations,E_elastic,E_dissipated,E_kinetic,"
         "reaction_right_N,E_fracture";
}

inline void write_curve_csv(std::ostream& os, const std::vector<LoadStepRecord>& curve) {
  os << curve_header() << '\n' << std::setprecision(17);
  for (const auto& r : curve) {
    for (double v : {r.u_applied, r.reaction_sum, r.reaction_avg, double(r.iterations), r.E_elastic, r.E_dissipated,
                     r.E_kinetic, r.reaction_right, r.E_fracture})
      if (!std::isfinite(v)) throw Error("curve record " + std::to_string(r.step) + " holds a non-finite value");
    // adding 0.0 prints negative zero as 0
    os << r.step << ',' << r.u_applied + 0.0 << ',' << r.reaction_sum + 0.0 << ',' << r.reaction_avg + 0.0 << ','
       << r.iterations << ',' << r.E_elastic + 0.0 << ',' << r.E_dissipated + 0.0 << ',' << r.E_kinetic + 0.0 << ','
       << r.reaction_right + 0.0 << ',' << r.E_fracture + 0.0 << '\n';
  }
}

inline std::vector<LoadStepRecord> read_curve_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != curve_header()) throw Error("curve.csv: unexpected header");
  std::vector<LoadStepRecord> curve;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    LoadStepRecord r;
    ls >> r.step >> r.u_applied >> r.reaction_sum >> r.reaction_avg >> r.iterations >> r.E_elastic >>
        r.E_dissipated >> r.E_kinetic >> r.reaction_right >> r.E_fracture;
    if (ls.fail()) throw Error("curve.csv: malformed row '" + line + "'");
    curve.push_back(r);
  }
  return curve;
}

inline void save_curve_csv(const std::string& path, const std::vector<LoadStepRecord>& curve) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  write_curve_csv(os, curve);
}

inline std::vector<LoadStepRecord> load_curve_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_curve_csv(is);
}

// ---------------------------------------------------------------------------
// VTK legacy ASCII snapshots

inline int vtk_cell_type(ElementKind k) { return k == ElementKind::tri3 ? 5 : 9; }

inline void write_vtk(std::ostream& os, const Mesh& m, const FieldSnapshot& s) {
  const std::size_t nn = m.nodes.size(), ne = m.elements.size();
  if (s.u.size() != 2 * nn || s.phi.size() != nn || s.von_mises.size() != ne || s.damage.size() != ne)
    throw Error("snapshot does not match the mesh");
  os << std::setprecision(12);
  os << "# vtk DataFile Version 3.0\n";
  os << "mpfrac step " << s.step << " u_applied " << s.u_applied << '\n';
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nn << " double\n";
  for (const auto& n : m.nodes) os << n.x << ' ' << n.y << " 0\n";
  std::size_t total = 0;
  for (const auto& el : m.elements) total += 1 + el.size();
  os << "CELLS " << ne << ' ' << total << '\n';
  for (const auto& el : m.elements) {
    os << el.size();
    for (int k = 0; k < el.size(); ++k) os << ' ' << el.nodes[k];
    os << '\n';
  }
  os << "CELL_TYPES " << ne << '\n';
  for (const auto& el : m.elements) os << vtk_cell_type(el.kind) << '\n';
  os << "POINT_DATA " << nn << '\n';
  os << "VECTORS u double\n";
  for (std::size_t i = 0; i < nn; ++i) os << s.u[2 * i] << ' ' << s.u[2 * i + 1] << " 0\n";
  os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (double v : s.phi) os << v << '\n';
  os << "CELL_DATA " << ne << '\n';
  os << "SCALARS phase int 1\nLOOKUP_TABLE default\n";
  for (const auto& el : m.elements) os << static_cast<int>(el.phase) << '\n';
  os << "SCALARS von_mises double 1\nLOOKUP_TABLE default\n";
  for (double v : s.von_mises) os << v << '\n';
  os << "SCALARS damage double 1\nLOOKUP_TABLE default\n";
  for (double v : s.damage) os << v << '\n';
}

/// Parsed content of a snapshot file (geometry plus named data arrays).
struct VtkData {
  std::vector<Vec2> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_types;
  std::map<std::string, std::vector<double>> point_data;  // vectors flattened (3 per point)
  std::map<std::string, std::vector<double>> cell_data;
};

inline VtkData read_vtk(std::istream& is) {
  auto fail = [](const std::string& what) { throw Error("vtk: " + what); };
  std::string line;
  if (!std::getline(is, line) || line.rfind("# vtk DataFile Version 3.0", 0) != 0) fail("bad header");
  std::getline(is, line);  // title
  std::string word;
  if (!(is >> word) || word != "ASCII") fail("expected ASCII");
  if (!(is >> word >> line) || word != "DATASET" || line != "UNSTRUCTURED_GRID") fail("expected UNSTRUCTURED_GRID");
  VtkData d;
  std::size_t n = 0, total = 0;
  if (!(is >> word >> n >> line) || word != "POINTS") fail("expected POINTS");
  d.points.resize(n);
  for (auto& p : d.points) {
    double z;
    is >> p.x() >> p.y() >> z;
  }
  if (!(is >> word >> n >> total) || word != "CELLS") fail("expected CELLS");
  d.cells.resize(n);
  for (auto& c : d.cells) {
    int k;
    is >> k;
    c.resize(k);
    for (int& v : c) is >> v;
  }
  if (!(is >> word >> n) || word != "CELL_TYPES") fail("expected CELL_TYPES");
  d.cell_types.resize(n);
  for (int& t : d.cell_types) is >> t;
  std::map<std::string, std::vector<double>>* target = nullptr;
  std::size_t count = 0;
  while (is >> word) {
    if (word == "POINT_DATA" || word == "CELL_DATA") {
      is >> count;
      target = word == "POINT_DATA" ? &d.point_data : &d.cell_data;
      continue;
    }
    if (!target) fail("data before POINT_DATA/CELL_DATA");
    std::string name, type;
    int comps = 1;
    if (word == "VECTORS") {
      is >> name >> type;
      comps = 3;
    } else if (word == "SCALARS") {
      is >> name >> type >> comps;
      std::string lt, tab;
      is >> lt >> tab;
      if (lt != "LOOKUP_TABLE") fail("expected LOOKUP_TABLE");
    } else {
      fail("unexpected keyword '" + word + "'");
    }
    auto& v = (*target)[name];
    v.resize(count * comps);
    for (double& x : v) is >> x;
    if (is.fail()) fail("truncated array '" + name + "'");
  }
  return d;
}

// ---------------------------------------------------------------------------
// Run directory helpers

struct RunSummary {
  std::string model;
  int steps = 0;
  long newton_iterations = 0;
  double wall_time = 0.0;
  double peak_reaction = 0.0;
  double dissipated_energy = 0.0;
  double fracture_energy = 0.0;
  double max_kinetic_ratio = 0.0;
  bool complete_fracture = false;
  bool aborted = false;
  std::string first_failure_phase;
  int first_failure_step = -1;
  std::string message;
};

inline RunSummary summarize(const SimulationResult& r, ModelKind model) {
  RunSummary s;
  s.model = std::string(to_string(model));
  s.steps = r.curve.empty() ? 0 : r.curve.back().step;
  s.newton_iterations = r.total_iterations;
  s.wall_time = r.wall_time;
  s.peak_reaction = r.peak_reaction();
  s.dissipated_energy = dissipated_fracture_energy(r);
  s.fracture_energy = r.curve.empty() ? 0.0 : r.curve.back().E_fracture;
  s.max_kinetic_ratio = r.max_kinetic_ratio;
  s.complete_fracture = r.complete_fracture;
  s.aborted = r.aborted;
  if (r.first_failure) {
    s.first_failure_phase = std::string(to_string(r.first_failure->phase));
    s.first_failure_step = r.first_failure->step;
  }
  s.message = r.message;
  return s;
}

inline void write_run_summary(std::ostream& os, const RunSummary& s) {
  os << std::setprecision(12);
  os << "model = " << s.model << '\n';
  os << "steps = " << s.steps << '\n';
  os << "newton_iterations = " << s.newton_iterations << '\n';
  os << "wall_time_s = " << s.wall_time << '\n';
  os << "peak_reaction_N = " << s.peak_reaction << '\n';
  os << "dissipated_energy_Nmm = " << s.dissipated_energy << '\n';
  os << "fracture_energy_Nmm = " << s.fracture_energy << '\n';
  os << "max_kinetic_ratio = " << s.max_kinetic_ratio << '\n';
  os << "complete_fracture = " << (s.complete_fracture ? 1 : 0) << '\n';
  os << "aborted = " << (s.aborted ? 1 : 0) << '\n';
  os << "first_failure_phase = " << (s.first_failure_phase.empty() ? "none" : s.first_failure_phase) << '\n';
  os << "first_failure_step = " << s.first_failure_step << '\n';
  os << "message = " << s.message << '\n';
}

inline RunSummary read_run_summary(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw Error("run_summary: missing '" + k + "'");
    return it->second;
  };
  RunSummary s;
  s.model = get("model");
  s.steps = std::stoi(get("steps"));
  s.newton_iterations = std::stol(get("newton_iterations"));
  s.wall_time = std::stod(get("wall_time_s"));
  s.peak_reaction = std::stod(get("peak_reaction_N"));
  s.dissipated_energy = std::stod(get("dissipated_energy_Nmm"));
  s.fracture_energy = std::stod(get("fracture_energy_Nmm"));
  s.max_kinetic_ratio = std::stod(get("max_kinetic_ratio"));
  s.complete_fracture = get("complete_fracture") == "1";
  s.aborted = get("aborted") == "1";
  s.first_failure_phase = get("first_failure_phase");
  if (s.first_failure_phase == "none") s.first_failure_phase.clear();
  s.first_failure_step = std::stoi(get("first_failure_step"));
  s.message = get("message");
  return s;
}

inline std::string snapshot_name(int step) {
  std::ostringstream os;
  os << "snapshot_" << std::setw(6) << std::setfill('0') << step << ".vtk";
  return os.str();
}

/// Writes curve.csv, one VTK file per snapshot, run_summary.txt and, for
/// aborted runs, a FAILED marker holding the diagnostic message.
inline void write_run_outputs(const std::filesystem::path& dir, const Mesh& mesh, const SimulationResult& r,
                              ModelKind model) {
  std::filesystem::create_directories(dir);
  save_curve_csv((dir / "curve.csv").string(), r.curve);
  for (const auto& s : r.snapshots) {
    std::ofstream os(dir / snapshot_name(s.step));
    write_vtk(os, mesh, s);
  }
  {
    std::ofstream os(dir / "run_summary.txt");
    write_run_summary(os, summarize(r, model));
  }
  const auto marker = dir / "FAILED";
  if (r.aborted) {
    std::ofstream os(marker);
    os << r.message << '\n';
  } else {
    std::filesystem::remove(marker);
  }
}

inline void write_failure_marker(const std::filesystem::path& dir, const std::string& message) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / "FAILED");
  os << message << '\n';
}

// ---------------------------------------------------------------------------
// SVG reaction-displacement plot

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

inline void write_svg_plot(std::ostream& os, const std::vector<PlotSeries>& series, const std::string& xlabel,
                           const std::string& ylabel) {
  const double W = 640, H = 420, L = 70, R = 20, T = 20, B = 50;
  double xmax = 0.0, ymin = 0.0, ymax = 0.0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmax = std::max(xmax, s.x[i]);
      ymax = std::max(ymax, s.y[i]);
      ymin = std::min(ymin, s.y[i]);
    }
  if (xmax <= 0.0) xmax = 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  auto py = [&](double y) { return H - B - (H - T - B) * (y - ymin) / (ymax - ymin); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<path d=\"M" << L << ' ' << T << " V" << H - B << " H" << W - R << "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmax * k / 4, yv = ymin + (ymax - ymin) * k / 4;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"middle\">" << xv
       << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << yv
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">"
     << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 6];
    os << "<path fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" d=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " L" : "M") << px(s.x[i]) << ' ' << py(s.y[i]);
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << c << "\">"
       << s.label << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace mpfrac
