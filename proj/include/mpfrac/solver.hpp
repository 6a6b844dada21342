#pragma once

// Simulation drivers: staggered implicit solver for phase-field and hybrid
// runs, central-difference explicit solver for cohesive-zone runs, boundary
// conditions, reactions and energy bookkeeping.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mpfrac/cohesive.hpp"
#include "mpfrac/linalg.hpp"
#include "mpfrac/materials.hpp"
#include "mpfrac/mesh.hpp"
#include "mpfrac/phasefield.hpp"

namespace mpfrac {

enum class ModelKind { AT1, AT2, CPFM, CZM, HYBRID };

inline std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::AT1: return "AT1";
    case ModelKind::AT2: return "AT2";
    case ModelKind::CPFM: return "CPFM";
    case ModelKind::CZM: return "CZM";
    case ModelKind::HYBRID: return "HYBRID";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "AT1") return ModelKind::AT1;
  if (s == "AT2") return ModelKind::AT2;
  if (s == "CPFM") return ModelKind::CPFM;
  if (s == "CZM") return ModelKind::CZM;
  if (s == "HYBRID") return ModelKind::HYBRID;
  throw ConfigError("unknown model '" + std::string(s) + "' (expected AT1, AT2, CPFM, CZM or HYBRID)");
}

/// Bulk phase-field scheme used by a model kind (HYBRID runs CPFM in the bulk).
inline Scheme bulk_scheme(ModelKind m) {
  switch (m) {
    case ModelKind::AT1: return Scheme::AT1;
    case ModelKind::AT2: return Scheme::AT2;
    default: return Scheme::CPFM;
  }
}

struct SolverConfig {
  enum class Mode { staggered_implicit, explicit_dynamic };
  Mode mode = Mode::staggered_implicit;
  double lc = 1.0;                   // mm
  double total_displacement = 0.05;  // mm
  double total_time = 1.0;           // pseudo-time, s
  double step_increment = 5e-3;      // s (5e-5 for explicit runs)
  double newton_tol = 1e-6;
  int newton_max_iter = 50;
  int passes_per_step = 1;
  int max_halvings = 4;
  double thickness = 1.0;            // mm
  // explicit only
  double density = 2.4e-9;           // tonne/mm^3
  double mass_scaling = 0.0;         // 0: automatic (smallest factor making the step stable)
  double dt_safety = 0.8;
  double bulk_viscosity = 0.06;      // fraction of critical damping of the highest bulk mode
  int record_interval = 0;           // explicit steps per curve record; 0: automatic
  // run control
  double stop_drop_fraction = 0.0;   // stop once the reaction falls below this fraction of the peak
  int snapshot_interval = 0;         // 0: final state only

  void validate() const {
    if (!(lc > 0.0)) throw ConfigError("solver: lc must be > 0");
    if (!(total_time > 0.0)) throw ConfigError("solver: total_time must be > 0");
    if (!(step_increment > 0.0)) throw ConfigError("solver: step_increment must be > 0");
    if (step_increment > total_time) throw ConfigError("solver: step_increment exceeds total_time");
    if (!(newton_tol > 0.0)) throw ConfigError("solver: newton_tol must be > 0");
    if (newton_max_iter < 1) throw ConfigError("solver: newton_max_iter must be >= 1");
    if (passes_per_step < 1) throw ConfigError("solver: passes_per_step must be >= 1");
    if (max_halvings < 0) throw ConfigError("solver: max_halvings must be >= 0");
    if (!(thickness > 0.0)) throw ConfigError("solver: thickness must be > 0");
    if (!(density > 0.0)) throw ConfigError("solver: density must be > 0");
    if (mass_scaling < 0.0) throw ConfigError("solver: mass_scaling must be >= 0");
    if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw ConfigError("solver: dt_safety must lie in (0, 1]");
    if (bulk_viscosity < 0.0 || bulk_viscosity >= 1.0) throw ConfigError("solver: bulk_viscosity must lie in [0, 1)");
    if (stop_drop_fraction < 0.0 || stop_drop_fraction >= 1.0)
      throw ConfigError("solver: stop_drop_fraction must lie in [0, 1)");
  }

  int num_steps() const { return std::max(1, static_cast<int>(std::llround(total_time / step_increment))); }
};

struct LoadStepRecord {
  int step = 0;
  double u_applied = 0.0;       // mm
  double reaction_sum = 0.0;    // N, left edge, positive in tension
  double reaction_avg = 0.0;    // N per left-edge node
  double reaction_right = 0.0;  // N, right edge internal force sum
  int iterations = 0;
  double E_elastic = 0.0;
  double E_dissipated = 0.0;
  double E_kinetic = 0.0;
  double E_fracture = 0.0;      // int Gc gamma + cohesive dissipation
};

struct FieldSnapshot {
  int step = 0;
  double u_applied = 0.0;
  std::vector<double> u;             // 2 per node
  std::vector<double> phi;           // per node
  std::vector<double> von_mises;     // per element (bulk: QP average, CIE: 0)
  std::vector<double> damage;        // per element (CIE: mean D, bulk: mean QP phi)
};

struct FirstFailure {
  int step = -1;
  Phase phase = Phase::matrix;
  int element = -1;
  double value = 0.0;
};

struct SimulationResult {
  std::vector<LoadStepRecord> curve;
  std::vector<FieldSnapshot> snapshots;
  long total_iterations = 0;
  bool complete_fracture = false;
  bool aborted = false;
  std::string message;
  double wall_time = 0.0;
  double max_kinetic_ratio = 0.0;
  std::optional<FirstFailure> first_failure;

  double peak_reaction() const {
    double p = 0.0;
    for (const auto& r : curve) p = std::max(p, r.reaction_sum);
    return p;
  }
};

/// External work minus recoverable elastic energy at the final state.
inline double dissipated_fracture_energy(const SimulationResult& r) {
  return r.curve.empty() ? 0.0 : r.curve.back().E_dissipated;
}

// ---------------------------------------------------------------------------
// Boundary conditions

struct DirichletBC {
  std::vector<int> dofs;
  std::vector<double> values;
  std::vector<int> left_x;   // reaction DOFs
  std::vector<int> right_x;
};

/// left_edge u_x = 0, right_edge u_x = displacement, bottom_left_corner u_y = 0.
inline DirichletBC apply_boundary_conditions(const Mesh& mesh, double displacement) {
  DirichletBC bc;
  for (int n : mesh.node_set("left_edge")) {
    bc.dofs.push_back(2 * n);
    bc.values.push_back(0.0);
    bc.left_x.push_back(2 * n);
  }
  for (int n : mesh.node_set("right_edge")) {
    bc.dofs.push_back(2 * n);
    bc.values.push_back(displacement);
    bc.right_x.push_back(2 * n);
  }
  for (int n : mesh.node_set("bottom_left_corner")) {
    bc.dofs.push_back(2 * n + 1);
    bc.values.push_back(0.0);
  }
  return bc;
}

namespace detail {

inline std::array<Vec2, 4> element_coords(const Mesh& m, const Element& el) {
  std::array<Vec2, 4> X{};
  for (int a = 0; a < el.size(); ++a) X[a] = m.coord(el.nodes[a]);
  return X;
}

// Checkpoint helpers: doubles as hex floats so restarts are bit-exact.
inline void put(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  os << buf;
}

inline double get_double(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw Error("checkpoint: truncated");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) throw Error("checkpoint: bad number '" + tok + "'");
  return v;
}

template <class T>
T get_value(std::istream& is) {
  T v{};
  if (!(is >> v)) throw Error("checkpoint: truncated");
  return v;
}

inline void expect(std::istream& is, const std::string& word) {
  std::string w;
  if (!(is >> w) || w != word) throw Error("checkpoint: expected '" + word + "'");
}

template <class Vec>
void put_vector(std::ostream& os, const char* name, const Vec& v) {
  os << name << ' ' << v.size();
  for (auto x : v) {
    os << ' ';
    put(os, x);
  }
  os << '\n';
}

inline std::vector<double> get_vector(std::istream& is, const char* name) {
  expect(is, name);
  const auto n = get_value<std::size_t>(is);
  std::vector<double> v(n);
  for (auto& x : v) x = get_double(is);
  return v;
}

inline void put_cohesive(std::ostream& os, const CohesiveState& s) {
  for (double v : {s.D, s.delta_m_max, s.delta_m0, s.delta_mf, s.G_n, s.G_s, s.delta_n, s.delta_s, s.t_n, s.t_s}) {
    os << ' ';
    put(os, v);
  }
  os << ' ' << (s.initiated ? 1 : 0);
}

inline CohesiveState get_cohesive(std::istream& is) {
  CohesiveState s;
  for (double* p : {&s.D, &s.delta_m_max, &s.delta_m0, &s.delta_mf, &s.G_n, &s.G_s, &s.delta_n, &s.delta_s, &s.t_n, &s.t_s})
    *p = get_double(is);
  s.initiated = get_value<int>(is) != 0;
  return s;
}

inline void put_records(std::ostream& os, const std::vector<LoadStepRecord>& curve) {
  os << "curve " << curve.size() << '\n';
  for (const auto& r : curve) {
    os << r.step << ' ' << r.iterations;
    for (double v : {r.u_applied, r.reaction_sum, r.reaction_avg, r.reaction_right, r.E_elastic,
                     r.E_dissipated, r.E_kinetic, r.E_fracture}) {
      os << ' ';
      put(os, v);
    }
    os << '\n';
  }
}

inline std::vector<LoadStepRecord> get_records(std::istream& is) {
  expect(is, "curve");
  std::vector<LoadStepRecord> curve(get_value<std::size_t>(is));
  for (auto& r : curve) {
    r.step = get_value<int>(is);
    r.iterations = get_value<int>(is);
    for (double* p : {&r.u_applied, &r.reaction_sum, &r.reaction_avg, &r.reaction_right, &r.E_elastic,
                      &r.E_dissipated, &r.E_kinetic, &r.E_fracture})
      *p = get_double(is);
  }
  return curve;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Staggered implicit solver

class StaggeredSolver {
 public:
  StaggeredSolver(Mesh mesh, PropertyTables tables, ModelKind kind, FractureModel model, SolverConfig cfg)
      : mesh_(std::move(mesh)), tables_(std::move(tables)), kind_(kind), model_(model), cfg_(cfg) {
    if (kind_ == ModelKind::CZM) throw ConfigError("CZM runs use the explicit solver");
    model_.scheme = bulk_scheme(kind_);
    model_.validate();
    cfg_.validate();
    mesh_.validate();
    setup();
  }

  const Mesh& mesh() const { return mesh_; }
  const SolverConfig& config() const { return cfg_; }
  const Vector& displacement() const { return u_; }
  const Vector& damage() const { return phi_; }
  std::vector<double>& history() { return H_; }
  const std::vector<double>& history() const { return H_; }
  const std::vector<std::array<CohesiveState, 2>>& cohesive_states() const { return cie_state_; }
  const SimulationResult& result() const { return result_; }
  int step() const { return step_; }
  double applied_displacement() const { return u_applied_; }
  bool finished() const { return step_ >= cfg_.num_steps() || stopped_; }

  /// Bulk element index, phase and quadrature offset of every history entry.
  int qp_offset(std::size_t bulk_index) const { return qp_offset_[bulk_index]; }
  const std::vector<int>& bulk_elements() const { return bulk_; }

  /// Prescribes damage values on nodes (held fixed in every damage solve).
  void fix_damage(const std::vector<int>& nodes, double value) {
    for (int n : nodes) {
      phi_fixed_[n] = 1;
      phi_[n] = value;
      phi_committed_[n] = value;
    }
  }

  /// Solves the damage sub-problem alone (u and H frozen). Returns the number
  /// of Newton iterations, or -1 when not converged.
  int solve_damage() {
    int it = 0;
    return damage_newton(it) ? it : -1;
  }

  /// Solves the displacement sub-problem alone at the given applied displacement.
  int solve_displacement(double applied) {
    int it = 0;
    return displacement_newton(applied, it) ? it : -1;
  }

  /// One load increment (with step halving on divergence). Returns false when
  /// the run has ended (all steps done, fracture complete, or aborted).
  bool advance() {
    if (result_.curve.empty()) record(0);
    if (finished()) return false;
    const double du = cfg_.total_displacement / cfg_.num_steps();
    const double target = (step_ + 1) * du;
    int iters = 0;
    const Snapshot saved = save_state();
    const auto outcome = increment(u_applied_, target, 0, iters);
    if (outcome == Outcome::fractured) {
      restore_state(saved);
      result_.complete_fracture = true;
      result_.message = "complete fracture: stiffness matrix became singular";
      stopped_ = true;
      return false;
    }
    if (outcome == Outcome::diverged) {
      restore_state(saved);
      result_.aborted = true;
      std::ostringstream os;
      os << "Newton divergence at step " << step_ + 1 << " after " << cfg_.max_halvings
         << " halvings (u_applied " << target << " mm)";
      result_.message = os.str();
      stopped_ = true;
      return false;
    }
    ++step_;
    record(iters);
    return !finished();
  }

  /// Runs to completion; `observer` is called after every accepted step.
  const SimulationResult& run(const std::function<void(const StaggeredSolver&)>& observer = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    if (result_.curve.empty()) record(0);
    while (advance()) {
      if (cfg_.snapshot_interval > 0 && step_ % cfg_.snapshot_interval == 0) result_.snapshots.push_back(snapshot());
      if (observer) observer(*this);
    }
    if (observer && (stopped_ || step_ >= cfg_.num_steps())) observer(*this);
    if (result_.snapshots.empty() || result_.snapshots.back().step != step_) result_.snapshots.push_back(snapshot());
    result_.wall_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result_;
  }

  FieldSnapshot snapshot() const {
    FieldSnapshot s;
    s.step = step_;
    s.u_applied = u_applied_;
    s.u.assign(u_.data(), u_.data() + u_.size());
    s.phi.assign(phi_.data(), phi_.data() + phi_.size());
    s.von_mises.assign(mesh_.elements.size(), 0.0);
    s.damage.assign(mesh_.elements.size(), 0.0);
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const int e = bulk_[b];
      const auto out = bulk_displacement(b);
      double vm = 0.0, ph = 0.0;
      const auto& q = quad_[b];
      for (int i = 0; i < q.nq; ++i) {
        vm += von_mises(out.stress[i]) / q.nq;
        for (int a = 0; a < q.n; ++a) ph += q.N[i][a] * phi_[mesh_.elements[e].nodes[a]] / q.nq;
      }
      s.von_mises[e] = vm;
      s.damage[e] = ph;
    }
    for (std::size_t c = 0; c < cie_.size(); ++c)
      s.damage[cie_[c]] = 0.5 * (cie_state_[c][0].D + cie_state_[c][1].D);
    return s;
  }

  /// Total energy of the current state: elastic + omega-weighted history +
  /// crack surface energy (used for energy-decrease checks).
  double damage_energy() const { return damage_energy_at(phi_); }

  double elastic_energy() const {
    double e = 0.0;
    for (std::size_t b = 0; b < bulk_.size(); ++b) e += bulk_displacement(b).energy;
    for (std::size_t c = 0; c < cie_.size(); ++c) e += cie_kernel(c).elastic_energy;
    return e;
  }

  // -------------------------------------------------------------------------
  // Checkpoint / restart

  void save_checkpoint(std::ostream& os) const {
    os << "MPFRAC-CHECKPOINT 1\n";
    os << "model " << to_string(kind_) << '\n';
    os << "nodes " << mesh_.nodes.size() << " elements " << mesh_.elements.size() << '\n';
    os << "step " << step_ << '\n';
    os << "u_applied ";
    detail::put(os, u_applied_);
    os << "\nw_ext ";
    detail::put(os, w_ext_);
    os << "\nf_right ";
    detail::put(os, f_right_prev_);
    os << "\npeak ";
    detail::put(os, peak_);
    os << "\nflags " << (stopped_ ? 1 : 0) << ' ' << result_.total_iterations << '\n';
    detail::put_vector(os, "u", u_);
    detail::put_vector(os, "phi", phi_);
    detail::put_vector(os, "phi_committed", phi_committed_);
    detail::put_vector(os, "H", H_);
    os << "cohesive " << cie_state_.size() << '\n';
    for (const auto& st : cie_state_) {
      detail::put_cohesive(os, st[0]);
      detail::put_cohesive(os, st[1]);
      os << '\n';
    }
    if (result_.first_failure) {
      const auto& f = *result_.first_failure;
      os << "first_failure 1 " << f.step << ' ' << to_string(f.phase) << ' ' << f.element << ' ';
      detail::put(os, f.value);
      os << '\n';
    } else {
      os << "first_failure 0\n";
    }
    detail::put_records(os, result_.curve);
    os << "END\n";
  }

  void load_checkpoint(std::istream& is) {
    using namespace detail;
    expect(is, "MPFRAC-CHECKPOINT");
    if (get_value<int>(is) != 1) throw Error("checkpoint: unsupported version");
    expect(is, "model");
    if (parse_model_kind(get_value<std::string>(is)) != kind_) throw Error("checkpoint: model mismatch");
    expect(is, "nodes");
    const auto nn = get_value<std::size_t>(is);
    expect(is, "elements");
    const auto ne = get_value<std::size_t>(is);
    if (nn != mesh_.nodes.size() || ne != mesh_.elements.size()) throw Error("checkpoint: mesh mismatch");
    expect(is, "step");
    step_ = get_value<int>(is);
    expect(is, "u_applied");
    u_applied_ = get_double(is);
    expect(is, "w_ext");
    w_ext_ = get_double(is);
    expect(is, "f_right");
    f_right_prev_ = get_double(is);
    expect(is, "peak");
    peak_ = get_double(is);
    expect(is, "flags");
    stopped_ = get_value<int>(is) != 0;
    result_ = SimulationResult{};
    result_.total_iterations = get_value<long>(is);
    auto to_eigen = [](const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())).eval(); };
    u_ = to_eigen(get_vector(is, "u"));
    phi_ = to_eigen(get_vector(is, "phi"));
    phi_committed_ = to_eigen(get_vector(is, "phi_committed"));
    H_ = get_vector(is, "H");
    if (u_.size() != 2 * static_cast<Eigen::Index>(nn) || phi_.size() != static_cast<Eigen::Index>(nn) ||
        H_.size() != qp_total_)
      throw Error("checkpoint: field size mismatch");
    expect(is, "cohesive");
    if (get_value<std::size_t>(is) != cie_state_.size()) throw Error("checkpoint: cohesive count mismatch");
    for (auto& st : cie_state_) {
      st[0] = get_cohesive(is);
      st[1] = get_cohesive(is);
    }
    expect(is, "first_failure");
    if (get_value<int>(is) == 1) {
      FirstFailure f;
      f.step = get_value<int>(is);
      f.phase = parse_phase(get_value<std::string>(is));
      f.element = get_value<int>(is);
      f.value = get_double(is);
      result_.first_failure = f;
    }
    result_.curve = get_records(is);
    expect(is, "END");
  }

 private:
  enum class Outcome { ok, diverged, fractured };

  struct Snapshot {
    Vector u, phi, phi_committed;
    std::vector<double> H;
    std::vector<std::array<CohesiveState, 2>> cie;
    double u_applied, w_ext, f_right;
  };

  Snapshot save_state() const {
    return {u_, phi_, phi_committed_, H_, cie_state_, u_applied_, w_ext_, f_right_prev_};
  }

  void restore_state(const Snapshot& s) {
    u_ = s.u;
    phi_ = s.phi;
    phi_committed_ = s.phi_committed;
    H_ = s.H;
    cie_state_ = s.cie;
    u_applied_ = s.u_applied;
    w_ext_ = s.w_ext;
    f_right_prev_ = s.f_right;
  }

  void setup() {
    const std::size_t nn = mesh_.nodes.size();
    u_ = Vector::Zero(2 * static_cast<Eigen::Index>(nn));
    phi_ = Vector::Zero(static_cast<Eigen::Index>(nn));
    phi_committed_ = phi_;
    phi_fixed_.assign(nn, 0);

    std::vector<std::vector<int>> udofs, pdofs;
    for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
      const auto& el = mesh_.elements[e];
      std::vector<int> ud, pd;
      for (int a = 0; a < el.size(); ++a) {
        ud.push_back(2 * el.nodes[a]);
        ud.push_back(2 * el.nodes[a] + 1);
        pd.push_back(el.nodes[a]);
      }
      udofs.push_back(ud);
      if (is_bulk(el.kind)) {
        const int b = static_cast<int>(bulk_.size());
        bulk_.push_back(static_cast<int>(e));
        const auto X = detail::element_coords(mesh_, el);
        quad_.push_back(element_quadrature(el.kind, std::span<const Vec2>(X.data(), el.size()), cfg_.thickness,
                                           static_cast<long>(e)));
        const auto& props = tables_.bulk_props(el.phase);
        props.validate(to_string(el.phase));
        props_.push_back(&props);
        consts_.push_back(derive_constants(model_, props, cfg_.lc));
        qp_offset_.push_back(static_cast<int>(qp_total_));
        for (int i = 0; i < quad_.back().nq; ++i) H_.push_back(initial_history(model_, props));
        qp_total_ = H_.size();
        pdofs.push_back(pd);
        (void)b;
      } else {
        cie_.push_back(static_cast<int>(e));
        const auto& law = tables_.cohesive_law(el.phase);
        law.validate(to_string(el.phase));
        laws_.push_back(&law);
      }
    }
    if (bulk_.empty()) throw MeshError("mesh has no bulk elements");
    cie_state_.assign(cie_.size(), {});
    cie_trial_ = cie_state_;
    // element-dof lists for the two assemblers (u: all elements, phi: bulk only)
    ku_.build(udofs, static_cast<int>(2 * nn));
    kp_.build(pdofs, static_cast<int>(nn));
    udofs_ = std::move(udofs);

    // scale of the damage residual: lumped Gc/(c0 lc) * int N per node
    Vector scale = Vector::Zero(static_cast<Eigen::Index>(nn));
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto& q = quad_[b];
      const double loc = props_[b]->Gc / (consts_[b].c0 * consts_[b].lc);
      for (int i = 0; i < q.nq; ++i)
        for (int a = 0; a < q.n; ++a) scale[mesh_.elements[bulk_[b]].nodes[a]] += loc * q.w[i] * q.N[i][a];
    }
    phi_scale_ = scale.norm();
    u_scale_ = 0.0;
    for (std::size_t b = 0; b < bulk_.size(); ++b)
      u_scale_ = std::max(u_scale_, props_[b]->E * cfg_.thickness);
  }

  std::vector<double> element_values(const Vector& v, const Element& el, int per_node) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(el.size() * per_node));
    for (int a = 0; a < el.size(); ++a)
      for (int k = 0; k < per_node; ++k) out.push_back(v[per_node * el.nodes[a] + k]);
    return out;
  }

  DisplacementKernelOutput bulk_displacement(std::size_t b) const {
    const auto& el = mesh_.elements[bulk_[b]];
    const auto ue = element_values(u_, el, 2);
    const auto pe = element_values(phi_, el, 1);
    return displacement_kernel(quad_[b], *props_[b], model_, consts_[b], ue, pe);
  }

  CieKernelOutput cie_kernel(std::size_t c) const {
    const auto& el = mesh_.elements[cie_[c]];
    const auto X = detail::element_coords(mesh_, el);
    std::array<double, 8> ue{};
    for (int a = 0; a < 4; ++a) {
      ue[2 * a] = u_[2 * el.nodes[a]];
      ue[2 * a + 1] = u_[2 * el.nodes[a] + 1];
    }
    return cie_element_kernel(X, std::span<const double, 8>(ue), *laws_[c], cie_state_[c], cfg_.thickness);
  }

  // Assembles K_uu and the internal force vector; CIE trial states are kept
  // in cie_trial_.
  void assemble_displacement(Vector& f, double& energy) {
    ku_.zero();
    f.setZero(u_.size());
    energy = 0.0;
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto out = bulk_displacement(b);
      const int e = bulk_[b];
      ku_.add(static_cast<std::size_t>(e), out.K);
      const auto& d = udofs_[static_cast<std::size_t>(e)];
      for (std::size_t i = 0; i < d.size(); ++i) f[d[i]] += out.residual[static_cast<Eigen::Index>(i)];
      energy += out.energy;
    }
    for (std::size_t c = 0; c < cie_.size(); ++c) {
      const auto out = cie_kernel(c);
      const int e = cie_[c];
      ku_.add(static_cast<std::size_t>(e), out.stiffness);
      const auto& d = udofs_[static_cast<std::size_t>(e)];
      for (std::size_t i = 0; i < d.size(); ++i) f[d[i]] += out.residual[static_cast<Eigen::Index>(i)];
      energy += out.elastic_energy;
      cie_trial_[c] = out.trial;
    }
  }

  bool displacement_newton(double applied, int& iters) {
    const DirichletBC bc = apply_boundary_conditions(mesh_, applied);
    std::vector<char> fixed(static_cast<std::size_t>(u_.size()), 0);
    for (std::size_t k = 0; k < bc.dofs.size(); ++k) {
      fixed[bc.dofs[k]] = 1;
      u_[bc.dofs[k]] = bc.values[k];
    }
    Vector f;
    double energy = 0.0;
    for (int it = 0; it <= cfg_.newton_max_iter; ++it) {
      assemble_displacement(f, energy);
      if (!f.allFinite()) return false;
      Vector r = f;
      for (std::size_t i = 0; i < fixed.size(); ++i)
        if (fixed[i]) r[static_cast<Eigen::Index>(i)] = 0.0;
      const double floor = 1e-12 * u_scale_ * std::max(std::abs(applied), 1e-12);
      if (r.norm() <= cfg_.newton_tol * std::max(f.norm(), floor) || r.norm() <= floor) {
        f_eq_ = f;
        return true;
      }
      if (it == cfg_.newton_max_iter) break;
      ku_.apply_dirichlet(fixed);
      const auto st = lin_u_.factorize(ku_.matrix());
      // softening cohesive elements make the tangent indefinite; only a
      // singular matrix signals a body split in two
      if (st == LinearSolver::Status::singular) throw FractureComplete{};
      const Vector du = lin_u_.solve(-r, ku_.matrix());
      if (!du.allFinite()) return false;
      u_ += du;
      ++iters;
    }
    return false;
  }

  struct FractureComplete {};

  double damage_energy_at(const Vector& phi) const {
    double e = 0.0;
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto& el = mesh_.elements[bulk_[b]];
      const auto pe = element_values(phi, el, 1);
      e += phasefield_kernel(quad_[b], *props_[b], model_, consts_[b], pe,
                             std::span<const double>(H_.data() + qp_offset_[b], quad_[b].nq))
               .energy;
    }
    return e;
  }

  void assemble_damage(Vector& R, double& energy) {
    kp_.zero();
    R.setZero(phi_.size());
    energy = 0.0;
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto& el = mesh_.elements[bulk_[b]];
      const auto pe = element_values(phi_, el, 1);
      const auto out = phasefield_kernel(quad_[b], *props_[b], model_, consts_[b], pe,
                                         std::span<const double>(H_.data() + qp_offset_[b], quad_[b].nq));
      kp_.add(b, out.K);
      for (int a = 0; a < el.size(); ++a) R[el.nodes[a]] += out.residual[a];
      energy += out.energy;
    }
  }

  // Projected Newton with an active set on the bounds [phi_committed, 1] and
  // a backtracking line search on the damage energy.
  bool damage_newton(int& iters) {
    const Eigen::Index n = phi_.size();
    Vector lb = phi_committed_, ub = Vector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (phi_fixed_[static_cast<std::size_t>(i)]) lb[i] = ub[i] = phi_[i];
      phi_[i] = std::clamp(phi_[i], lb[i], ub[i]);
    }
    Vector R;
    double energy = 0.0;
    std::vector<char> active(static_cast<std::size_t>(n), 0);
    for (int it = 0; it <= cfg_.newton_max_iter; ++it) {
      assemble_damage(R, energy);
      if (!R.allFinite()) return false;
      Vector r = R;
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool at_lb = phi_[i] <= lb[i] && R[i] > 0.0;
        const bool at_ub = phi_[i] >= ub[i] && R[i] < 0.0;
        active[static_cast<std::size_t>(i)] = (lb[i] == ub[i]) || at_lb || at_ub;
        if (active[static_cast<std::size_t>(i)]) r[i] = 0.0;
      }
      if (r.norm() <= cfg_.newton_tol * phi_scale_) return true;
      if (it == cfg_.newton_max_iter) break;
      kp_.apply_dirichlet(active);
      auto st = lin_p_.factorize(kp_.matrix());
      if (st != LinearSolver::Status::ok) {
        // indefinite or singular: shift the diagonal until positive definite
        double dmax = 0.0;
        auto& A = kp_.matrix();
        for (int j = 0; j < A.outerSize(); ++j)
          for (SparseMatrix::InnerIterator itA(A, j); itA; ++itA)
            if (itA.row() == j) dmax = std::max(dmax, std::abs(itA.value()));
        double mu = 1e-6 * dmax;
        for (int k = 0; k < 12 && st != LinearSolver::Status::ok; ++k, mu *= 10.0) {
          for (int j = 0; j < A.outerSize(); ++j)
            for (SparseMatrix::InnerIterator itA(A, j); itA; ++itA)
              if (itA.row() == j && !active[static_cast<std::size_t>(j)]) itA.valueRef() += mu;
          st = lin_p_.factorize(A);
        }
        if (st != LinearSolver::Status::ok) return false;
      }
      const Vector d = lin_p_.solve(-r, kp_.matrix());
      if (!d.allFinite()) return false;
      ++iters;
      double t = 1.0, best_e = std::numeric_limits<double>::infinity();
      Vector best = phi_;
      for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
        Vector trial = phi_ + t * d;
        for (Eigen::Index i = 0; i < n; ++i) trial[i] = std::clamp(trial[i], lb[i], ub[i]);
        const double e = damage_energy_at(trial);
        if (e < best_e) {
          best_e = e;
          best = trial;
        }
        if (e <= energy + 1e-14 * std::abs(energy)) break;
      }
      const double change = (best - phi_).cwiseAbs().maxCoeff();
      phi_ = best;
      if (change < 1e-13) {
        assemble_damage(R, energy);
        return true;
      }
    }
    return false;
  }

  void update_history_all() {
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto out = bulk_displacement(b);
      for (int i = 0; i < quad_[b].nq; ++i) {
        double& H = H_[static_cast<std::size_t>(qp_offset_[b] + i)];
        H = std::max({H, out.psi_eq[i], initial_history(model_, *props_[b])});
      }
    }
  }

  // Solves the increment from `from` to `to`, halving on divergence.
  Outcome increment(double from, double to, int depth, int& iters) {
    const Snapshot saved = save_state();
    bool ok = true;
    try {
      for (int pass = 0; pass < cfg_.passes_per_step && ok; ++pass) {
        int it = 0;
        ok = displacement_newton(to, it);
        iters += it;
        if (!ok) break;
        cie_state_ = cie_trial_;
        update_history_all();
        it = 0;
        ok = damage_newton(it);
        iters += it;
      }
    } catch (const FractureComplete&) {
      return Outcome::fractured;
    }
    if (ok) {
      phi_committed_ = phi_;
      // reaction (at displacement equilibrium) and external work
      double fr = 0.0;
      for (int n : mesh_.node_set("right_edge")) fr += f_eq_[2 * n];
      w_ext_ += 0.5 * (f_right_prev_ + fr) * (to - from);
      f_right_prev_ = fr;
      u_applied_ = to;
      return Outcome::ok;
    }
    restore_state(saved);
    if (depth >= cfg_.max_halvings) return Outcome::diverged;
    const double mid = 0.5 * (from + to);
    const Outcome a = increment(from, mid, depth + 1, iters);
    if (a != Outcome::ok) return a;
    return increment(mid, to, depth + 1, iters);
  }

  void record(int iters) {
    if (f_eq_.size() != u_.size()) {
      double e = 0.0;
      assemble_displacement(f_eq_, e);
    }
    const Vector& f = f_eq_;
    const double e_el = elastic_energy();
    LoadStepRecord r;
    r.step = step_;
    r.u_applied = u_applied_;
    const auto& left = mesh_.node_set("left_edge");
    double fl = 0.0, fr = 0.0;
    for (int n : left) fl += f[2 * n];
    for (int n : mesh_.node_set("right_edge")) fr += f[2 * n];
    r.reaction_sum = -fl;
    r.reaction_avg = -fl / static_cast<double>(left.size());
    r.reaction_right = fr;
    r.iterations = iters;
    r.E_elastic = e_el;
    r.E_dissipated = w_ext_ - e_el;
    double crack = 0.0;
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto& el = mesh_.elements[bulk_[b]];
      const auto pe = element_values(phi_, el, 1);
      const auto out = phasefield_kernel(quad_[b], *props_[b], model_, consts_[b], pe,
                                         std::span<const double>(H_.data() + qp_offset_[b], quad_[b].nq));
      crack += out.crack_energy;
      for (int i = 0; i < quad_[b].nq; ++i) note_failure(bulk_[b], out.phi_qp[i]);
    }
    for (std::size_t c = 0; c < cie_.size(); ++c) {
      const auto& el = mesh_.elements[cie_[c]];
      const double len = (mesh_.coord(el.nodes[1]) - mesh_.coord(el.nodes[0])).norm();
      for (const auto& s : cie_state_[c]) {
        crack += 0.5 * len * cfg_.thickness * dissipated_at_state(*laws_[c], s);
        note_failure(cie_[c], s.D);
      }
    }
    if (pending_failure_) {
      result_.first_failure = *pending_failure_;
      pending_failure_.reset();
    }
    r.E_fracture = crack;
    result_.curve.push_back(r);
    result_.total_iterations += iters;
    peak_ = std::max(peak_, r.reaction_sum);
    if (cfg_.stop_drop_fraction > 0.0 && peak_ > 0.0 && r.reaction_sum < cfg_.stop_drop_fraction * peak_) {
      stopped_ = true;
      result_.message = "stopped after the reaction dropped below the configured fraction of its peak";
    }
  }

  void note_failure(int element, double value) {
    if (result_.first_failure || value < 0.95) return;
    if (!pending_failure_ || value > pending_failure_->value)
      pending_failure_ = FirstFailure{step_, mesh_.elements[element].phase, element, value};
  }

  Mesh mesh_;
  PropertyTables tables_;
  ModelKind kind_;
  FractureModel model_;
  SolverConfig cfg_;

  std::vector<int> bulk_, cie_;
  std::vector<ElementQuadrature> quad_;
  std::vector<const PhaseProperties*> props_;
  std::vector<DerivedModelConstants> consts_;
  std::vector<const CohesiveLaw*> laws_;
  std::vector<int> qp_offset_;
  std::size_t qp_total_ = 0;
  std::vector<std::vector<int>> udofs_;

  SparseAssembler ku_, kp_;
  LinearSolver lin_u_, lin_p_;

  Vector u_, phi_, phi_committed_;
  Vector f_eq_;  // internal forces at the last displacement equilibrium
  std::vector<char> phi_fixed_;
  std::vector<double> H_;
  std::vector<std::array<CohesiveState, 2>> cie_state_, cie_trial_;
  double phi_scale_ = 1.0;
  double u_scale_ = 1.0;

  int step_ = 0;
  double u_applied_ = 0.0;
  double w_ext_ = 0.0;
  double f_right_prev_ = 0.0;
  double peak_ = 0.0;
  bool stopped_ = false;
  std::optional<FirstFailure> pending_failure_;
  SimulationResult result_;
};

// ---------------------------------------------------------------------------
// Explicit central-difference solver (linear-elastic bulk + cohesive elements)

/// Cubic smoothstep ramp with zero rate at both ends.
inline double smooth_ramp(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * (3.0 - 2.0 * tau);
}

class ExplicitSolver {
 public:
  ExplicitSolver(Mesh mesh, PropertyTables tables, SolverConfig cfg)
      : mesh_(std::move(mesh)), tables_(std::move(tables)), cfg_(cfg) {
    cfg_.validate();
    mesh_.validate();
    setup();
  }

  double time_step() const { return cfg_.step_increment; }
  double stable_time_step() const { return dt_stable_; }
  double mass_scaling() const { return scale_; }
  const Vector& displacement() const { return u_; }
  Vector& displacement() { return u_; }
  Vector& velocity() { return v_; }
  const std::vector<std::array<CohesiveState, 2>>& cohesive_states() const { return cie_state_; }
  const SimulationResult& result() const { return result_; }
  const Mesh& mesh() const { return mesh_; }

  /// Switches off the prescribed boundary motion (free-vibration checks).
  void set_free(bool free) { free_ = free; }

  double kinetic_energy() const {
    double k = 0.0;
    for (Eigen::Index i = 0; i < v_.size(); ++i) k += 0.5 * mass_[i] * v_[i] * v_[i];
    return k;
  }

  double elastic_energy() const { return e_elastic_; }
  double dissipated_energy() const { return e_dissipated_; }

  /// Advances one time step. The first call initialises accelerations.
  void step() {
    if (!initialised_) {
      compute_forces();
      initialised_ = true;
    }
    const double dt = cfg_.step_increment;
    const double t1 = time_ + dt;
    // v(n+1/2) and u(n+1)
    vhalf_ = v_ + 0.5 * dt * a_;
    u_ += dt * vhalf_;
    if (!free_) {
      const double target = cfg_.total_displacement * smooth_ramp(t1 / cfg_.total_time);
      for (std::size_t k = 0; k < fixed_dofs_.size(); ++k) {
        const int d = fixed_dofs_[k];
        const double val = fixed_is_load_[k] ? target : 0.0;
        vhalf_[d] = (val - (u_[d] - dt * vhalf_[d])) / dt;
        u_[d] = val;
      }
    }
    time_ = t1;
    ++step_;
    compute_forces();
    v_ = vhalf_ + 0.5 * dt * a_;
    if (!free_)
      for (std::size_t k = 0; k < fixed_dofs_.size(); ++k) {
        const int d = fixed_dofs_[k];
        v_[d] = fixed_is_load_[k] ? cfg_.total_displacement * ramp_rate(time_) : 0.0;
      }
    // external work through the loaded edge
    const double u_load = free_ ? 0.0 : cfg_.total_displacement * smooth_ramp(time_ / cfg_.total_time);
    w_ext_ += 0.5 * (f_right_prev_ + f_right_) * (u_load - u_load_prev_);
    u_load_prev_ = u_load;
    f_right_prev_ = f_right_;
  }

  const SimulationResult& run(const std::function<void(const ExplicitSolver&)>& observer = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = cfg_.num_steps();
    int every = cfg_.record_interval;
    if (every <= 0) every = std::max(1, n / 200);
    record();
    for (int s = 0; s < n; ++s) {
      step();
      const double ke = kinetic_energy();
      const double total = e_elastic_ + e_dissipated_ + ke;
      // the ratio is 0/0 at the start of the ramp; it is tracked once the
      // applied displacement reaches 1% of its final value
      if (u_load_prev_ >= 0.01 * std::abs(cfg_.total_displacement) && total > 0.0)
        result_.max_kinetic_ratio = std::max(result_.max_kinetic_ratio, ke / total);
      if (step_ % every == 0 || s == n - 1) {
        record();
        if (observer) observer(*this);
      }
      if (cfg_.snapshot_interval > 0 && step_ % (cfg_.snapshot_interval * every) == 0)
        result_.snapshots.push_back(snapshot());
    }
    if (result_.snapshots.empty() || result_.snapshots.back().step != step_) result_.snapshots.push_back(snapshot());
    result_.wall_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result_;
  }

  FieldSnapshot snapshot() const {
    FieldSnapshot s;
    s.step = step_;
    s.u_applied = u_load_prev_;
    s.u.assign(u_.data(), u_.data() + u_.size());
    s.phi.assign(mesh_.nodes.size(), 0.0);
    s.von_mises.assign(mesh_.elements.size(), 0.0);
    s.damage.assign(mesh_.elements.size(), 0.0);
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto& el = mesh_.elements[bulk_[b]];
      Eigen::Matrix<double, 8, 1> ue = Eigen::Matrix<double, 8, 1>::Zero();
      for (int a = 0; a < el.size(); ++a) ue.segment<2>(2 * a) = u_.segment<2>(2 * el.nodes[a]);
      const auto& q = quad_[b];
      double vm = 0.0;
      for (int i = 0; i < q.nq; ++i) vm += von_mises(Dmat_[b] * (strain_displacement(q, i) * ue)) / q.nq;
      s.von_mises[bulk_[b]] = vm;
    }
    for (std::size_t c = 0; c < cie_.size(); ++c)
      s.damage[cie_[c]] = 0.5 * (cie_state_[c][0].D + cie_state_[c][1].D);
    return s;
  }

 private:
  double ramp_rate(double t) const {
    const double tau = std::clamp(t / cfg_.total_time, 0.0, 1.0);
    return 6.0 * tau * (1.0 - tau) / cfg_.total_time;
  }

  void setup() {
    const std::size_t nn = mesh_.nodes.size();
    const Eigen::Index nd = 2 * static_cast<Eigen::Index>(nn);
    u_ = v_ = vhalf_ = a_ = f_ = Vector::Zero(nd);
    Vector mass = Vector::Zero(nd);
    Vector rowsum = Vector::Zero(nd);
    for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
      const auto& el = mesh_.elements[e];
      const auto X = detail::element_coords(mesh_, el);
      if (is_bulk(el.kind)) {
        const auto q = element_quadrature(el.kind, std::span<const Vec2>(X.data(), el.size()), cfg_.thickness,
                                          static_cast<long>(e));
        const auto& props = tables_.bulk_props(el.phase);
        props.validate(to_string(el.phase));
        const Mat3 D = plane_stress_stiffness(props);
        Eigen::Matrix<double, 8, 8> K = Eigen::Matrix<double, 8, 8>::Zero();
        for (int i = 0; i < q.nq; ++i) {
          const auto B = strain_displacement(q, i);
          K += q.w[i] * B.transpose() * D * B;
        }
        // row-sum lumping of the consistent mass: equal shares for tri3 and
        // parallelogram quad4
        const double m_node = cfg_.density * q.area * cfg_.thickness / el.size();
        for (int a = 0; a < 2 * el.size(); ++a) {
          const int d = 2 * el.nodes[a / 2] + a % 2;
          mass[d] += m_node;
          rowsum[d] += K.row(a).cwiseAbs().sum();
        }
        bulk_.push_back(static_cast<int>(e));
        quad_.push_back(q);
        Kbulk_.push_back(K);
        Dmat_.push_back(D);
      } else {
        const auto& law = tables_.cohesive_law(el.phase);
        law.validate(to_string(el.phase));
        laws_.push_back(&law);
        cie_.push_back(static_cast<int>(e));
        const double len = (X[1] - X[0]).norm();
        const double k = 0.5 * len * cfg_.thickness * law.K;
        for (int a = 0; a < 4; ++a) {
          rowsum[2 * el.nodes[a]] += 2.0 * k;
          rowsum[2 * el.nodes[a] + 1] += 2.0 * k;
        }
      }
    }
    cie_state_.assign(cie_.size(), {});
    // stability: omega_max^2 <= max_i rowsum_i / m_i (Gershgorin)
    double ratio = 0.0;
    for (Eigen::Index i = 0; i < nd; ++i)
      if (mass[i] > 0.0) ratio = std::max(ratio, rowsum[i] / mass[i]);
    const double w1 = std::sqrt(ratio);
    const double xi = cfg_.bulk_viscosity;
    const double crit = (std::sqrt(1.0 + xi * xi) - xi);  // damping reduces the limit
    const double dt = cfg_.step_increment;
    const double dt_unscaled = cfg_.dt_safety * 2.0 * crit / w1;
    scale_ = cfg_.mass_scaling > 0.0 ? cfg_.mass_scaling : std::max(1.0, std::pow(dt / dt_unscaled, 2));
    mass_ = mass * scale_;
    dt_stable_ = dt_unscaled * std::sqrt(scale_);
    if (dt > dt_stable_ * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "explicit time step " << dt << " s exceeds the stability estimate; use step_increment <= "
         << dt_stable_ << " s or a larger mass_scaling";
      throw SolverError(os.str());
    }
    // stiffness-proportional damping at the requested fraction of critical in
    // the highest (scaled) mode
    beta_ = 2.0 * xi / (w1 / std::sqrt(scale_));
    inv_mass_ = Vector::Zero(nd);
    for (Eigen::Index i = 0; i < nd; ++i)
      if (mass_[i] > 0.0) inv_mass_[i] = 1.0 / mass_[i];

    const DirichletBC bc = apply_boundary_conditions(mesh_, 1.0);
    for (std::size_t k = 0; k < bc.dofs.size(); ++k) {
      fixed_dofs_.push_back(bc.dofs[k]);
      fixed_is_load_.push_back(bc.values[k] != 0.0);
    }
    left_ = mesh_.node_set("left_edge");
    right_ = mesh_.node_set("right_edge");
  }

  void compute_forces() {
    f_.setZero();
    e_elastic_ = 0.0;
    e_dissipated_ = 0.0;
    Eigen::Matrix<double, 8, 1> ue, ve;
    for (std::size_t b = 0; b < bulk_.size(); ++b) {
      const auto& el = mesh_.elements[bulk_[b]];
      const int nd = 2 * el.size();
      ue.setZero();
      ve.setZero();
      for (int a = 0; a < el.size(); ++a) {
        ue.segment<2>(2 * a) = u_.segment<2>(2 * el.nodes[a]);
        ve.segment<2>(2 * a) = vhalf_.segment<2>(2 * el.nodes[a]);
      }
      const Eigen::Matrix<double, 8, 1> fe = Kbulk_[b] * ue;
      const Eigen::Matrix<double, 8, 1> fd = beta_ * (Kbulk_[b] * ve);
      e_elastic_ += 0.5 * ue.dot(fe);
      for (int a = 0; a < nd; ++a) f_[2 * el.nodes[a / 2] + a % 2] += fe[a] + fd[a];
    }
    for (std::size_t c = 0; c < cie_.size(); ++c) {
      const auto& el = mesh_.elements[cie_[c]];
      const auto X = detail::element_coords(mesh_, el);
      std::array<double, 8> ue8{};
      for (int a = 0; a < 4; ++a) {
        ue8[2 * a] = u_[2 * el.nodes[a]];
        ue8[2 * a + 1] = u_[2 * el.nodes[a] + 1];
      }
      const auto out = cie_element_kernel(X, std::span<const double, 8>(ue8), *laws_[c], cie_state_[c], cfg_.thickness);
      cie_state_[c] = out.trial;
      for (int a = 0; a < 8; ++a) f_[2 * el.nodes[a / 2] + a % 2] += out.residual[a];
      e_elastic_ += out.elastic_energy;
      e_dissipated_ += out.dissipated;
    }
    f_right_ = 0.0;
    for (int n : right_) f_right_ += f_[2 * n];
    a_ = -f_.cwiseProduct(inv_mass_);
    if (!free_)
      for (int d : fixed_dofs_) a_[d] = 0.0;
    if (!a_.allFinite()) throw SolverError("explicit integration produced non-finite accelerations");
  }

  void record() {
    LoadStepRecord r;
    r.step = step_;
    r.u_applied = u_load_prev_;
    double fl = 0.0;
    for (int n : left_) fl += f_[2 * n];
    r.reaction_sum = -fl;
    r.reaction_avg = -fl / static_cast<double>(left_.size());
    r.reaction_right = f_right_;
    r.iterations = 0;
    r.E_elastic = e_elastic_;
    r.E_kinetic = kinetic_energy();
    r.E_dissipated = e_dissipated_;
    r.E_fracture = e_dissipated_;
    result_.curve.push_back(r);
    for (std::size_t c = 0; c < cie_.size() && !result_.first_failure; ++c)
      for (const auto& s : cie_state_[c])
        if (s.D >= 0.95) {
          result_.first_failure = FirstFailure{step_, mesh_.elements[cie_[c]].phase, cie_[c], s.D};
          break;
        }
  }

  Mesh mesh_;
  PropertyTables tables_;
  SolverConfig cfg_;

  std::vector<int> bulk_, cie_, left_, right_;
  std::vector<ElementQuadrature> quad_;
  std::vector<Eigen::Matrix<double, 8, 8>> Kbulk_;
  std::vector<Mat3> Dmat_;
  std::vector<const CohesiveLaw*> laws_;
  std::vector<std::array<CohesiveState, 2>> cie_state_;
  std::vector<int> fixed_dofs_;
  std::vector<char> fixed_is_load_;

  Vector u_, v_, vhalf_, a_, f_, mass_, inv_mass_;
  double scale_ = 1.0, dt_stable_ = 0.0, beta_ = 0.0;
  double time_ = 0.0;
  int step_ = 0;
  bool initialised_ = false;
  bool free_ = false;
  double e_elastic_ = 0.0, e_dissipated_ = 0.0;
  double w_ext_ = 0.0, f_right_ = 0.0, f_right_prev_ = 0.0, u_load_prev_ = 0.0;
  SimulationResult result_;
};

}  // namespace mpfrac
