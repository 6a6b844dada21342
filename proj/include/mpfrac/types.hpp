#pragma once

// Shared enums, error types and small helpers used across the library.
// Units throughout: mm, MPa, N (energies in N*mm, per unit thickness).

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpfrac {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class MaterialError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class MicrostructureError : public Error {
 public:
  using Error::Error;
};

enum class ElementKind { quad4, tri3, cie4 };

enum class Phase { matrix, inclusion, interface, cie_matrix, cie_inclusion, cie_interface };

inline constexpr int node_count(ElementKind k) { return k == ElementKind::tri3 ? 3 : 4; }

inline constexpr bool is_bulk(ElementKind k) { return k != ElementKind::cie4; }

inline std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::quad4: return "quad4";
    case ElementKind::tri3: return "tri3";
    case ElementKind::cie4: return "cie4";
  }
  return "?";
}

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::matrix: return "matrix";
    case Phase::inclusion: return "inclusion";
    case Phase::interface: return "interface";
    case Phase::cie_matrix: return "cie_matrix";
    case Phase::cie_inclusion: return "cie_inclusion";
    case Phase::cie_interface: return "cie_interface";
  }
  return "?";
}

inline ElementKind parse_element_kind(std::string_view s) {
  if (s == "quad4") return ElementKind::quad4;
  if (s == "tri3") return ElementKind::tri3;
  if (s == "cie4") return ElementKind::cie4;
  throw Error("unknown element kind '" + std::string(s) + "'");
}

inline Phase parse_phase(std::string_view s) {
  if (s == "matrix") return Phase::matrix;
  if (s == "inclusion") return Phase::inclusion;
  if (s == "interface") return Phase::interface;
  if (s == "cie_matrix") return Phase::cie_matrix;
  if (s == "cie_inclusion") return Phase::cie_inclusion;
  if (s == "cie_interface") return Phase::cie_interface;
  throw Error("unknown phase '" + std::string(s) + "'");
}

template <class T>
constexpr T macaulay(T x) { return x > T(0) ? x : T(0); }

}  // namespace mpfrac
