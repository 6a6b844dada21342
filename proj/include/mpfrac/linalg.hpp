#pragma once

// Sparse assembly with a precomputed pattern and a sparse LDL^T solver
// wrapper (Eigen SimplicialLDLT with AMD ordering).

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "mpfrac/types.hpp"

namespace mpfrac {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

/// Symmetric sparse matrix whose nonzero pattern is fixed by per-element DOF
/// lists. Element matrices are scattered through precomputed value slots, so
/// assembly order (and hence round-off) is fixed.
class SparseAssembler {
 public:
  SparseAssembler() = default;

  SparseAssembler(const std::vector<std::vector<int>>& element_dofs, int ndof) {
    build(element_dofs, ndof);
  }

  void build(const std::vector<std::vector<int>>& element_dofs, int ndof) {
    dofs_ = element_dofs;
    std::vector<Eigen::Triplet<double, int>> trip;
    std::size_t total = 0;
    for (const auto& d : dofs_) total += d.size() * d.size();
    trip.reserve(total);
    for (const auto& d : dofs_)
      for (int i : d)
        for (int j : d) trip.emplace_back(i, j, 0.0);
    A_.resize(ndof, ndof);
    A_.setFromTriplets(trip.begin(), trip.end());
    A_.makeCompressed();
    offsets_.assign(dofs_.size() + 1, 0);
    slots_.clear();
    slots_.reserve(total);
    for (std::size_t e = 0; e < dofs_.size(); ++e) {
      const auto& d = dofs_[e];
      for (int j : d)
        for (int i : d) slots_.push_back(find_slot(i, j));
      offsets_[e + 1] = static_cast<int>(slots_.size());
    }
  }

  int size() const { return static_cast<int>(A_.rows()); }

  void zero() { std::fill(A_.valuePtr(), A_.valuePtr() + A_.nonZeros(), 0.0); }

  /// Adds a dense element matrix (column-major local layout matching the
  /// element's DOF list).
  template <class Mat>
  void add(std::size_t element, const Mat& Ke) {
    const int n = static_cast<int>(dofs_[element].size());
    const int* s = slots_.data() + offsets_[element];
    double* v = A_.valuePtr();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) v[s[j * n + i]] += Ke(i, j);
  }

  /// Replaces rows and columns of fixed DOFs by the identity.
  void apply_dirichlet(const std::vector<char>& fixed) {
    for (int j = 0; j < A_.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(A_, j); it; ++it)
        if (fixed[it.row()] || fixed[j]) it.valueRef() = it.row() == j ? 1.0 : 0.0;
  }

  const SparseMatrix& matrix() const { return A_; }
  SparseMatrix& matrix() { return A_; }
  const std::vector<int>& element_dofs(std::size_t e) const { return dofs_[e]; }

 private:
  int find_slot(int i, int j) const {
    const int* outer = A_.outerIndexPtr();
    const int* inner = A_.innerIndexPtr();
    const int* b = inner + outer[j];
    const int* e = inner + outer[j + 1];
    const int* p = std::lower_bound(b, e, i);
    if (p == e || *p != i) throw Error("internal: missing sparse slot");
    return static_cast<int>(p - inner);
  }

  SparseMatrix A_;
  std::vector<std::vector<int>> dofs_;
  std::vector<int> offsets_;
  std::vector<int> slots_;
};

/// LDL^T factorization that keeps the symbolic analysis and skips
/// refactorization when the matrix values did not change.
class LinearSolver {
 public:
  enum class Status { ok, singular, indefinite };

  Status factorize(const SparseMatrix& A) {
    const std::size_t nnz = static_cast<std::size_t>(A.nonZeros());
    if (analyzed_ && nnz == values_.size() &&
        std::equal(values_.begin(), values_.end(), A.valuePtr())) {
      ++reused_;
      return status_;
    }
    if (!analyzed_ || nnz != values_.size()) {
      ldlt_.analyzePattern(A);
      analyzed_ = true;
    }
    values_.assign(A.valuePtr(), A.valuePtr() + nnz);
    A_ = &A;
    ldlt_.factorize(A);
    ++factorizations_;
    status_ = Status::ok;
    if (ldlt_.info() != Eigen::Success) {
      status_ = Status::singular;
      return status_;
    }
    const auto& d = ldlt_.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    min_pivot_ = d.minCoeff();
    pivot_ratio_ = dmax > 0.0 ? d.cwiseAbs().minCoeff() / dmax : 0.0;
    if (!std::isfinite(min_pivot_) || pivot_ratio_ < 1e-15) status_ = Status::singular;
    else if (min_pivot_ <= 0.0) status_ = Status::indefinite;
    return status_;
  }

  /// Solves with up to three steps of iterative refinement against the
  /// factorized matrix.
  Vector solve(const Vector& b, const SparseMatrix& A) const {
    Vector x = ldlt_.solve(b);
    const double bn = std::max(b.norm(), 1e-300);
    for (int k = 0; k < 3; ++k) {
      const Vector r = b - A.selfadjointView<Eigen::Lower>() * x;
      last_residual_ = r.norm() / bn;
      if (last_residual_ <= 1e-12) break;
      x += ldlt_.solve(r);
    }
    last_residual_ = (b - A.selfadjointView<Eigen::Lower>() * x).norm() / bn;
    return x;
  }

  double pivot_ratio() const { return pivot_ratio_; }
  double min_pivot() const { return min_pivot_; }
  double last_relative_residual() const { return last_residual_; }
  long factorizations() const { return factorizations_; }
  long reused() const { return reused_; }

 private:
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  std::vector<double> values_;
  const SparseMatrix* A_ = nullptr;
  Status status_ = Status::ok;
  double pivot_ratio_ = 1.0;
  double min_pivot_ = 1.0;
  mutable double last_residual_ = 0.0;
  long factorizations_ = 0;
  long reused_ = 0;
};

/// One-shot symmetric solve; the result satisfies a relative residual of
/// 1e-10 or an error reporting the pivot ratio is raised.
inline Vector linear_solve(const SparseMatrix& A, const Vector& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw SolverError("linear_solve: size mismatch");
  LinearSolver s;
  const auto st = s.factorize(A);
  auto diag = [&s] {
    std::ostringstream os;
    os << " (pivot ratio " << s.pivot_ratio() << ")";
    return os.str();
  };
  if (st == LinearSolver::Status::singular) throw SolverError("linear_solve: singular matrix" + diag());
  const Vector x = s.solve(b, A);
  if (!(s.last_relative_residual() <= 1e-10))
    throw SolverError("linear_solve: breakdown, relative residual " +
                      std::to_string(s.last_relative_residual()) + diag());
  return x;
}

}  // namespace mpfrac
