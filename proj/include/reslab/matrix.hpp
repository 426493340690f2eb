#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "json.hpp"
#include "reslab/base.hpp"

namespace reslab {

/// Immutable dense square complex matrix with copy-on-share semantics
/// (copies are pointer copies; the payload is never mutated).
///
/// Construction validates finiteness and precomputes two things every
/// downstream operation leans on:
///  - the exact block-diagonal partition (connected components of the
///    symmetrized off-diagonal sparsity pattern, exact-zero test), which turns
///    sigma_min of diagonal and diag-plus-Jordan operators into O(dim) work;
///  - the operator (spectral) norm, used by the spectral-proximity guard.
class ComplexMatrix {
 public:
  explicit ComplexMatrix(Eigen::MatrixXcd entries);

  static ComplexMatrix jordan(cplx eigenvalue, int n);
  static ComplexMatrix diagonal(const std::vector<cplx>& points);
  static ComplexMatrix direct_sum(const ComplexMatrix& a, const ComplexMatrix& b);
  /// Strictly random upper-triangular matrix with its diagonal (= spectrum)
  /// uniform in the disc D(center, radius). Deterministic in seed.
  static ComplexMatrix random_triangular(int n, cplx center, double radius, std::uint64_t seed);

  int dim() const { return static_cast<int>(impl_->m.rows()); }
  const Eigen::MatrixXcd& data() const { return impl_->m; }
  cplx operator()(int r, int c) const { return impl_->m(r, c); }

  /// Largest singular value (computed once at construction).
  double operator_norm() const { return impl_->op_norm; }

  /// Indices grouped by irreducible diagonal block, in row order.
  const std::vector<std::vector<int>>& diagonal_blocks() const { return impl_->blocks; }

  bool is_upper_triangular() const { return impl_->upper_tri; }
  bool is_lower_triangular() const { return impl_->lower_tri; }

  nlohmann::json to_json() const;
  static ComplexMatrix from_json(const nlohmann::json& j);
  /// CSV with header `row,col,re,im`, zero-based indices; omitted cells are 0.
  static ComplexMatrix from_csv(std::istream& in);

 private:
  struct Impl {
    Eigen::MatrixXcd m;
    std::vector<std::vector<int>> blocks;
    double op_norm = 0.0;
    bool upper_tri = false;
    bool lower_tri = false;
  };
  std::shared_ptr<const Impl> impl_;
};

struct SpectrumResult {
  struct Entry {
    cplx value;
    int multiplicity;
  };
  std::vector<Entry> eigenvalues;

  int total_multiplicity() const;
  /// Eigenvalues repeated per multiplicity, in stored order.
  std::vector<cplx> flatten() const;
};

/// Smallest singular value of T.
double min_singular_value(const ComplexMatrix& T);

/// Spectral norm of (T - lambda I)^{-1} = 1/sigma_min(T - lambda I).
/// Throws SpectrumProximity when sigma_min < tols.sing * (1 + ||T||).
double resolvent_norm(const ComplexMatrix& T, cplx lambda,
                      const Tolerances& tols = default_tols());

/// Eigenvalues with algebraic multiplicities; exact diagonal read-off for
/// triangular input, per-block dense solve otherwise.
SpectrumResult spectrum(const ComplexMatrix& T, const Tolerances& tols = default_tols());

}  // namespace reslab
