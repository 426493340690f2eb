#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "reslab/analytic.hpp"
#include "reslab/base.hpp"
#include "reslab/compact_set.hpp"
#include "reslab/matrix.hpp"

namespace reslab {

struct ContourCircle {
  cplx center;
  double radius;
};

/// Integration contour: union of circles. Empty circle list means "choose
/// automatically from the spectrum".
struct ContourSpec {
  std::vector<ContourCircle> circles;
  bool automatic() const { return circles.empty(); }
};

/// Circles enclosing sigma(T): single-linkage clusters of the eigenvalues,
/// cut at half the spectral diameter, each wrapped with a safety margin.
ContourSpec default_contour(const ComplexMatrix& T, const Tolerances& tols = default_tols());

/// Cauchy-integral functional calculus with adaptive trapezoid quadrature
/// (node doubling until the relative Frobenius change drops below tols.quad).
ComplexMatrix contour_apply(const ComplexMatrix& T, const std::function<cplx(cplx)>& f,
                            const ContourSpec& contour = {},
                            const Tolerances& tols = default_tols());

ComplexMatrix dunford_apply(const ComplexMatrix& T, const AnalyticFunction& f,
                            const ContourSpec& contour = {},
                            const Tolerances& tols = default_tols());

/// Structure-exploiting evaluation of f(T): per diagonal block, Horner for
/// polynomials and p(B) q(B)^{-1} for rationals. Used as the quadrature
/// cross-check and as the fast path for large block-diagonal operators.
ComplexMatrix apply_analytic_exact(const ComplexMatrix& T, const AnalyticFunction& f);

/// The cofactor of z at its preimage fan:
///   phi(lambda) = (f(lambda) - z) / prod_j (lambda - lambda_j)
/// with removable singularities at the lambda_j filled by Taylor data; near a
/// fan point (within tols.remove) the filled local expansion is used.
class RootCofactor {
 public:
  RootCofactor(const AnalyticFunction& f, const PreimageFan& fan,
               const Tolerances& tols = default_tols());
  cplx operator()(cplx lambda) const;
  const PreimageFan& fan() const { return fan_; }

 private:
  AnalyticFunction f_;
  PreimageFan fan_;
  Tolerances tols_;
  std::vector<cplx> fill_value_;  // filled phi(lambda_j), one per fan entry
  std::vector<cplx> fill_slope_;  // filled phi'(lambda_j), one per fan entry
};

/// Coefficients c_j = prod_{k != j} (lambda_j - lambda_k)^{-1} of the
/// partial-fraction expansion of 1/prod(lambda - lambda_j). Requires every
/// fan entry simple and pairwise separated by tols.cluster.
std::vector<cplx> partial_fraction_coeffs(const PreimageFan& fan,
                                          const Tolerances& tols = default_tols());

/// Difference quotient psi(t) = (f(t) - f(lambda)) / (t - lambda), computed
/// by synthetic division so evaluation is exact at t = lambda (= f'(lambda)).
/// Kept as explicit polynomial/rational data so psi(T) is a direct Horner or
/// solve, not a quadrature.
class DifferenceQuotient {
 public:
  DifferenceQuotient(const AnalyticFunction& f, cplx lambda);
  cplx operator()(cplx t) const;
  cplx anchor() const { return lambda_; }
  /// psi(T), evaluated exactly per diagonal block.
  ComplexMatrix apply(const ComplexMatrix& T) const;

 private:
  Polynomial num_;  // quotient polynomial (in t, or in t - center for series)
  Polynomial den_;  // 1 unless f is rational
  bool rational_ = false;
  bool series_ = false;
  double radius_ = 0.0;
  cplx center_{0.0, 0.0};
  cplx lambda_{0.0, 0.0};
};

struct IdentityCheckResult {
  double residual;                 // ||LHS - RHS|| / ||LHS||, spectral norm
  double cofactor_inverse_norm;    // ||phi_z(T)^{-1}||
  std::vector<cplx> coeffs;        // partial-fraction coefficients
  std::vector<double> term_resolvent_norms;
  PreimageFan fan;
  nlohmann::json to_json() const;
};

/// Checks (f(T) - z)^{-1} = phi_z(T)^{-1} sum_j c_j (T - lambda_j)^{-1}
/// against the directly inverted left side.
IdentityCheckResult resolvent_identity_check(const ComplexMatrix& T, const AnalyticFunction& f,
                                             cplx z, const RegionConfig& region,
                                             const ContourSpec& contour = {},
                                             const Tolerances& tols = default_tols());

struct CofactorInverseScan {
  std::vector<double> per_z_sup;  // sup over the shrunk region of 1/|phi_z|
  double overall_sup = 0.0;
  std::vector<cplx> z_values;
};

/// Scans sup_{lambda} 1/|phi_z(lambda)| over the region shrunk by
/// inner_margin, for each z in z_samples. Bounded sup certifies the uniform
/// invertibility hypothesis; blow-up flags a critical value.
CofactorInverseScan cofactor_inverse_scan(const AnalyticFunction& f,
                                          const std::vector<cplx>& z_samples,
                                          const RegionConfig& region, int grid = 96,
                                          const Tolerances& tols = default_tols());

struct BranchRecord {
  cplx lambda;          // fan entry
  int case_id;          // 1 = clear of branch discs, 2 = inside one
  int branch;           // index into region.branch_neighborhoods, -1 for case 1
  double abs_coeff;     // |c_j|
  double dist_to_set;   // dist(lambda, K)
  double case2_ratio;   // |c_j| * |lambda - xi|^(m-1), case 2 only (else 0)
  double transfer_bound;  // dist(z, f(K)) / (dist(lambda, K) * |lambda - xi|^(m-1))
};

/// Classifies each preimage of z by branch-disc membership and reports the
/// quantities controlling the partial-fraction coefficients in each case.
std::vector<BranchRecord> branch_case_diagnostics(const AnalyticFunction& f, cplx z,
                                                  const PreimageFan& fan,
                                                  const CriticalData& critical,
                                                  const CompactSet& K,
                                                  const RegionConfig& region,
                                                  const Tolerances& tols = default_tols());

/// Empirical separation of branches: the smallest distance between two
/// preimages of a common z that do not share a branch disc.
double empirical_preimage_gap(const AnalyticFunction& f, const RegionConfig& region,
                              const std::vector<cplx>& z_grid,
                              const Tolerances& tols = default_tols());

struct DerivativeFloor {
  double tau;    // min |f'| over the shrunk region
  double rho;    // tau * inner_margin_radius / 4
  cplx argmin;
};

/// Grid minimum of |f'| over the region shrunk by inner_margin, with one
/// Newton polish step toward a zero of f' when that improves the value.
DerivativeFloor derivative_floor(const AnalyticFunction& f, const RegionConfig& region,
                                 int grid = 128);

}  // namespace reslab
