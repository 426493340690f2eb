#pragma once

#include <utility>
#include <vector>

#include "json.hpp"
#include "reslab/base.hpp"
#include "reslab/compact_set.hpp"

namespace reslab {

/// Dense univariate polynomial, coefficients ascending by degree.
class Polynomial {
 public:
  Polynomial() : coeffs_{cplx{0.0, 0.0}} {}
  explicit Polynomial(std::vector<cplx> coeffs);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  cplx leading() const { return coeffs_.back(); }
  bool is_zero() const;

  cplx eval(cplx t) const;
  Polynomial derivative() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scaled(cplx s) const;
  Polynomial shifted_argument(cplx c) const;  // p(t + c)

  /// Exact synthetic division by (t - root): quotient and remainder.
  std::pair<Polynomial, cplx> deflate(cplx root) const;

  /// All roots via companion-matrix eigenvalues plus Newton polish.
  std::vector<cplx> roots() const;

 private:
  std::vector<cplx> coeffs_;
};

/// Analytic map f: polynomial, rational, or truncated power series. The
/// series variant evaluates only strictly inside 0.9 x convergence_radius.
class AnalyticFunction {
 public:
  enum class Variant { polynomial, rational, power_series };

  static AnalyticFunction polynomial(std::vector<cplx> coeffs);
  static AnalyticFunction polynomial(Polynomial p);
  static AnalyticFunction rational(Polynomial numerator, Polynomial denominator);
  static AnalyticFunction power_series(std::vector<cplx> coeffs, double convergence_radius,
                                       cplx center = cplx{0.0, 0.0});

  Variant variant() const { return variant_; }
  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }
  double convergence_radius() const { return radius_; }
  cplx series_center() const { return center_; }

  cplx eval(cplx t) const;
  cplx derivative_at(cplx t, int order = 1) const;
  AnalyticFunction derivative() const;

  bool in_domain(cplx t) const;
  /// Largest disc around `center` on which evaluation is allowed (infinite
  /// for polynomials; limited by poles or the series radius otherwise).
  double domain_clearance(cplx center) const;

  nlohmann::json to_json() const;
  static AnalyticFunction from_json(const nlohmann::json& j);

 private:
  AnalyticFunction() = default;
  Variant variant_ = Variant::polynomial;
  Polynomial num_;            // polynomial / series coefficients (series: in t - center)
  Polynomial den_;            // rational only
  double radius_ = 0.0;       // series only
  cplx center_{0.0, 0.0};     // series only
};

AnalyticFunction multiply(const AnalyticFunction& f, const AnalyticFunction& g);

struct CriticalPoint {
  cplx xi;
  int order;  // m >= 2: 1 + multiplicity of xi as a zero of f'
  cplx value; // f(xi)
};

struct CriticalData {
  std::vector<CriticalPoint> points;
};

/// Zeros of f' inside region.omega with orders and critical values.
CriticalData critical_data(const AnalyticFunction& f, const RegionConfig& region,
                           const Tolerances& tols = default_tols());

/// Preimage fan of z: all solutions of f(lambda) = z inside region.omega.
struct PreimageFan {
  struct Entry {
    cplx lambda;
    int multiplicity;
  };
  cplx z;
  std::vector<Entry> entries;
  int count = 0;     // k(z), multiplicities included
  int bound_n0 = 0;  // uniform bound on k(z)
  bool complete = true;  // certified for polynomial/rational; heuristic for series

  std::vector<cplx> flatten() const;
  bool all_simple() const;
};

PreimageFan preimages(const AnalyticFunction& f, cplx z, const RegionConfig& region,
                      const Tolerances& tols = default_tols());

}  // namespace reslab
