#include "reslab/analytic.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace reslab {

namespace {

void require_finite_coeffs(const std::vector<cplx>& coeffs) {
  for (const cplx& c : coeffs)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      fail(Errc::NonFinite, "polynomial coefficient is not finite");
}

std::vector<cplx> trim_trailing_zeros(std::vector<cplx> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == cplx{0.0, 0.0}) coeffs.pop_back();
  if (coeffs.empty()) coeffs.push_back({0.0, 0.0});
  return coeffs;
}

bool lex_less(const cplx& a, const cplx& b) {
  return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
}

/// Greedy clustering of sorted values at the given radius; returns
/// (representative = cluster mean, size) pairs in first-seen order.
std::vector<std::pair<cplx, int>> cluster_points(std::vector<cplx> values, double radius) {
  std::sort(values.begin(), values.end(), lex_less);
  std::vector<cplx> reps, sums;
  std::vector<int> sizes;
  for (const cplx& v : values) {
    int hit = -1;
    for (std::size_t g = 0; g < reps.size(); ++g)
      if (std::abs(v - reps[g]) <= radius) {
        hit = static_cast<int>(g);
        break;
      }
    if (hit < 0) {
      reps.push_back(v);
      sums.push_back(v);
      sizes.push_back(1);
    } else {
      sums[hit] += v;
      ++sizes[hit];
      reps[hit] = sums[hit] / static_cast<double>(sizes[hit]);
    }
  }
  std::vector<std::pair<cplx, int>> out;
  out.reserve(reps.size());
  for (std::size_t g = 0; g < reps.size(); ++g) out.emplace_back(reps[g], sizes[g]);
  return out;
}

/// A few guarded Newton steps; keeps the iterate only while |p| improves.
cplx polish_root(const Polynomial& p, const Polynomial& dp, cplx x, int steps = 4) {
  double best = std::abs(p.eval(x));
  for (int i = 0; i < steps; ++i) {
    const cplx d = dp.eval(x);
    if (std::abs(d) < 1e-300) break;
    const cplx next = x - p.eval(x) / d;
    const double val = std::abs(p.eval(next));
    if (!(val < best)) break;
    x = next;
    best = val;
  }
  return x;
}

}  // namespace

Polynomial::Polynomial(std::vector<cplx> coeffs) : coeffs_(trim_trailing_zeros(std::move(coeffs))) {
  require_finite_coeffs(coeffs_);
}

bool Polynomial::is_zero() const { return degree() == 0 && coeffs_[0] == cplx{0.0, 0.0}; }

cplx Polynomial::eval(cplx t) const {
  cplx acc{0.0, 0.0};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (degree() == 0) return Polynomial({cplx{0.0, 0.0}});
  std::vector<cplx> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k)
    d[k - 1] = coeffs_[k] * static_cast<double>(k);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<cplx> out(std::max(coeffs_.size(), o.coeffs_.size()), cplx{0.0, 0.0});
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) out[i] += o.coeffs_[i];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o.scaled(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return Polynomial({cplx{0.0, 0.0}});
  std::vector<cplx> out(coeffs_.size() + o.coeffs_.size() - 1, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * o.coeffs_[j];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::scaled(cplx s) const {
  std::vector<cplx> out = coeffs_;
  for (cplx& c : out) c *= s;
  return Polynomial(std::move(out));
}

Polynomial Polynomial::shifted_argument(cplx c) const {
  // Taylor coefficients at c via the synthetic-division cascade.
  std::vector<cplx> work = coeffs_;
  std::vector<cplx> out;
  out.reserve(coeffs_.size());
  while (true) {
    const std::size_t m = work.size() - 1;
    if (m == 0) {
      out.push_back(work[0]);
      break;
    }
    std::vector<cplx> q(m);
    q[m - 1] = work[m];
    for (std::size_t k = m - 1; k >= 1; --k) q[k - 1] = work[k] + c * q[k];
    out.push_back(work[0] + c * q[0]);
    work = std::move(q);
  }
  return Polynomial(std::move(out));
}

std::pair<Polynomial, cplx> Polynomial::deflate(cplx root) const {
  const int n = degree();
  if (n == 0) return {Polynomial({cplx{0.0, 0.0}}), coeffs_[0]};
  std::vector<cplx> q(static_cast<std::size_t>(n), cplx{0.0, 0.0});
  q[n - 1] = coeffs_[n];
  for (int k = n - 1; k >= 1; --k) q[k - 1] = coeffs_[k] + root * q[k];
  const cplx rem = coeffs_[0] + root * q[0];
  return {Polynomial(std::move(q)), rem};
}

std::vector<cplx> Polynomial::roots() const {
  const int n = degree();
  if (n == 0) return {};
  if (n == 1) return {-coeffs_[0] / coeffs_[1]};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    companion(i, n - 1) = -coeffs_[i] / coeffs_[n];
    if (i + 1 < n) companion(i + 1, i) = 1.0;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  if (es.info() != Eigen::Success) fail(Errc::RootFindingFailure, "companion eigensolver failed");
  const Polynomial dp = derivative();
  std::vector<cplx> out;
  out.reserve(n);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    out.push_back(polish_root(*this, dp, es.eigenvalues()(i)));
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

AnalyticFunction AnalyticFunction::polynomial(std::vector<cplx> coeffs) {
  return polynomial(Polynomial(std::move(coeffs)));
}

AnalyticFunction AnalyticFunction::polynomial(Polynomial p) {
  if (p.degree() < 1) fail(Errc::DomainError, "function must be nonconstant");
  AnalyticFunction f;
  f.variant_ = Variant::polynomial;
  f.num_ = std::move(p);
  return f;
}

AnalyticFunction AnalyticFunction::rational(Polynomial numerator, Polynomial denominator) {
  if (denominator.is_zero()) fail(Errc::DomainError, "rational denominator must be nonzero");
  if (numerator.degree() < 1 && denominator.degree() < 1)
    fail(Errc::DomainError, "function must be nonconstant");
  AnalyticFunction f;
  f.variant_ = Variant::rational;
  f.num_ = std::move(numerator);
  f.den_ = std::move(denominator);
  return f;
}

AnalyticFunction AnalyticFunction::power_series(std::vector<cplx> coeffs,
                                                double convergence_radius, cplx center) {
  if (!(convergence_radius > 0.0) || !std::isfinite(convergence_radius))
    fail(Errc::DomainError, "convergence radius must be positive and finite");
  Polynomial p(std::move(coeffs));
  if (p.degree() < 1) fail(Errc::DomainError, "function must be nonconstant");
  AnalyticFunction f;
  f.variant_ = Variant::power_series;
  f.num_ = std::move(p);
  f.radius_ = convergence_radius;
  f.center_ = center;
  return f;
}

cplx AnalyticFunction::eval(cplx t) const {
  switch (variant_) {
    case Variant::polynomial:
      return num_.eval(t);
    case Variant::rational: {
      const cplx q = den_.eval(t);
      if (std::abs(q) < 1e-140) fail(Errc::DomainError, "rational function evaluated at a pole");
      return num_.eval(t) / q;
    }
    case Variant::power_series: {
      if (!in_domain(t))
        fail(Errc::DomainError,
             "power series evaluated outside 0.9 x convergence radius of its center");
      return num_.eval(t - center_);
    }
  }
  return {};
}

bool AnalyticFunction::in_domain(cplx t) const {
  switch (variant_) {
    case Variant::polynomial:
      return true;
    case Variant::rational:
      return std::abs(den_.eval(t)) >= 1e-140;
    case Variant::power_series:
      return std::abs(t - center_) < 0.9 * radius_;
  }
  return false;
}

double AnalyticFunction::domain_clearance(cplx center) const {
  switch (variant_) {
    case Variant::polynomial:
      return std::numeric_limits<double>::infinity();
    case Variant::rational: {
      double clearance = std::numeric_limits<double>::infinity();
      for (cplx pole : den_.roots()) clearance = std::min(clearance, std::abs(center - pole));
      return clearance;
    }
    case Variant::power_series:
      return std::max(0.0, 0.9 * radius_ - std::abs(center - center_));
  }
  return 0.0;
}

AnalyticFunction AnalyticFunction::derivative() const {
  switch (variant_) {
    case Variant::polynomial:
      return polynomial(num_.derivative());
    case Variant::rational:
      return rational(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
    case Variant::power_series: {
      AnalyticFunction d;
      d.variant_ = Variant::power_series;
      d.num_ = num_.derivative();
      d.radius_ = radius_;
      d.center_ = center_;
      return d;
    }
  }
  return *this;
}

cplx AnalyticFunction::derivative_at(cplx t, int order) const {
  // Differentiates at the Polynomial level: orders past the degree are a
  // plain zero, not a constant-function construction error.
  if (order <= 0) return eval(t);
  switch (variant_) {
    case Variant::polynomial: {
      Polynomial p = num_;
      for (int k = 0; k < order && !p.is_zero(); ++k) p = p.derivative();
      return p.eval(t);
    }
    case Variant::rational: {
      if (std::abs(den_.eval(t)) < 1e-140)
        fail(Errc::DomainError, "rational function evaluated at a pole");
      Polynomial n = num_;
      Polynomial d = den_;
      for (int k = 0; k < order; ++k) {
        Polynomial nn = n.derivative() * d - n * d.derivative();
        d = d * d;
        n = std::move(nn);
      }
      return n.eval(t) / d.eval(t);
    }
    case Variant::power_series: {
      if (!in_domain(t))
        fail(Errc::DomainError,
             "power series evaluated outside 0.9 x convergence radius of its center");
      Polynomial p = num_;
      for (int k = 0; k < order && !p.is_zero(); ++k) p = p.derivative();
      return p.eval(t - center_);
    }
  }
  return {};
}

nlohmann::json AnalyticFunction::to_json() const {
  auto coeff_arrays = [](const Polynomial& p) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (const cplx& c : p.coeffs()) {
      re.push_back(c.real());
      im.push_back(c.imag());
    }
    return std::pair{std::move(re), std::move(im)};
  };
  switch (variant_) {
    case Variant::polynomial: {
      auto [re, im] = coeff_arrays(num_);
      return {{"variant", "polynomial"}, {"coeffs_re", std::move(re)}, {"coeffs_im", std::move(im)}};
    }
    case Variant::rational: {
      auto [nre, nim] = coeff_arrays(num_);
      auto [dre, dim] = coeff_arrays(den_);
      return {{"variant", "rational"},
              {"num_re", std::move(nre)},
              {"num_im", std::move(nim)},
              {"den_re", std::move(dre)},
              {"den_im", std::move(dim)}};
    }
    case Variant::power_series: {
      auto [re, im] = coeff_arrays(num_);
      return {{"variant", "power_series"},
              {"coeffs_re", std::move(re)},
              {"coeffs_im", std::move(im)},
              {"convergence_radius", radius_},
              {"center", nlohmann::json::array({center_.real(), center_.imag()})}};
    }
  }
  return {};
}

namespace {

std::vector<cplx> coeffs_from_json(const nlohmann::json& j, const char* re_key,
                                   const char* im_key) {
  if (!j.contains(re_key) || !j.contains(im_key) || !j[re_key].is_array() ||
      !j[im_key].is_array() || j[re_key].size() != j[im_key].size() || j[re_key].empty())
    fail(Errc::ParseError, std::string("function JSON needs matching arrays ") + re_key + "/" +
                               im_key);
  std::vector<cplx> coeffs;
  for (std::size_t i = 0; i < j[re_key].size(); ++i) {
    if (!j[re_key][i].is_number() || !j[im_key][i].is_number())
      fail(Errc::ParseError, "coefficients must be numbers");
    coeffs.emplace_back(j[re_key][i].get<double>(), j[im_key][i].get<double>());
  }
  return coeffs;
}

}  // namespace

AnalyticFunction AnalyticFunction::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("variant") || !j["variant"].is_string())
    fail(Errc::ParseError, "function JSON needs a string field 'variant'");
  const std::string variant = j["variant"].get<std::string>();
  if (variant == "polynomial") return polynomial(coeffs_from_json(j, "coeffs_re", "coeffs_im"));
  if (variant == "rational")
    return rational(Polynomial(coeffs_from_json(j, "num_re", "num_im")),
                    Polynomial(coeffs_from_json(j, "den_re", "den_im")));
  if (variant == "power_series") {
    if (!j.contains("convergence_radius") || !j["convergence_radius"].is_number())
      fail(Errc::ParseError, "power_series needs a numeric convergence_radius");
    cplx center{0.0, 0.0};
    if (j.contains("center")) {
      if (!j["center"].is_array() || j["center"].size() != 2)
        fail(Errc::ParseError, "power_series center must be a [re, im] pair");
      center = {j["center"][0].get<double>(), j["center"][1].get<double>()};
    }
    return power_series(coeffs_from_json(j, "coeffs_re", "coeffs_im"),
                        j["convergence_radius"].get<double>(), center);
  }
  fail(Errc::ParseError, "unknown function variant '" + variant + "'");
}

AnalyticFunction multiply(const AnalyticFunction& f, const AnalyticFunction& g) {
  using V = AnalyticFunction::Variant;
  if (f.variant() == V::power_series || g.variant() == V::power_series)
    fail(Errc::DomainError, "products of power-series functions are not supported");
  if (f.variant() == V::polynomial && g.variant() == V::polynomial)
    return AnalyticFunction::polynomial(f.numerator() * g.numerator());
  const Polynomial one({cplx{1.0, 0.0}});
  const Polynomial fd = f.variant() == V::rational ? f.denominator() : one;
  const Polynomial gd = g.variant() == V::rational ? g.denominator() : one;
  return AnalyticFunction::rational(f.numerator() * g.numerator(), fd * gd);
}

namespace {

/// Zeros (with multiplicity) of the analytic map inside the region, via the
/// appropriate polynomial: p for polynomials, p - z q for rationals, the
/// truncated series for power series (domain-capped).
struct ZeroSet {
  std::vector<std::pair<cplx, int>> zeros;  // (location, multiplicity)
  int candidate_degree = 0;
};

void check_rational_poles(const AnalyticFunction& f, const RegionConfig& region) {
  if (f.variant() != AnalyticFunction::Variant::rational) return;
  for (cplx pole : f.denominator().roots())
    if (region.contains(pole))
      fail(Errc::BadRegion, "rational denominator has a zero inside region omega");
}

}  // namespace

std::vector<cplx> PreimageFan::flatten() const {
  std::vector<cplx> out;
  for (const auto& e : entries)
    for (int i = 0; i < e.multiplicity; ++i) out.push_back(e.lambda);
  return out;
}

bool PreimageFan::all_simple() const {
  for (const auto& e : entries)
    if (e.multiplicity != 1) return false;
  return true;
}

CriticalData critical_data(const AnalyticFunction& f, const RegionConfig& region,
                           const Tolerances& tols) {
  check_rational_poles(f, region);
  // Zeros of f' as zeros of a single polynomial.
  Polynomial target;
  cplx shift{0.0, 0.0};
  bool domain_capped = false;
  switch (f.variant()) {
    case AnalyticFunction::Variant::polynomial:
      target = f.numerator().derivative();
      break;
    case AnalyticFunction::Variant::rational:
      target = f.numerator().derivative() * f.denominator() -
               f.numerator() * f.denominator().derivative();
      break;
    case AnalyticFunction::Variant::power_series:
      target = f.numerator().derivative();
      shift = f.series_center();
      domain_capped = true;
      break;
  }
  CriticalData out;
  if (target.degree() == 0) {
    if (target.is_zero())
      fail(Errc::RootFindingFailure, "derivative vanishes identically; function is constant");
    return out;
  }
  std::vector<cplx> zeros;
  for (cplx u : target.roots()) {
    const cplx xi = u + shift;
    if (domain_capped && std::abs(u) >= 0.9 * f.convergence_radius()) continue;
    if (!region.contains(xi)) continue;
    if (!f.in_domain(xi)) continue;
    zeros.push_back(xi);
  }
  for (const auto& [xi, mult] : cluster_points(std::move(zeros), tols.cluster)) {
    const double residual = std::abs(f.derivative_at(xi, 1));
    if (residual > tols.root)
      fail(Errc::RootFindingFailure,
           "critical point residual |f'| = " + std::to_string(residual) + " exceeds tolerance");
    out.points.push_back({xi, mult + 1, f.eval(xi)});
  }
  return out;
}

namespace {

ZeroSet polynomial_preimage_zeros(const AnalyticFunction& f, cplx z, const RegionConfig& region,
                                  const Tolerances& tols) {
  Polynomial g;
  if (f.variant() == AnalyticFunction::Variant::polynomial) {
    std::vector<cplx> coeffs = f.numerator().coeffs();
    coeffs[0] -= z;
    g = Polynomial(std::move(coeffs));
  } else {
    g = f.numerator() - f.denominator().scaled(z);
  }
  ZeroSet out;
  out.candidate_degree =
      std::max(f.numerator().degree(),
               f.variant() == AnalyticFunction::Variant::rational ? f.denominator().degree() : 0);
  if (g.degree() == 0) return out;  // no finite solutions (e.g. f = 1/q with z = 0)
  std::vector<cplx> inside;
  for (cplx root : g.roots()) {
    if (!region.contains(root)) continue;
    if (!f.in_domain(root)) continue;
    inside.push_back(root);
  }
  for (const auto& [lambda, mult] : cluster_points(std::move(inside), tols.cluster)) {
    const double residual = std::abs(f.eval(lambda) - z);
    if (residual > tols.root * (1.0 + std::abs(z)))
      fail(Errc::RootFindingFailure,
           "preimage residual " + std::to_string(residual) + " exceeds tolerance");
    out.zeros.emplace_back(lambda, mult);
  }
  return out;
}

ZeroSet series_preimage_zeros(const AnalyticFunction& f, cplx z, const RegionConfig& region,
                              const Tolerances& tols) {
  // Newton from a deterministic grid of starts over the evaluation disc.
  const cplx c = f.series_center();
  const double reach = 0.9 * f.convergence_radius();
  const AnalyticFunction df = f.derivative();
  const int grid = 24;
  std::vector<cplx> found;
  double typical_scale = 1.0 + std::abs(z);
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      cplx x = c + cplx{(2.0 * (ix + 0.5) / grid - 1.0) * reach,
                        (2.0 * (iy + 0.5) / grid - 1.0) * reach};
      if (std::abs(x - c) >= reach) continue;
      double start_val = std::abs(f.eval(x) - z);
      bool converged = false;
      for (int it = 0; it < 60; ++it) {
        const cplx d = df.eval(x);
        if (std::abs(d) < 1e-300) break;
        cplx next = x - (f.eval(x) - z) / d;
        if (std::abs(next - c) >= reach) break;  // left the trustworthy disc
        x = next;
        if (std::abs(f.eval(x) - z) <= tols.root * typical_scale) {
          converged = true;
          break;
        }
      }
      if (converged) {
        if (region.contains(x)) found.push_back(x);
      } else if (start_val < 1e-3 * typical_scale && std::abs(x - c) < reach) {
        fail(Errc::RootFindingFailure,
             "Newton stalled near an apparent preimage of z; refine the grid or tolerances");
      }
    }
  ZeroSet out;
  out.candidate_degree = f.numerator().degree();
  for (const auto& [lambda, copies] : cluster_points(std::move(found), tols.cluster)) {
    (void)copies;  // many starts converge to one root; that is not a multiplicity
    int mult = 1;
    if (std::abs(df.eval(lambda)) <= std::sqrt(tols.root)) mult = 2;
    out.zeros.emplace_back(lambda, mult);
  }
  return out;
}

}  // namespace

PreimageFan preimages(const AnalyticFunction& f, cplx z, const RegionConfig& region,
                      const Tolerances& tols) {
  check_rational_poles(f, region);
  PreimageFan fan;
  fan.z = z;
  ZeroSet zs;
  if (f.variant() == AnalyticFunction::Variant::power_series) {
    zs = series_preimage_zeros(f, z, region, tols);
    fan.complete = false;
  } else {
    zs = polynomial_preimage_zeros(f, z, region, tols);
    fan.complete = true;
  }
  for (const auto& [lambda, mult] : zs.zeros) {
    fan.entries.push_back({lambda, mult});
    fan.count += mult;
  }
  fan.bound_n0 = zs.candidate_degree;
  return fan;
}

}  // namespace reslab
