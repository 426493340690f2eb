#include "reslab/calculus.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace reslab {

namespace {

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  if (m.rows() > 64) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().maxCoeff();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().maxCoeff();
}

std::vector<cplx> distinct_eigenvalues(const ComplexMatrix& T, const Tolerances& tols) {
  std::vector<cplx> vals;
  for (const auto& e : spectrum(T, tols).eigenvalues) vals.push_back(e.value);
  return vals;
}

struct Cluster {
  cplx center;
  double radius;
  std::vector<int> members;
};

std::vector<Cluster> single_linkage_clusters(const std::vector<cplx>& pts, double cut) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(pts[i] - pts[j]) < cut) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<Cluster> out;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    double xlo = pts[g[0]].real(), xhi = xlo, ylo = pts[g[0]].imag(), yhi = ylo;
    for (int i : g) {
      xlo = std::min(xlo, pts[i].real());
      xhi = std::max(xhi, pts[i].real());
      ylo = std::min(ylo, pts[i].imag());
      yhi = std::max(yhi, pts[i].imag());
    }
    Cluster c;
    c.center = {(xlo + xhi) / 2.0, (ylo + yhi) / 2.0};
    c.radius = 0.0;
    for (int i : g) c.radius = std::max(c.radius, std::abs(pts[i] - c.center));
    c.members = g;
    out.push_back(std::move(c));
  }
  return out;
}

/// Every eigenvalue must lie strictly inside exactly one circle, with
/// clearance >= tols.clearance from every circle's curve.
void validate_contour(const ContourSpec& contour, const std::vector<cplx>& eigs,
                      const Tolerances& tols) {
  if (contour.circles.empty()) fail(Errc::ContourTooClose, "contour has no circles");
  for (const auto& circle : contour.circles)
    if (!(circle.radius > 0.0))
      fail(Errc::ContourTooClose, "contour circle radius must be positive");
  for (const cplx& e : eigs) {
    int enclosing = 0;
    for (const auto& circle : contour.circles) {
      const double d = std::abs(e - circle.center);
      if (std::abs(d - circle.radius) < tols.clearance) {
        std::ostringstream msg;
        msg << "contour circle passes within " << tols.clearance << " of eigenvalue ("
            << e.real() << "," << e.imag() << ")";
        fail(Errc::ContourTooClose, msg.str());
      }
      if (d < circle.radius) ++enclosing;
    }
    if (enclosing != 1) {
      std::ostringstream msg;
      msg << "eigenvalue (" << e.real() << "," << e.imag() << ") is enclosed by " << enclosing
          << " contour circles; need exactly 1";
      fail(Errc::ContourTooClose, msg.str());
    }
  }
}

/// Domain restrictions of f on the contour: series circles inside the safe
/// disc, rational poles neither enclosed nor near the curve.
void validate_function_domain(const AnalyticFunction& f, const ContourSpec& contour,
                              const Tolerances& tols) {
  if (f.variant() == AnalyticFunction::Variant::power_series) {
    for (const auto& circle : contour.circles)
      if (std::abs(circle.center - f.series_center()) + circle.radius >=
          0.9 * f.convergence_radius())
        fail(Errc::DomainError, "contour circle leaves the power-series evaluation disc");
  }
  if (f.variant() == AnalyticFunction::Variant::rational) {
    for (cplx pole : f.denominator().roots())
      for (const auto& circle : contour.circles) {
        const double d = std::abs(pole - circle.center);
        if (d < circle.radius)
          fail(Errc::DomainError, "contour circle encloses a pole of the function");
        if (std::abs(d - circle.radius) < tols.clearance)
          fail(Errc::DomainError, "contour circle passes too close to a pole of the function");
      }
  }
}

Eigen::MatrixXcd quadrature_pass(const ComplexMatrix& T,
                                 const std::function<cplx(cplx)>& f,
                                 const ContourSpec& contour, int nodes) {
  const int n = T.dim();
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& circle : contour.circles) {
    for (int k = 0; k < nodes; ++k) {
      const double theta = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(nodes);
      const cplx unit{std::cos(theta), std::sin(theta)};
      const cplx lambda = circle.center + circle.radius * unit;
      const Eigen::MatrixXcd shifted = lambda * identity - T.data();
      const Eigen::MatrixXcd resolvent = Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).inverse();
      sum += (circle.radius / static_cast<double>(nodes)) * f(lambda) * unit * resolvent;
    }
  }
  return sum;
}

Eigen::MatrixXcd horner_matrix(const Polynomial& p, const Eigen::MatrixXcd& B) {
  const int n = static_cast<int>(B.rows());
  const auto& coeffs = p.coeffs();
  Eigen::MatrixXcd acc = coeffs.back() * Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t k = coeffs.size() - 1; k-- > 0;) {
    acc = (acc * B).eval();
    acc.diagonal().array() += coeffs[k];
  }
  return acc;
}

Eigen::MatrixXcd extract_block(const Eigen::MatrixXcd& m, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXcd b(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) b(r, c) = m(idx[r], idx[c]);
  return b;
}

Eigen::MatrixXcd apply_polynomial_block(const Polynomial& p, const Eigen::MatrixXcd& B) {
  if (B.rows() == 1) {
    Eigen::MatrixXcd out(1, 1);
    out(0, 0) = p.eval(B(0, 0));
    return out;
  }
  return horner_matrix(p, B);
}

}  // namespace

ContourSpec default_contour(const ComplexMatrix& T, const Tolerances& tols) {
  const std::vector<cplx> eigs = distinct_eigenvalues(T, tols);
  double diameter = 0.0;
  for (std::size_t i = 0; i < eigs.size(); ++i)
    for (std::size_t j = i + 1; j < eigs.size(); ++j)
      diameter = std::max(diameter, std::abs(eigs[i] - eigs[j]));

  // Start from single-linkage clusters cut at half the spectral diameter;
  // merge any cluster whose circle would crowd a foreign eigenvalue.
  std::vector<Cluster> clusters = single_linkage_clusters(eigs, 0.5 * diameter);
  bool merged = true;
  while (merged && clusters.size() > 1) {
    merged = false;
    for (std::size_t a = 0; a < clusters.size() && !merged; ++a) {
      const double ra = 1.25 * clusters[a].radius + tols.clearance;
      for (std::size_t b = 0; b < clusters.size() && !merged; ++b) {
        if (a == b) continue;
        for (int i : clusters[b].members)
          if (std::abs(eigs[i] - clusters[a].center) < ra + 2.0 * tols.clearance) {
            std::vector<cplx> joined;
            for (int m : clusters[a].members) joined.push_back(eigs[m]);
            for (int m : clusters[b].members) joined.push_back(eigs[m]);
            Cluster unioned = single_linkage_clusters(joined, std::numeric_limits<double>::max())[0];
            std::vector<int> members = clusters[a].members;
            members.insert(members.end(), clusters[b].members.begin(), clusters[b].members.end());
            unioned.members = std::move(members);
            clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(std::max(a, b)));
            clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(std::min(a, b)));
            clusters.push_back(std::move(unioned));
            merged = true;
            break;
          }
      }
    }
  }
  ContourSpec spec;
  for (const auto& c : clusters)
    spec.circles.push_back({c.center, 1.25 * c.radius + tols.clearance});
  std::sort(spec.circles.begin(), spec.circles.end(), [](const auto& a, const auto& b) {
    return a.center.real() != b.center.real() ? a.center.real() < b.center.real()
                                              : a.center.imag() < b.center.imag();
  });
  return spec;
}

ComplexMatrix contour_apply(const ComplexMatrix& T, const std::function<cplx(cplx)>& f,
                            const ContourSpec& contour, const Tolerances& tols) {
  const ContourSpec used = contour.automatic() ? default_contour(T, tols) : contour;
  validate_contour(used, distinct_eigenvalues(T, tols), tols);

  Eigen::MatrixXcd prev = quadrature_pass(T, f, used, kQuadratureStartNodes);
  for (int nodes = 2 * kQuadratureStartNodes; nodes <= kQuadratureMaxNodes; nodes *= 2) {
    const Eigen::MatrixXcd next = quadrature_pass(T, f, used, nodes);
    const double diff = (next - prev).norm();
    const double scale = std::max(next.norm(), 1e-300);
    prev = next;
    if (diff / scale < tols.quad) return ComplexMatrix(std::move(prev));
  }
  fail(Errc::QuadratureStall, "quadrature did not converge within " +
                                  std::to_string(kQuadratureMaxNodes) + " nodes per circle");
}

ComplexMatrix dunford_apply(const ComplexMatrix& T, const AnalyticFunction& f,
                            const ContourSpec& contour, const Tolerances& tols) {
  const ContourSpec used = contour.automatic() ? default_contour(T, tols) : contour;
  validate_function_domain(f, used, tols);
  return contour_apply(T, [&f](cplx t) { return f.eval(t); }, used, tols);
}

ComplexMatrix apply_analytic_exact(const ComplexMatrix& T, const AnalyticFunction& f) {
  const int n = T.dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& idx : T.diagonal_blocks()) {
    const Eigen::MatrixXcd B = extract_block(T.data(), idx);
    Eigen::MatrixXcd fB;
    switch (f.variant()) {
      case AnalyticFunction::Variant::polynomial:
        fB = apply_polynomial_block(f.numerator(), B);
        break;
      case AnalyticFunction::Variant::rational: {
        const Eigen::MatrixXcd P = apply_polynomial_block(f.numerator(), B);
        const Eigen::MatrixXcd Q = apply_polynomial_block(f.denominator(), B);
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Q);
        const double rcond = lu.rcond();
        if (!(rcond > 1e-14))
          fail(Errc::DomainError, "denominator of the rational function is singular on a block");
        fB = lu.solve(P);
        break;
      }
      case AnalyticFunction::Variant::power_series: {
        for (const auto& e : spectrum(ComplexMatrix(B)).eigenvalues)
          if (std::abs(e.value - f.series_center()) >= 0.9 * f.convergence_radius())
            fail(Errc::DomainError,
                 "block spectrum leaves the power-series evaluation disc");
        Eigen::MatrixXcd shifted = B;
        shifted.diagonal().array() -= f.series_center();
        fB = apply_polynomial_block(f.numerator(), shifted);
        break;
      }
    }
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c)
        out(idx[r], idx[c]) = fB(static_cast<int>(r), static_cast<int>(c));
  }
  return ComplexMatrix(std::move(out));
}

RootCofactor::RootCofactor(const AnalyticFunction& f, const PreimageFan& fan,
                           const Tolerances& tols)
    : f_(f), fan_(fan), tols_(tols) {
  // Taylor data at each fan entry: with m the entry's multiplicity,
  // a_m = f^(m)(lambda_j)/m!, Q = prod over other entries (with their
  // multiplicities) of (lambda_j - lambda_k):
  //   phi(lambda_j)  = a_m / Q
  //   phi'(lambda_j) = (a_{m+1} - a_m * sum_k mult_k/(lambda_j - lambda_k)) / Q
  fill_value_.reserve(fan_.entries.size());
  fill_slope_.reserve(fan_.entries.size());
  auto factorial = [](int m) {
    double acc = 1.0;
    for (int i = 2; i <= m; ++i) acc *= i;
    return acc;
  };
  for (std::size_t j = 0; j < fan_.entries.size(); ++j) {
    const cplx lj = fan_.entries[j].lambda;
    const int m = fan_.entries[j].multiplicity;
    cplx q{1.0, 0.0};
    cplx log_derivative{0.0, 0.0};
    for (std::size_t k = 0; k < fan_.entries.size(); ++k) {
      if (k == j) continue;
      const cplx gap = lj - fan_.entries[k].lambda;
      for (int rep = 0; rep < fan_.entries[k].multiplicity; ++rep) q *= gap;
      log_derivative += static_cast<double>(fan_.entries[k].multiplicity) / gap;
    }
    const cplx a_m = f_.derivative_at(lj, m) / factorial(m);
    const cplx a_m1 = f_.derivative_at(lj, m + 1) / factorial(m + 1);
    fill_value_.push_back(a_m / q);
    fill_slope_.push_back((a_m1 - a_m * log_derivative) / q);
  }
}

cplx RootCofactor::operator()(cplx lambda) const {
  int nearest = -1;
  double nearest_dist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < fan_.entries.size(); ++j) {
    const double d = std::abs(lambda - fan_.entries[j].lambda);
    if (d < nearest_dist) {
      nearest_dist = d;
      nearest = static_cast<int>(j);
    }
  }
  if (nearest >= 0 && nearest_dist < tols_.remove)
    return fill_value_[nearest] +
           fill_slope_[nearest] * (lambda - fan_.entries[nearest].lambda);
  cplx denom{1.0, 0.0};
  for (const auto& e : fan_.entries)
    for (int rep = 0; rep < e.multiplicity; ++rep) denom *= lambda - e.lambda;
  return (f_.eval(lambda) - fan_.z) / denom;
}

std::vector<cplx> partial_fraction_coeffs(const PreimageFan& fan, const Tolerances& tols) {
  for (const auto& e : fan.entries)
    if (e.multiplicity != 1)
      fail(Errc::CriticalValueCollision,
           "fan has a multiple preimage; z collides with a critical value");
  for (std::size_t i = 0; i < fan.entries.size(); ++i)
    for (std::size_t j = i + 1; j < fan.entries.size(); ++j)
      if (std::abs(fan.entries[i].lambda - fan.entries[j].lambda) < tols.cluster)
        fail(Errc::CriticalValueCollision,
             "two preimages are closer than the cluster tolerance");
  std::vector<cplx> coeffs;
  coeffs.reserve(fan.entries.size());
  for (std::size_t j = 0; j < fan.entries.size(); ++j) {
    cplx c{1.0, 0.0};
    for (std::size_t k = 0; k < fan.entries.size(); ++k) {
      if (k == j) continue;
      c /= fan.entries[j].lambda - fan.entries[k].lambda;
    }
    coeffs.push_back(c);
  }
  return coeffs;
}

DifferenceQuotient::DifferenceQuotient(const AnalyticFunction& f, cplx lambda)
    : lambda_(lambda) {
  switch (f.variant()) {
    case AnalyticFunction::Variant::polynomial:
      num_ = f.numerator().deflate(lambda).first;
      den_ = Polynomial({cplx{1.0, 0.0}});
      break;
    case AnalyticFunction::Variant::rational: {
      const cplx q_lambda = f.denominator().eval(lambda);
      if (std::abs(q_lambda) < 1e-140)
        fail(Errc::DomainError, "difference quotient anchored at a pole");
      const cplx p_lambda = f.numerator().eval(lambda);
      // (p(t) q(lambda) - p(lambda) q(t)) vanishes at t = lambda; deflate.
      const Polynomial cross =
          f.numerator().scaled(q_lambda) - f.denominator().scaled(p_lambda);
      num_ = cross.deflate(lambda).first;
      den_ = f.denominator().scaled(q_lambda);
      rational_ = true;
      break;
    }
    case AnalyticFunction::Variant::power_series: {
      if (!f.in_domain(lambda))
        fail(Errc::DomainError, "difference quotient anchored outside the series disc");
      series_ = true;
      radius_ = f.convergence_radius();
      center_ = f.series_center();
      std::vector<cplx> shifted = f.numerator().coeffs();
      const cplx value = f.numerator().eval(lambda - center_);
      shifted[0] -= value;
      num_ = Polynomial(std::move(shifted)).deflate(lambda - center_).first;
      den_ = Polynomial({cplx{1.0, 0.0}});
      break;
    }
  }
}

cplx DifferenceQuotient::operator()(cplx t) const {
  if (series_) {
    if (std::abs(t - center_) >= 0.9 * radius_)
      fail(Errc::DomainError, "difference quotient evaluated outside the series disc");
    return num_.eval(t - center_);
  }
  if (!rational_) return num_.eval(t);
  const cplx q = den_.eval(t);
  if (std::abs(q) < 1e-140) fail(Errc::DomainError, "difference quotient evaluated at a pole");
  return num_.eval(t) / q;
}

ComplexMatrix DifferenceQuotient::apply(const ComplexMatrix& T) const {
  const int n = T.dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& idx : T.diagonal_blocks()) {
    Eigen::MatrixXcd B = extract_block(T.data(), idx);
    Eigen::MatrixXcd psi;
    if (series_) {
      for (const auto& e : spectrum(ComplexMatrix(B)).eigenvalues)
        if (std::abs(e.value - center_) >= 0.9 * radius_)
          fail(Errc::DomainError, "block spectrum leaves the series disc");
      Eigen::MatrixXcd shifted = B;
      shifted.diagonal().array() -= center_;
      psi = apply_polynomial_block(num_, shifted);
    } else if (!rational_) {
      psi = apply_polynomial_block(num_, B);
    } else {
      const Eigen::MatrixXcd P = apply_polynomial_block(num_, B);
      const Eigen::MatrixXcd Q = apply_polynomial_block(den_, B);
      const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Q);
      if (!(lu.rcond() > 1e-14))
        fail(Errc::DomainError, "difference-quotient denominator singular on a block");
      psi = lu.solve(P);
    }
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c)
        out(idx[r], idx[c]) = psi(static_cast<int>(r), static_cast<int>(c));
  }
  return ComplexMatrix(std::move(out));
}

nlohmann::json IdentityCheckResult::to_json() const {
  auto coeff_list = nlohmann::json::array();
  for (cplx c : coeffs) coeff_list.push_back({c.real(), c.imag()});
  auto lambdas = nlohmann::json::array();
  for (const auto& e : fan.entries) lambdas.push_back({e.lambda.real(), e.lambda.imag()});
  return {{"residual", residual},
          {"cofactor_inverse_norm", cofactor_inverse_norm},
          {"coeffs", std::move(coeff_list)},
          {"term_resolvent_norms", term_resolvent_norms},
          {"preimages", std::move(lambdas)}};
}

IdentityCheckResult resolvent_identity_check(const ComplexMatrix& T, const AnalyticFunction& f,
                                             cplx z, const RegionConfig& region,
                                             const ContourSpec& contour, const Tolerances& tols) {
  const ComplexMatrix fT = apply_analytic_exact(T, f);
  const int n = T.dim();
  Eigen::MatrixXcd shifted = fT.data();
  shifted.diagonal().array() -= z;
  const ComplexMatrix shifted_m(shifted);
  const double smin = min_singular_value(shifted_m);
  if (smin < tols.sing * (1.0 + fT.operator_norm()))
    fail(Errc::SpectrumProximity, "z is within spectral tolerance of the spectrum of f(T)");
  const Eigen::MatrixXcd lhs = Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).inverse();

  IdentityCheckResult result;
  result.fan = preimages(f, z, region, tols);
  result.coeffs = result.fan.entries.empty() ? std::vector<cplx>{}
                                             : partial_fraction_coeffs(result.fan, tols);

  const RootCofactor phi(f, result.fan, tols);
  const ComplexMatrix phi_T =
      contour_apply(T, [&phi](cplx t) { return phi(t); }, contour, tols);
  const Eigen::PartialPivLU<Eigen::MatrixXcd> phi_lu(phi_T.data());
  if (!(phi_lu.rcond() > 1e-15))
    fail(Errc::SpectrumProximity, "cofactor of z at T is numerically singular");
  const Eigen::MatrixXcd phi_inv = phi_lu.inverse();
  result.cofactor_inverse_norm = spectral_norm(phi_inv);

  Eigen::MatrixXcd rhs;
  if (result.fan.entries.empty()) {
    // No preimages inside the region: f - z is its own cofactor.
    rhs = phi_inv;
  } else {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
    for (std::size_t j = 0; j < result.fan.entries.size(); ++j) {
      const Eigen::MatrixXcd term =
          Eigen::PartialPivLU<Eigen::MatrixXcd>(T.data() - result.fan.entries[j].lambda * identity)
              .inverse();
      result.term_resolvent_norms.push_back(spectral_norm(term));
      sum += result.coeffs[j] * term;
    }
    rhs = phi_inv * sum;
  }
  result.residual = spectral_norm(lhs - rhs) / std::max(spectral_norm(lhs), 1e-300);
  return result;
}

CofactorInverseScan cofactor_inverse_scan(const AnalyticFunction& f,
                                          const std::vector<cplx>& z_samples,
                                          const RegionConfig& region, int grid,
                                          const Tolerances& tols) {
  if (grid < 2) fail(Errc::BadGrid, "grid must be >= 2");
  const double reach = region.omega.radius - region.inner_margin;
  if (!(reach > 0.0)) fail(Errc::BadRegion, "inner margin consumes the whole region");
  std::vector<cplx> nodes;
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      const cplx p = region.omega.center +
                     cplx{(2.0 * (ix + 0.5) / grid - 1.0) * reach,
                          (2.0 * (iy + 0.5) / grid - 1.0) * reach};
      if (std::abs(p - region.omega.center) <= reach && f.in_domain(p)) nodes.push_back(p);
    }
  if (nodes.empty()) fail(Errc::BadGrid, "no grid nodes land inside the shrunk region");

  CofactorInverseScan scan;
  scan.z_values = z_samples;
  for (cplx z : z_samples) {
    const PreimageFan fan = preimages(f, z, region, tols);
    const RootCofactor phi(f, fan, tols);
    double sup = 0.0;
    for (cplx p : nodes) {
      const double mag = std::abs(phi(p));
      sup = std::max(sup, mag > 1e-300 ? 1.0 / mag : std::numeric_limits<double>::infinity());
    }
    scan.per_z_sup.push_back(sup);
    scan.overall_sup = std::max(scan.overall_sup, sup);
  }
  return scan;
}

std::vector<BranchRecord> branch_case_diagnostics(const AnalyticFunction& f, cplx z,
                                                  const PreimageFan& fan,
                                                  const CriticalData& critical,
                                                  const CompactSet& K,
                                                  const RegionConfig& region,
                                                  const Tolerances& tols) {
  const std::vector<cplx> coeffs = partial_fraction_coeffs(fan, tols);
  double dist_z_image = std::numeric_limits<double>::infinity();
  for (cplx s : K.sample_points(512))
    dist_z_image = std::min(dist_z_image, std::abs(z - f.eval(s)));

  std::vector<BranchRecord> records;
  for (std::size_t j = 0; j < fan.entries.size(); ++j) {
    BranchRecord rec;
    rec.lambda = fan.entries[j].lambda;
    rec.abs_coeff = std::abs(coeffs[j]);
    rec.dist_to_set = distance(K, rec.lambda);
    rec.branch = region.branch_index(rec.lambda);
    rec.case_id = rec.branch >= 0 ? 2 : 1;
    double branch_factor = 1.0;  // |lambda - xi|^(m-1); 1 in Case 1
    rec.case2_ratio = 0.0;
    if (rec.case_id == 2) {
      const auto& disc = region.branch_neighborhoods[static_cast<std::size_t>(rec.branch)];
      cplx xi = disc.center;
      int order = disc.order;
      for (const auto& cp : critical.points)
        if (std::abs(cp.xi - disc.center) <= disc.radius) {
          xi = cp.xi;
          order = cp.order;
          break;
        }
      branch_factor = std::pow(std::abs(rec.lambda - xi), order - 1);
      rec.case2_ratio = rec.abs_coeff * branch_factor;
    }
    const double denom = rec.dist_to_set * branch_factor;
    rec.transfer_bound = denom > 0.0 ? dist_z_image / denom
                                     : std::numeric_limits<double>::infinity();
    records.push_back(rec);
  }
  return records;
}

double empirical_preimage_gap(const AnalyticFunction& f, const RegionConfig& region,
                              const std::vector<cplx>& z_grid, const Tolerances& tols) {
  double gap = std::numeric_limits<double>::infinity();
  for (cplx z : z_grid) {
    const PreimageFan fan = preimages(f, z, region, tols);
    for (std::size_t i = 0; i < fan.entries.size(); ++i)
      for (std::size_t j = i + 1; j < fan.entries.size(); ++j) {
        const int bi = region.branch_index(fan.entries[i].lambda);
        const int bj = region.branch_index(fan.entries[j].lambda);
        if (bi >= 0 && bi == bj) continue;  // same branch disc: exempt
        gap = std::min(gap, std::abs(fan.entries[i].lambda - fan.entries[j].lambda));
      }
  }
  return gap;
}

DerivativeFloor derivative_floor(const AnalyticFunction& f, const RegionConfig& region,
                                 int grid) {
  if (grid < 2) fail(Errc::BadGrid, "grid must be >= 2");
  const double reach = region.omega.radius - region.inner_margin;
  if (!(reach > 0.0)) fail(Errc::BadRegion, "inner margin consumes the whole region");
  const AnalyticFunction df = f.derivative();
  DerivativeFloor out;
  out.tau = std::numeric_limits<double>::infinity();
  out.argmin = region.omega.center;
  bool any = false;
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      const cplx p = region.omega.center +
                     cplx{(2.0 * (ix + 0.5) / grid - 1.0) * reach,
                          (2.0 * (iy + 0.5) / grid - 1.0) * reach};
      if (std::abs(p - region.omega.center) > reach || !f.in_domain(p)) continue;
      any = true;
      const double v = std::abs(df.eval(p));
      if (v < out.tau) {
        out.tau = v;
        out.argmin = p;
      }
    }
  if (!any) fail(Errc::BadGrid, "no grid nodes land inside the shrunk region");
  // One Newton polish step toward a zero of f'; kept only when it improves
  // and stays inside the scan disc.
  const cplx d2 = f.derivative_at(out.argmin, 2);
  if (std::abs(d2) > 1e-300) {
    const cplx next = out.argmin - df.eval(out.argmin) / d2;
    if (std::abs(next - region.omega.center) <= reach && f.in_domain(next)) {
      const double v = std::abs(df.eval(next));
      if (v < out.tau) {
        out.tau = v;
        out.argmin = next;
      }
    }
  }
  out.rho = out.tau * region.inner_margin / 4.0;
  return out;
}

}  // namespace reslab
