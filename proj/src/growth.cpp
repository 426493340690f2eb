#include "reslab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include "reslab/calculus.hpp"
#include "reslab/parallel.hpp"

namespace reslab {

namespace {

// R3 low-discrepancy sequence constants (roots of x^4 = x + 1 powers).
constexpr double kAlpha1 = 0.8191725133961645;
constexpr double kAlpha2 = 0.6710436067037893;
constexpr double kAlpha3 = 0.5497004779019703;

double splitmix_unit(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double frac(double x) { return x - std::floor(x); }

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  double sxx = 0.0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LineFit fit;
  fit.sxx = sxx;
  if (sxx > 0.0) {
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  }
  return fit;
}

}  // namespace

double ResolventField::decades() const {
  if (samples.empty()) return 0.0;
  double lo = samples[0].log_dist, hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.log_dist);
    hi = std::max(hi, s.log_dist);
  }
  return (hi - lo) / std::log(10.0);
}

void ResolventField::write_csv(std::ostream& out) const {
  out << "re,im,dist,norm,log_dist,log_norm\n";
  out << std::setprecision(17);
  for (const auto& s : samples)
    out << s.lambda.real() << ',' << s.lambda.imag() << ',' << s.dist << ',' << s.norm << ','
        << s.log_dist << ',' << s.log_norm << '\n';
}

ResolventField sample_field(const ComplexMatrix& T, const CompactSet& K, double d_min,
                            double d_max, int n_samples, std::uint64_t seed,
                            const Tolerances& tols, const SampleOptions& options) {
  if (!(d_min > 0.0) || !(d_max >= d_min))
    fail(Errc::EmptyAnnulus, "annulus requires 0 < d_min <= d_max");
  if (n_samples < 1) fail(Errc::BadGrid, "need at least one sample");

  ResolventField field;
  field.set = K;
  field.d_min = d_min;
  field.d_max = d_max;
  field.seed = seed;
  field.requested = n_samples;

  // Containment check sigma(T) vs K: recorded as a warning, not an error.
  {
    int outside = 0;
    double worst = 0.0;
    for (const auto& e : spectrum(T, tols).eigenvalues) {
      const double d = distance(K, e.value);
      if (d > 1e-8 * (1.0 + std::abs(e.value))) {
        ++outside;
        worst = std::max(worst, d);
      }
    }
    if (outside > 0) {
      std::ostringstream msg;
      msg << outside << " eigenvalue(s) lie outside the set (max dist " << worst
          << "); resolvent samples may hit the spectrum";
      field.warnings.push_back(msg.str());
    }
  }

  const std::vector<cplx> anchors =
      options.anchors.empty() ? K.sample_points(512) : options.anchors;
  std::uint64_t mix = seed;
  const double o1 = splitmix_unit(mix), o2 = splitmix_unit(mix), o3 = splitmix_unit(mix);
  const double log_lo = std::log(d_min), log_hi = std::log(d_max);

  // Pass 1 (cheap, sequential): fix the accepted candidate set by measured
  // distance. Pass 2 (parallel): the expensive resolvent norms, by index.
  std::vector<cplx> accepted;
  std::vector<double> accepted_dist;
  const long long budget =
      static_cast<long long>(options.attempts_factor) * static_cast<long long>(n_samples);
  for (long long a = 0; a < budget && static_cast<int>(accepted.size()) < n_samples; ++a) {
    const double u1 = frac(kAlpha1 * static_cast<double>(a + 1) + o1);
    const double u2 = frac(kAlpha2 * static_cast<double>(a + 1) + o2);
    const double u3 = frac(kAlpha3 * static_cast<double>(a + 1) + o3);
    const cplx anchor = anchors[static_cast<std::size_t>(u1 * static_cast<double>(anchors.size())) %
                                anchors.size()];
    const double delta = std::exp(log_lo + u2 * (log_hi - log_lo));
    const double theta = 2.0 * M_PI * u3;
    const cplx lambda = anchor + delta * cplx{std::cos(theta), std::sin(theta)};
    const double d = distance(K, lambda);
    if (d < d_min * (1.0 - 1e-12) || d > d_max * (1.0 + 1e-12)) continue;
    accepted.push_back(lambda);
    accepted_dist.push_back(d);
  }
  if (static_cast<int>(accepted.size()) < n_samples)
    fail(Errc::EmptyAnnulus, "could not place " + std::to_string(n_samples) +
                                 " samples with dist in [" + std::to_string(d_min) + ", " +
                                 std::to_string(d_max) + "]");

  std::vector<double> norms(accepted.size(), 0.0);
  std::vector<char> ok(accepted.size(), 0);
  std::vector<std::exception_ptr> errors(accepted.size());
  run_chunked(accepted.size(), options.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        norms[i] = resolvent_norm(T, accepted[i], tols);
        ok[i] = 1;
      } catch (const Error& err) {
        if (err.kind() == Errc::SpectrumProximity)
          ok[i] = 0;
        else
          errors[i] = std::current_exception();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  for (std::size_t i = 0; i < accepted.size(); ++i) {
    if (!ok[i]) {
      ++field.skipped_proximity;
      continue;
    }
    FieldSample s;
    s.lambda = accepted[i];
    s.dist = accepted_dist[i];
    s.norm = norms[i];
    s.log_dist = std::log(s.dist);
    s.log_norm = std::log(s.norm);
    field.samples.push_back(s);
  }
  if (field.skipped_proximity > 0) {
    std::ostringstream msg;
    msg << field.skipped_proximity
        << " sample(s) dropped by the spectral-proximity guard";
    field.warnings.push_back(msg.str());
  }
  return field;
}

nlohmann::json GrowthFit::to_json() const {
  return {{"s_hat", s_hat},
          {"C_hat", C_hat},
          {"r_squared", r_squared},
          {"bins", bins},
          {"n", n_samples}};
}

GrowthFit envelope_fit(const std::vector<FieldSample>& samples, int bins, double min_decades,
                       int min_samples) {
  if (bins < 2) fail(Errc::BadGrid, "need at least 2 envelope bins");
  if (static_cast<int>(samples.size()) < min_samples)
    fail(Errc::InsufficientDecades, "need at least " + std::to_string(min_samples) +
                                        " samples, got " + std::to_string(samples.size()));
  double lo = samples[0].log_dist, hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.log_dist);
    hi = std::max(hi, s.log_dist);
  }
  const double decades = (hi - lo) / std::log(10.0);
  if (decades < min_decades - 1e-9)
    fail(Errc::InsufficientDecades, "samples span " + std::to_string(decades) +
                                        " decades of dist; need " + std::to_string(min_decades));

  struct Bin {
    bool used = false;
    double best_norm = 0.0;
    double at_dist = 0.0;
    int count = 0;
  };
  std::vector<Bin> table(static_cast<std::size_t>(bins));
  const double width = (hi - lo) / static_cast<double>(bins);
  for (const auto& s : samples) {
    int b = width > 0.0 ? static_cast<int>((s.log_dist - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    Bin& slot = table[static_cast<std::size_t>(b)];
    ++slot.count;
    if (!slot.used || s.log_norm > slot.best_norm) {
      slot.used = true;
      slot.best_norm = s.log_norm;
      slot.at_dist = s.log_dist;
    }
  }

  GrowthFit fit;
  fit.bins = bins;
  fit.n_samples = static_cast<int>(samples.size());
  std::vector<double> xs, ys;
  for (const auto& slot : table) {
    if (!slot.used) continue;
    xs.push_back(slot.at_dist);
    ys.push_back(slot.best_norm);
    fit.envelope.push_back({slot.at_dist, slot.best_norm, slot.count});
  }
  if (xs.size() < 2) fail(Errc::DegenerateFit, "fewer than 2 nonempty envelope bins");
  const LineFit line = least_squares(xs, ys);
  if (line.sxx <= 1e-12) fail(Errc::DegenerateFit, "envelope abscissas are degenerate");
  fit.s_hat = std::max(0.0, -line.slope);
  fit.C_hat = std::exp(line.intercept);
  fit.r_squared = line.r_squared;
  return fit;
}

GrowthFit fit_growth(const ResolventField& field, int bins) {
  return envelope_fit(field.samples, bins, 2.0, 100);
}

CompactSet pushforward_set(const AnalyticFunction& f, const CompactSet& K, std::size_t target) {
  std::vector<cplx> image;
  for (cplx s : K.sample_points(target)) image.push_back(f.eval(s));
  return CompactSet::point_cloud(std::move(image));
}

namespace {

// Image cloud for the f(T)-side fit. Since sigma(T) is contained in K, the
// exact eigenvalue images belong to f(K); adding them keeps the envelope
// sharp even where K's own sample grid misses an eigenvalue.
CompactSet image_with_spectrum(const AnalyticFunction& f, const CompactSet& K,
                               const ComplexMatrix& T, const Tolerances& tols) {
  std::vector<cplx> image;
  for (cplx s : K.sample_points(1024)) image.push_back(f.eval(s));
  for (const auto& e : spectrum(T, tols).eigenvalues) image.push_back(f.eval(e.value));
  return CompactSet::point_cloud(std::move(image));
}

}  // namespace

nlohmann::json TheoremAReport::to_json() const {
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& w : field_T.warnings) warnings.push_back(w);
  for (const auto& w : field_fT.warnings) warnings.push_back(w);
  return {{"s_T", s_T},           {"s_fT", s_fT},
          {"slack", slack},       {"pass", pass},
          {"fit_T", fit_T.to_json()}, {"fit_fT", fit_fT.to_json()},
          {"warnings", std::move(warnings)}};
}

TheoremAReport verify_theorem_A(const ComplexMatrix& T, const CompactSet& K,
                                const AnalyticFunction& f, const RegionConfig& region,
                                const VerifyOptions& options, const Tolerances& tols) {
  for (const auto& e : spectrum(T, tols).eigenvalues)
    if (!region.contains(e.value))
      fail(Errc::BadRegion, "spectrum of T leaves region omega");

  TheoremAReport report;
  report.slack = options.slack;
  SampleOptions sample_options;
  sample_options.workers = options.workers;
  report.field_T =
      sample_field(T, K, options.d_min, options.d_max, options.n_samples, options.seed, tols,
                   sample_options);
  report.fit_T = fit_growth(report.field_T, options.bins);

  const ComplexMatrix fT = apply_analytic_exact(T, f);
  const CompactSet fK = image_with_spectrum(f, K, T, tols);
  report.field_fT =
      sample_field(fT, fK, options.d_min, options.d_max, options.n_samples, options.seed, tols,
                   sample_options);
  report.fit_fT = fit_growth(report.field_fT, options.bins);

  report.s_T = report.fit_T.s_hat;
  report.s_fT = report.fit_fT.s_hat;
  report.pass = report.s_fT <= report.s_T + options.slack;
  return report;
}

nlohmann::json ConverseReport::to_json() const {
  const char* geo = geometry == GeometryClass::lipschitz      ? "lipschitz"
                    : geometry == GeometryClass::p_admissible ? "p_admissible"
                                                              : "neither";
  return {{"s_T", s_T},
          {"s_fT", s_fT},
          {"geometry", geo},
          {"p_hat", p_hat},
          {"slack_used", slack_used},
          {"pass", pass},
          {"fit_T", fit_T.to_json()},
          {"fit_fT", fit_fT.to_json()}};
}

ConverseReport verify_converse(const ComplexMatrix& T, const CompactSet& K,
                               const AnalyticFunction& f, const RegionConfig& region,
                               const VerifyOptions& options, const Tolerances& tols) {
  const CriticalData crit = critical_data(f, region, tols);
  for (const auto& cp : crit.points)
    if (distance(K, cp.xi) <= tols.cluster) {
      std::ostringstream msg;
      msg << "derivative of f vanishes on K at xi = (" << cp.xi.real() << "," << cp.xi.imag()
          << "), order " << cp.order;
      fail(Errc::HypothesisViolation, msg.str());
    }

  ConverseReport report;
  switch (K.variant()) {
    case CompactSet::Variant::point_cloud:
    case CompactSet::Variant::curve_union:
      report.geometry = GeometryClass::lipschitz;
      report.p_hat = 1.0;
      report.slack_used = options.slack;
      break;
    case CompactSet::Variant::disc_union: {
      report.geometry = GeometryClass::p_admissible;
      const Disc box = K.bounding_disc();
      const double R0 = std::max(box.radius, 1e-6);
      const std::vector<double> sigmas{0.012 * R0, 0.025 * R0, 0.05 * R0, 0.08 * R0, 0.125 * R0};
      const std::vector<double> radii{0.6 * R0, 1.0 * R0, 1.6 * R0};
      const std::vector<cplx> centers{box.center, box.center + cplx{0.4 * R0, 0.0},
                                      box.center + cplx{0.0, -0.4 * R0}};
      const AdmissibilityFit afit = fit_admissibility(K, sigmas, radii, centers, 256, options.workers);
      report.p_hat = afit.p_hat;
      report.slack_used = options.slack_p;
      break;
    }
  }

  SampleOptions sample_options;
  sample_options.workers = options.workers;
  report.field_T =
      sample_field(T, K, options.d_min, options.d_max, options.n_samples, options.seed, tols,
                   sample_options);
  report.fit_T = fit_growth(report.field_T, options.bins);

  const ComplexMatrix fT = apply_analytic_exact(T, f);
  const CompactSet fK = image_with_spectrum(f, K, T, tols);
  report.field_fT =
      sample_field(fT, fK, options.d_min, options.d_max, options.n_samples, options.seed, tols,
                   sample_options);
  report.fit_fT = fit_growth(report.field_fT, options.bins);

  report.s_T = report.fit_T.s_hat;
  report.s_fT = report.fit_fT.s_hat;
  report.pass = report.s_T <= report.s_fT + report.slack_used;
  return report;
}

RatioScan bilipschitz_ratio_scan(const AnalyticFunction& f, const CompactSet& K,
                                 const RegionConfig& region, int grid) {
  if (grid < 2) fail(Errc::BadGrid, "grid must be >= 2");
  const CompactSet enlarged = preimage_set(f, K, region, 256);
  const CompactSet image = pushforward_set(f, K, 1024);

  const Disc box = K.bounding_disc();
  const double reach = box.radius + 0.1 + 1e-2;
  RatioScan scan;
  scan.min_ratio = std::numeric_limits<double>::infinity();
  scan.max_ratio = 0.0;
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      const cplx lambda = box.center + cplx{(2.0 * (ix + 0.5) / grid - 1.0) * reach,
                                            (2.0 * (iy + 0.5) / grid - 1.0) * reach};
      const double d = distance(K, lambda);
      if (d < 1e-3 || d > 1e-1) continue;
      if (!region.contains(lambda) || region.branch_index(lambda) >= 0) continue;
      if (!f.in_domain(lambda)) continue;
      const double num = distance(enlarged, lambda);
      const double den = distance(image, f.eval(lambda));
      if (!(den > 0.0)) continue;
      const double ratio = num / den;
      scan.min_ratio = std::min(scan.min_ratio, ratio);
      scan.max_ratio = std::max(scan.max_ratio, ratio);
      ++scan.pairs;
    }
  if (scan.pairs == 0) fail(Errc::BadGrid, "no scan points landed in the distance band");
  return scan;
}

nlohmann::json ComparisonScan::to_json() const {
  auto rows = nlohmann::json::array();
  for (const auto& r : records)
    rows.push_back({{"z", {r.z.real(), r.z.imag()}},
                    {"lhs", r.lhs},
                    {"rhs", r.rhs},
                    {"ratio", r.ratio},
                    {"preimages", r.preimage_count}});
  return {{"min_ratio", min_ratio},
          {"max_ratio", max_ratio},
          {"skipped", skipped},
          {"records", std::move(rows)}};
}

ComparisonScan resolvent_comparison_scan(const ComplexMatrix& T, const AnalyticFunction& f,
                                         const RegionConfig& region,
                                         const std::vector<cplx>& z_samples,
                                         const Tolerances& tols) {
  const ComplexMatrix fT = apply_analytic_exact(T, f);
  const CriticalData crit = critical_data(f, region, tols);
  ComparisonScan scan;
  scan.min_ratio = std::numeric_limits<double>::infinity();
  scan.max_ratio = 0.0;
  for (cplx z : z_samples) {
    bool near_critical_value = false;
    for (const auto& cp : crit.points)
      if (std::abs(z - cp.value) <= tols.cluster) near_critical_value = true;
    if (near_critical_value) {
      ++scan.skipped;
      continue;
    }
    const PreimageFan fan = preimages(f, z, region, tols);
    if (fan.entries.empty()) {
      ++scan.skipped;
      continue;
    }
    try {
      ComparisonRecord rec;
      rec.z = z;
      rec.lhs = resolvent_norm(fT, z, tols);
      rec.rhs = 0.0;
      for (const auto& e : fan.entries)
        rec.rhs = std::max(rec.rhs, resolvent_norm(T, e.lambda, tols));
      rec.ratio = rec.lhs / rec.rhs;
      rec.preimage_count = fan.count;
      scan.min_ratio = std::min(scan.min_ratio, rec.ratio);
      scan.max_ratio = std::max(scan.max_ratio, rec.ratio);
      scan.records.push_back(rec);
    } catch (const Error& err) {
      if (err.kind() == Errc::SpectrumProximity)
        ++scan.skipped;
      else
        throw;
    }
  }
  if (scan.records.empty())
    fail(Errc::SpectrumProximity, "every scanned z was rejected by the guards");
  return scan;
}

}  // namespace reslab
