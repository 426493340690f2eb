#include "reslab/compact_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <utility>

#include "reslab/analytic.hpp"
#include "reslab/parallel.hpp"

namespace reslab {

namespace {

constexpr double kGoldenFraction = 0.6180339887498949;  // (sqrt(5)-1)/2

void require_finite(cplx v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    fail(Errc::NonFinite, std::string(what) + " is not finite");
}

nlohmann::json cplx_json(cplx v) { return nlohmann::json::array({v.real(), v.imag()}); }

cplx cplx_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(Errc::ParseError, std::string(what) + " must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

double point_segment_distance(cplx p, cplx a, cplx b) {
  const cplx w = b - a;
  const double len2 = std::norm(w);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p - a) * std::conj(w)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * w));
}

double polyline_distance(const std::vector<cplx>& v, cplx p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    best = std::min(best, point_segment_distance(p, v[i], v[i + 1]));
  if (v.size() == 1) best = std::abs(p - v[0]);
  return best;
}

Disc bounding_of_points(const std::vector<cplx>& pts, double pad) {
  double xlo = pts[0].real(), xhi = xlo, ylo = pts[0].imag(), yhi = ylo;
  for (const cplx& p : pts) {
    xlo = std::min(xlo, p.real());
    xhi = std::max(xhi, p.real());
    ylo = std::min(ylo, p.imag());
    yhi = std::max(yhi, p.imag());
  }
  const cplx center{(xlo + xhi) / 2.0, (ylo + yhi) / 2.0};
  double radius = 0.0;
  for (const cplx& p : pts) radius = std::max(radius, std::abs(p - center));
  return {center, radius + pad};
}

/// Capped nearest-point query over a uniform bucket grid; exact whenever the
/// true distance is <= cap, +inf otherwise.
class PointBuckets {
 public:
  PointBuckets(const std::vector<cplx>& pts, double cap) : pts_(pts), cap_(cap) {
    side_ = std::max(cap, 1e-300);
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key_of(pts[i])].push_back(static_cast<int>(i));
  }

  double distance_capped(cplx q) const {
    const long long kx = coord(q.real());
    const long long ky = coord(q.imag());
    double best2 = std::numeric_limits<double>::infinity();
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(pack(kx + dx, ky + dy));
        if (it == cells_.end()) continue;
        for (int i : it->second) best2 = std::min(best2, std::norm(q - pts_[i]));
      }
    const double d = std::sqrt(best2);
    return d <= cap_ ? d : std::numeric_limits<double>::infinity();
  }

 private:
  long long coord(double x) const { return static_cast<long long>(std::floor(x / side_)); }
  long long key_of(cplx p) const { return pack(coord(p.real()), coord(p.imag())); }
  static long long pack(long long a, long long b) { return a * 2000003LL + b; }

  const std::vector<cplx>& pts_;
  double cap_;
  double side_;
  std::unordered_map<long long, std::vector<int>> cells_;
};

}  // namespace

void LipschitzCurve::validate() const {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-14)
    fail(Errc::BadRegion, "curve rotation zeta must have unit modulus");
  if (!(t1 > t0)) fail(Errc::BadRegion, "curve interval must satisfy t1 > t0");
  if (heights.size() < 2) fail(Errc::BadRegion, "curve needs at least 2 height samples");
  if (!(lipschitz_constant > 0.0)) fail(Errc::BadRegion, "lipschitz_constant must be positive");
  const double dt = (t1 - t0) / static_cast<double>(heights.size() - 1);
  for (std::size_t i = 0; i + 1 < heights.size(); ++i) {
    if (!std::isfinite(heights[i])) fail(Errc::NonFinite, "curve height is not finite");
    if (std::abs(heights[i + 1] - heights[i]) > lipschitz_constant * dt * (1.0 + 1e-12) + 1e-15)
      fail(Errc::BadRegion, "curve heights violate the declared Lipschitz constant");
  }
  if (!std::isfinite(heights.back())) fail(Errc::NonFinite, "curve height is not finite");
}

std::vector<cplx> LipschitzCurve::vertices() const {
  const double dt = (t1 - t0) / static_cast<double>(heights.size() - 1);
  std::vector<cplx> v;
  v.reserve(heights.size());
  for (std::size_t i = 0; i < heights.size(); ++i) {
    const double t = t0 + dt * static_cast<double>(i);
    v.push_back(zeta * cplx{t, heights[i]});
  }
  return v;
}

double LipschitzCurve::sampling_slack() const {
  const double dt = (t1 - t0) / static_cast<double>(heights.size() - 1);
  return dt * std::sqrt(1.0 + lipschitz_constant * lipschitz_constant) / 2.0;
}

CompactSet CompactSet::point_cloud(std::vector<cplx> points) {
  if (points.empty()) fail(Errc::BadRegion, "point cloud must be nonempty");
  for (cplx p : points) require_finite(p, "point");
  CompactSet k;
  k.variant_ = Variant::point_cloud;
  k.points_ = std::move(points);
  k.bounding_ = bounding_of_points(k.points_, 0.0);
  return k;
}

CompactSet CompactSet::disc_union(std::vector<Disc> discs) {
  if (discs.empty()) fail(Errc::BadRegion, "disc union must be nonempty");
  for (const Disc& d : discs) {
    require_finite(d.center, "disc center");
    if (!(d.radius >= 0.0) || !std::isfinite(d.radius))
      fail(Errc::BadRegion, "disc radius must be a finite nonnegative number");
  }
  CompactSet k;
  k.variant_ = Variant::disc_union;
  k.discs_ = std::move(discs);
  std::vector<cplx> centers;
  for (const Disc& d : k.discs_) centers.push_back(d.center);
  Disc box = bounding_of_points(centers, 0.0);
  double radius = 0.0;
  for (const Disc& d : k.discs_) radius = std::max(radius, std::abs(d.center - box.center) + d.radius);
  k.bounding_ = {box.center, radius};
  return k;
}

CompactSet CompactSet::curve_union(std::vector<LipschitzCurve> curves) {
  if (curves.empty()) fail(Errc::BadRegion, "curve union must be nonempty");
  for (const auto& c : curves) c.validate();
  CompactSet k;
  k.variant_ = Variant::curve_union;
  k.curves_ = std::move(curves);
  std::vector<cplx> verts;
  double slack = 0.0;
  for (const auto& c : k.curves_) {
    auto v = c.vertices();
    verts.insert(verts.end(), v.begin(), v.end());
    slack = std::max(slack, c.sampling_slack());
  }
  k.bounding_ = bounding_of_points(verts, slack);
  return k;
}

std::vector<cplx> CompactSet::sample_points(std::size_t target) const {
  target = std::max<std::size_t>(target, 1);
  switch (variant_) {
    case Variant::point_cloud:
      return points_;
    case Variant::disc_union: {
      std::vector<cplx> out;
      const std::size_t per_disc = std::max<std::size_t>(8, target / discs_.size());
      for (const Disc& d : discs_) {
        if (d.radius == 0.0) {
          out.push_back(d.center);
          continue;
        }
        const std::size_t n_ring = std::max<std::size_t>(8, (2 * per_disc) / 3);
        const std::size_t n_inner = std::max<std::size_t>(1, per_disc - n_ring);
        for (std::size_t i = 0; i < n_ring; ++i) {
          const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n_ring);
          out.push_back(d.center + d.radius * cplx{std::cos(th), std::sin(th)});
        }
        for (std::size_t i = 0; i < n_inner; ++i) {
          const double r =
              d.radius * std::sqrt((static_cast<double>(i) + 0.5) / static_cast<double>(n_inner));
          const double th = 2.0 * M_PI * std::fmod(kGoldenFraction * static_cast<double>(i + 1), 1.0);
          out.push_back(d.center + r * cplx{std::cos(th), std::sin(th)});
        }
      }
      return out;
    }
    case Variant::curve_union: {
      std::vector<cplx> out;
      const std::size_t per_curve = std::max<std::size_t>(2, target / curves_.size());
      for (const auto& c : curves_) {
        const double step = (c.t1 - c.t0) / static_cast<double>(c.heights.size() - 1);
        for (std::size_t i = 0; i < per_curve; ++i) {
          const double t = c.t0 + (c.t1 - c.t0) * static_cast<double>(i) /
                                      static_cast<double>(per_curve - 1);
          double u = (t - c.t0) / step;
          const auto hi = static_cast<std::size_t>(
              std::clamp(u, 0.0, static_cast<double>(c.heights.size() - 2)));
          const double frac = std::clamp(u - static_cast<double>(hi), 0.0, 1.0);
          const double h = c.heights[hi] * (1.0 - frac) + c.heights[hi + 1] * frac;
          out.push_back(c.zeta * cplx{t, h});
        }
      }
      return out;
    }
  }
  return {};
}

nlohmann::json CompactSet::to_json() const {
  nlohmann::json j;
  j["bounding_disc"] = {{"center", cplx_json(bounding_.center)}, {"radius", bounding_.radius}};
  switch (variant_) {
    case Variant::point_cloud: {
      j["variant"] = "point_cloud";
      auto arr = nlohmann::json::array();
      for (cplx p : points_) arr.push_back(cplx_json(p));
      j["points"] = std::move(arr);
      break;
    }
    case Variant::disc_union: {
      j["variant"] = "disc_union";
      auto arr = nlohmann::json::array();
      for (const Disc& d : discs_)
        arr.push_back({{"center", cplx_json(d.center)}, {"radius", d.radius}});
      j["discs"] = std::move(arr);
      break;
    }
    case Variant::curve_union: {
      j["variant"] = "curve_union";
      auto arr = nlohmann::json::array();
      for (const auto& c : curves_)
        arr.push_back({{"zeta", cplx_json(c.zeta)},
                       {"t0", c.t0},
                       {"t1", c.t1},
                       {"heights", c.heights},
                       {"lipschitz_constant", c.lipschitz_constant}});
      j["curves"] = std::move(arr);
      break;
    }
  }
  return j;
}

CompactSet CompactSet::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("variant") || !j["variant"].is_string())
    fail(Errc::ParseError, "set JSON needs a string field 'variant'");
  const std::string variant = j["variant"].get<std::string>();
  if (variant == "point_cloud") {
    if (!j.contains("points") || !j["points"].is_array())
      fail(Errc::ParseError, "point_cloud set needs an array field 'points'");
    std::vector<cplx> pts;
    for (const auto& p : j["points"]) pts.push_back(cplx_from_json(p, "point"));
    return point_cloud(std::move(pts));
  }
  if (variant == "disc_union") {
    if (!j.contains("discs") || !j["discs"].is_array())
      fail(Errc::ParseError, "disc_union set needs an array field 'discs'");
    std::vector<Disc> discs;
    for (const auto& d : j["discs"]) {
      if (!d.is_object() || !d.contains("center") || !d.contains("radius") ||
          !d["radius"].is_number())
        fail(Errc::ParseError, "disc needs 'center' and numeric 'radius'");
      discs.push_back({cplx_from_json(d["center"], "disc center"), d["radius"].get<double>()});
    }
    return disc_union(std::move(discs));
  }
  if (variant == "curve_union") {
    if (!j.contains("curves") || !j["curves"].is_array())
      fail(Errc::ParseError, "curve_union set needs an array field 'curves'");
    std::vector<LipschitzCurve> curves;
    for (const auto& c : j["curves"]) {
      if (!c.is_object() || !c.contains("zeta") || !c.contains("t0") || !c.contains("t1") ||
          !c.contains("heights") || !c.contains("lipschitz_constant"))
        fail(Errc::ParseError, "curve needs zeta, t0, t1, heights, lipschitz_constant");
      LipschitzCurve curve;
      curve.zeta = cplx_from_json(c["zeta"], "curve zeta");
      curve.t0 = c["t0"].get<double>();
      curve.t1 = c["t1"].get<double>();
      curve.heights = c["heights"].get<std::vector<double>>();
      curve.lipschitz_constant = c["lipschitz_constant"].get<double>();
      curves.push_back(std::move(curve));
    }
    return curve_union(std::move(curves));
  }
  fail(Errc::ParseError, "unknown set variant '" + variant + "'");
}

double distance(const CompactSet& K, cplx lambda) {
  double best = std::numeric_limits<double>::infinity();
  switch (K.variant()) {
    case CompactSet::Variant::point_cloud:
      for (cplx p : K.points()) best = std::min(best, std::abs(lambda - p));
      break;
    case CompactSet::Variant::disc_union:
      for (const Disc& d : K.discs())
        best = std::min(best, std::max(0.0, std::abs(lambda - d.center) - d.radius));
      break;
    case CompactSet::Variant::curve_union:
      for (const auto& c : K.curves()) best = std::min(best, polyline_distance(c.vertices(), lambda));
      break;
  }
  return best;
}

RegionConfig::RegionConfig(Disc om, std::vector<Branch> branches, double margin)
    : omega(om), branch_neighborhoods(std::move(branches)), inner_margin(margin) {
  require_finite(omega.center, "omega center");
  if (!(omega.radius > 0.0) || !std::isfinite(omega.radius))
    fail(Errc::BadRegion, "omega radius must be positive");
  if (!(inner_margin > 0.0) || !(inner_margin < omega.radius))
    fail(Errc::BadRegion, "inner_margin must lie in (0, omega.radius)");
  for (const auto& b : branch_neighborhoods) {
    require_finite(b.center, "branch disc center");
    if (!(b.radius > 0.0)) fail(Errc::BadRegion, "branch disc radius must be positive");
    if (b.order < 2) fail(Errc::BadRegion, "branch order must be >= 2");
    // Eq-style enlarged containment: disc(xi, 2 diam W) inside omega.
    if (std::abs(b.center - omega.center) + 4.0 * b.radius > omega.radius)
      fail(Errc::BadRegion, "branch disc too large: its doubled-diameter disc leaves omega");
  }
  for (std::size_t i = 0; i < branch_neighborhoods.size(); ++i)
    for (std::size_t k = i + 1; k < branch_neighborhoods.size(); ++k) {
      const auto& a = branch_neighborhoods[i];
      const auto& b = branch_neighborhoods[k];
      if (std::abs(a.center - b.center) <= a.radius + b.radius)
        fail(Errc::BadRegion, "branch disc closures must be pairwise disjoint");
    }
}

bool RegionConfig::contains(cplx lambda) const {
  return std::abs(lambda - omega.center) <= omega.radius;
}

int RegionConfig::branch_index(cplx lambda) const {
  for (std::size_t j = 0; j < branch_neighborhoods.size(); ++j)
    if (std::abs(lambda - branch_neighborhoods[j].center) <= branch_neighborhoods[j].radius)
      return static_cast<int>(j);
  return -1;
}

nlohmann::json RegionConfig::to_json() const {
  auto branches = nlohmann::json::array();
  for (const auto& b : branch_neighborhoods)
    branches.push_back(
        {{"center", cplx_json(b.center)}, {"radius", b.radius}, {"order", b.order}});
  return {{"omega", {{"center", cplx_json(omega.center)}, {"radius", omega.radius}}},
          {"branch_neighborhoods", std::move(branches)},
          {"inner_margin", inner_margin}};
}

RegionConfig RegionConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("omega"))
    fail(Errc::ParseError, "region JSON needs a field 'omega'");
  const auto& om = j["omega"];
  if (!om.is_object() || !om.contains("center") || !om.contains("radius") ||
      !om["radius"].is_number())
    fail(Errc::ParseError, "omega needs 'center' and numeric 'radius'");
  Disc omega{cplx_from_json(om["center"], "omega center"), om["radius"].get<double>()};
  std::vector<Branch> branches;
  if (j.contains("branch_neighborhoods")) {
    if (!j["branch_neighborhoods"].is_array())
      fail(Errc::ParseError, "branch_neighborhoods must be an array");
    for (const auto& b : j["branch_neighborhoods"]) {
      if (!b.is_object() || !b.contains("center") || !b.contains("radius") ||
          !b["radius"].is_number())
        fail(Errc::ParseError, "branch disc needs 'center' and numeric 'radius'");
      Branch br;
      br.center = cplx_from_json(b["center"], "branch center");
      br.radius = b["radius"].get<double>();
      br.order = b.value("order", 2);
      branches.push_back(br);
    }
  }
  const double margin = j.value("inner_margin", 0.05);
  return RegionConfig(omega, std::move(branches), margin);
}

MeasureResult thickened_measure(const CompactSet& G, double sigma, cplx a, double R,
                                int resolution, int workers) {
  if (!(sigma > 0.0) || !(R > 0.0)) fail(Errc::BadGrid, "sigma and R must be positive");
  if (resolution < 64) fail(Errc::BadGrid, "resolution must be >= 64");
  const double cell = 2.0 * R / static_cast<double>(resolution);
  if (sigma < 2.0 * cell)
    fail(Errc::ResolutionTooCoarse, "thickening " + std::to_string(sigma) +
                                        " is thinner than two grid cells (" +
                                        std::to_string(2.0 * cell) + ")");
  const double half_diag = cell * M_SQRT2 / 2.0;

  const bool bucketed = G.variant() == CompactSet::Variant::point_cloud;
  PointBuckets buckets(G.points(), sigma + 2.0 * half_diag);

  const int n = resolution;
  std::vector<std::int64_t> row_count(n, 0), row_straddle(n, 0);
  run_chunked(static_cast<std::size_t>(n), workers, [&](std::size_t rb, std::size_t re) {
    for (std::size_t iy = rb; iy < re; ++iy) {
      std::int64_t counted = 0, straddling = 0;
      const double y = a.imag() - R + (static_cast<double>(iy) + 0.5) * cell;
      for (int ix = 0; ix < n; ++ix) {
        const double x = a.real() - R + (static_cast<double>(ix) + 0.5) * cell;
        const cplx q{x, y};
        const double from_center = std::abs(q - a);
        const double d = bucketed ? buckets.distance_capped(q) : distance(G, q);
        const bool inside_disc = from_center <= R;
        if (inside_disc && d > 0.0 && d < sigma) ++counted;
        const bool near_sigma = std::isfinite(d) && std::abs(d - sigma) <= half_diag;
        const bool near_zero = std::isfinite(d) && d <= half_diag;
        const bool near_rim = std::abs(from_center - R) <= half_diag;
        if (near_sigma || near_zero || near_rim) ++straddling;
      }
      row_count[iy] = counted;
      row_straddle[iy] = straddling;
    }
  });
  MeasureResult out;
  for (int iy = 0; iy < n; ++iy) {
    out.counted_cells += row_count[iy];
    out.straddle_cells += row_straddle[iy];
  }
  out.measure = static_cast<double>(out.counted_cells) * cell * cell;
  out.error_bar = static_cast<double>(out.straddle_cells) * cell * cell;
  return out;
}

AdmissibilityFit fit_admissibility(const CompactSet& G, const std::vector<double>& sigmas,
                                   const std::vector<double>& radii,
                                   const std::vector<cplx>& centers, int resolution,
                                   int workers) {
  if (sigmas.size() < 4) fail(Errc::InsufficientDecades, "need at least 4 sigma values");
  double smin = sigmas[0], smax = sigmas[0];
  for (double s : sigmas) {
    if (!(s > 0.0)) fail(Errc::BadGrid, "sigma values must be positive");
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  if (smax / smin < 10.0 * (1.0 - 1e-9))
    fail(Errc::InsufficientDecades, "sigma values must span at least one decade");
  if (radii.empty() || centers.empty()) fail(Errc::BadGrid, "need radii and centers");

  // Reduced model: log m - 2 log sigma = log C + p (log R - log sigma).
  std::vector<double> xs, ys;
  int positive = 0;
  for (double sigma : sigmas)
    for (double R : radii) {
      if (sigma > R / 4.0 * (1.0 + 1e-12)) continue;  // saturated regime excluded
      if (sigma < 2.0 * (2.0 * R / resolution)) continue;  // under-resolved at this grid
      for (cplx a : centers) {
        const MeasureResult m = thickened_measure(G, sigma, a, R, resolution, workers);
        if (m.measure <= 0.0) continue;
        ++positive;
        xs.push_back(std::log(R) - std::log(sigma));
        ys.push_back(std::log(m.measure) - 2.0 * std::log(sigma));
      }
    }
  if (positive == 0) fail(Errc::DegenerateFit, "all thickening measures are zero");
  const auto n = static_cast<double>(xs.size());
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
  if (sxx <= 1e-12) fail(Errc::DegenerateFit, "sigma/R spread too small to identify the exponent");
  AdmissibilityFit fit;
  fit.raw_slope = sxy / sxx;
  fit.p_hat = std::clamp(fit.raw_slope, 0.0, 2.0);
  const double intercept = my - fit.raw_slope * mx;
  fit.C_hat = std::exp(intercept);
  fit.used_triples = static_cast<int>(xs.size());
  fit.residuals.reserve(xs.size());
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + fit.raw_slope * xs[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

CompactSet preimage_set(const AnalyticFunction& f, const CompactSet& K, const RegionConfig& region,
                        int grid) {
  if (grid < 1) fail(Errc::BadGrid, "grid must be >= 1");
  const std::vector<cplx> anchors = K.sample_points(static_cast<std::size_t>(grid));
  for (cplx s : anchors)
    if (!region.contains(s))
      fail(Errc::BadRegion, "set sample lies outside region omega; K must sit inside the region");
  const Tolerances& tols = default_tols();
  std::vector<cplx> cloud = anchors;
  for (cplx s : anchors) {
    const PreimageFan fan = preimages(f, f.eval(s), region, tols);
    for (const auto& e : fan.entries) cloud.push_back(e.lambda);
  }
  // Dedup at the cluster tolerance, first-seen representative kept.
  std::vector<cplx> unique;
  for (cplx p : cloud) {
    bool seen = false;
    for (cplx u : unique)
      if (std::abs(p - u) <= tols.cluster) {
        seen = true;
        break;
      }
    if (!seen) unique.push_back(p);
  }
  return CompactSet::point_cloud(std::move(unique));
}

}  // namespace reslab
