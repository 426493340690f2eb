#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "reslab/base.hpp"

namespace reslab {

class AnalyticFunction;

struct Disc {
  cplx center;
  double radius = 0.0;
};

/// Graph-type curve z = zeta * (t + i h(t)) with h sampled on a uniform grid.
struct LipschitzCurve {
  cplx zeta;  // unit modulus
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> heights;  // >= 2 samples, |h(t+dt)-h(t)| <= L*dt
  double lipschitz_constant = 1.0;

  void validate() const;
  std::vector<cplx> vertices() const;
  /// Max distance between the curve and its polyline: step * sqrt(1+L^2) / 2.
  double sampling_slack() const;
};

/// Compact K subset of the plane: finite points, closed discs, or Lipschitz
/// curves. Distance is exact for points and discs, polyline-accurate for
/// curves. Immutable.
class CompactSet {
 public:
  enum class Variant { point_cloud, disc_union, curve_union };

  /// Empty placeholder (a zero-point cloud, distance +inf everywhere); report
  /// structs default-construct one and assign a real set before use.
  CompactSet() = default;

  static CompactSet point_cloud(std::vector<cplx> points);
  static CompactSet disc_union(std::vector<Disc> discs);
  static CompactSet curve_union(std::vector<LipschitzCurve> curves);

  Variant variant() const { return variant_; }
  const std::vector<cplx>& points() const { return points_; }
  const std::vector<Disc>& discs() const { return discs_; }
  const std::vector<LipschitzCurve>& curves() const { return curves_; }
  const Disc& bounding_disc() const { return bounding_; }

  /// Deterministic representative points: the cloud itself, disc boundary
  /// rings plus sunflower interiors, or polyline samples. Anchors for field
  /// sampling and for pushing K through a map.
  std::vector<cplx> sample_points(std::size_t target) const;

  nlohmann::json to_json() const;
  static CompactSet from_json(const nlohmann::json& j);

 private:
  Variant variant_ = Variant::point_cloud;
  std::vector<cplx> points_;
  std::vector<Disc> discs_;
  std::vector<LipschitzCurve> curves_;
  Disc bounding_;
};

/// Euclidean distance from lambda to K (0 inside a disc component).
double distance(const CompactSet& K, cplx lambda);

/// Numeric stand-in for the working region: one disc omega plus branch discs
/// W_j around critical points xi_j of order m_j, and an inner margin playing
/// the role of "strictly inside".
struct RegionConfig {
  struct Branch {
    cplx center;
    double radius = 0.0;
    int order = 2;
  };

  Disc omega;
  std::vector<Branch> branch_neighborhoods;
  double inner_margin = 0.05;

  RegionConfig(Disc om, std::vector<Branch> branches = {}, double margin = 0.05);

  bool contains(cplx lambda) const;
  /// Index of the branch disc containing lambda, or -1.
  int branch_index(cplx lambda) const;

  nlohmann::json to_json() const;
  static RegionConfig from_json(const nlohmann::json& j);
};

struct MeasureResult {
  double measure = 0.0;
  double error_bar = 0.0;  // straddling cells * cell area
  std::int64_t counted_cells = 0;
  std::int64_t straddle_cells = 0;
};

/// Grid-counting estimate of m([G]_sigma ∩ D(a,R)) where [G]_sigma is the
/// punctured sigma-thickening {0 < dist(y,G) < sigma}. Cells of side
/// 2R/resolution; a cell counts when its center qualifies. Deterministic for
/// any worker count (per-row tallies summed in row order).
MeasureResult thickened_measure(const CompactSet& G, double sigma, cplx a, double R,
                                int resolution, int workers = 1);

struct AdmissibilityFit {
  double p_hat = 0.0;
  double raw_slope = 0.0;  // before clamping into [0, 2]
  double C_hat = 1.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  int used_triples = 0;
};

/// Least-squares fit of log m ~ log C + (2-p) log sigma + p log R over all
/// (sigma, R, center) triples with sigma <= R/4 and positive measure.
AdmissibilityFit fit_admissibility(const CompactSet& G, const std::vector<double>& sigmas,
                                   const std::vector<double>& radii,
                                   const std::vector<cplx>& centers, int resolution = 512,
                                   int workers = 1);

/// Point-cloud approximation of f^{-1}(f(K)) ∩ omega: every preimage of every
/// pushed sample of K, plus K's own samples. `grid` controls the sampling
/// resolution of K.
CompactSet preimage_set(const AnalyticFunction& f, const CompactSet& K,
                        const RegionConfig& region, int grid = 256);

}  // namespace reslab
