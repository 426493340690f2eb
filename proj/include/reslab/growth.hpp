#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "reslab/analytic.hpp"
#include "reslab/base.hpp"
#include "reslab/compact_set.hpp"
#include "reslab/matrix.hpp"

namespace reslab {

struct FieldSample {
  cplx lambda;
  double dist;      // measured dist(lambda, K)
  double norm;      // ||(T - lambda)^{-1}||
  double log_dist;  // natural logs
  double log_norm;
};

/// Resolvent norms sampled over an annular distance band around a set.
struct ResolventField {
  std::vector<FieldSample> samples;
  CompactSet set;
  double d_min = 0.0;
  double d_max = 0.0;
  std::uint64_t seed = 0;
  int requested = 0;
  int skipped_proximity = 0;  // samples dropped by the singularity guard
  std::vector<std::string> warnings;

  double decades() const;
  void write_csv(std::ostream& out) const;  // re,im,dist,norm,log_dist,log_norm
};

struct SampleOptions {
  int workers = 1;
  int attempts_factor = 64;   // candidate budget per accepted sample
  std::vector<cplx> anchors;  // proposal centers; empty = sample K itself
};

/// Deterministic low-discrepancy sampling of ||(T - lambda)^{-1}|| at points
/// with dist(lambda, K) in [d_min, d_max]. Identical (seed, n) give identical
/// fields regardless of worker count.
ResolventField sample_field(const ComplexMatrix& T, const CompactSet& K, double d_min,
                            double d_max, int n_samples, std::uint64_t seed = 42,
                            const Tolerances& tols = default_tols(),
                            const SampleOptions& options = {});

struct GrowthFit {
  double s_hat = 0.0;
  double C_hat = 0.0;
  double r_squared = 0.0;
  struct EnvelopePoint {
    double log_dist;
    double log_norm;
    int count;  // samples in the bin
  };
  std::vector<EnvelopePoint> envelope;
  int bins = 0;
  int n_samples = 0;
  nlohmann::json to_json() const;
};

/// Growth order from the per-bin upper envelope of log norm vs log dist:
/// least squares on the bin maxima, s_hat = -slope, C_hat = exp(intercept).
GrowthFit fit_growth(const ResolventField& field, int bins = 24);

/// Envelope regression on raw (log dist, log norm) pairs; the core of
/// fit_growth, exposed for callers that build their own sample sets.
GrowthFit envelope_fit(const std::vector<FieldSample>& samples, int bins = 24,
                       double min_decades = 2.0, int min_samples = 100);

struct VerifyOptions {
  double d_min = 1e-4;
  double d_max = 1e-1;
  int n_samples = 2000;
  int bins = 24;
  std::uint64_t seed = 42;
  int workers = 1;
  double slack = 0.15;    // forward: s_fT <= s_T + slack; converse Lipschitz side
  double slack_p = 0.25;  // converse, admissible-set side: s_T <= s_fT + slack_p
};

/// Image of K under f, sampled as a point cloud.
CompactSet pushforward_set(const AnalyticFunction& f, const CompactSet& K,
                           std::size_t target = 1024);

struct TheoremAReport {
  GrowthFit fit_T;
  GrowthFit fit_fT;
  double s_T = 0.0;
  double s_fT = 0.0;
  double slack = 0.0;
  bool pass = false;
  ResolventField field_T;
  ResolventField field_fT;
  nlohmann::json to_json() const;
};

/// Fits growth orders of T against K and of f(T) against f(K) and checks
/// that the order does not increase (within slack).
TheoremAReport verify_theorem_A(const ComplexMatrix& T, const CompactSet& K,
                                const AnalyticFunction& f, const RegionConfig& region,
                                const VerifyOptions& options = {},
                                const Tolerances& tols = default_tols());

enum class GeometryClass { lipschitz, p_admissible, neither };

struct ConverseReport {
  GrowthFit fit_T;
  GrowthFit fit_fT;
  double s_T = 0.0;
  double s_fT = 0.0;
  GeometryClass geometry = GeometryClass::neither;
  double p_hat = 1.0;     // admissibility exponent when geometry is p_admissible
  double slack_used = 0.0;
  bool pass = false;
  ResolventField field_T;
  ResolventField field_fT;
  nlohmann::json to_json() const;
};

/// Transfers growth back from f(T) to T: requires every zero of f' inside
/// the region to stay clear of K (HypothesisViolation otherwise), then
/// checks s_T <= s_fT + slack (Lipschitz-type K) or + slack_p (admissible).
ConverseReport verify_converse(const ComplexMatrix& T, const CompactSet& K,
                               const AnalyticFunction& f, const RegionConfig& region,
                               const VerifyOptions& options = {},
                               const Tolerances& tols = default_tols());

struct RatioScan {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int pairs = 0;
};

/// Extrema of dist(lambda, preimage_set(f, K)) / dist(f(lambda), f(K)) over a
/// grid of lambda with dist(lambda, K) in [1e-3, 1e-1], branch discs excluded.
RatioScan bilipschitz_ratio_scan(const AnalyticFunction& f, const CompactSet& K,
                                 const RegionConfig& region, int grid = 64);

struct ComparisonRecord {
  cplx z;
  double lhs;     // ||(f(T) - z)^{-1}||
  double rhs;     // max_j ||(T - lambda_j)^{-1}||
  double ratio;   // lhs / rhs
  int preimage_count;
};

struct ComparisonScan {
  std::vector<ComparisonRecord> records;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int skipped = 0;  // z values rejected by guards (proximity, collision)
  nlohmann::json to_json() const;
};

/// Pointwise comparison of the f(T) resolvent against the dominant
/// T-resolvent over the preimage fan of each scanned z.
ComparisonScan resolvent_comparison_scan(const ComplexMatrix& T, const AnalyticFunction& f,
                                         const RegionConfig& region,
                                         const std::vector<cplx>& z_samples,
                                         const Tolerances& tols = default_tols());

}  // namespace reslab
