#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "reslab/analytic.hpp"
#include "reslab/compact_set.hpp"
#include "test_util.hpp"

using reslab::CompactSet;
using reslab::cplx;
using reslab::Disc;
using reslab::Errc;
using reslab::LipschitzCurve;
using reslab::RegionConfig;
using testutil::fails_as;

namespace {

LipschitzCurve horizontal_segment(double t0, double t1, std::size_t samples = 33) {
  LipschitzCurve c;
  c.zeta = cplx{1, 0};
  c.t0 = t0;
  c.t1 = t1;
  c.heights.assign(samples, 0.0);
  c.lipschitz_constant = 1.0;
  return c;
}

CompactSet unit_segment() { return CompactSet::curve_union({horizontal_segment(0.0, 1.0)}); }

CompactSet filled_square_cloud(int per_side) {
  std::vector<cplx> grid;
  for (int iy = 0; iy < per_side; ++iy)
    for (int ix = 0; ix < per_side; ++ix)
      grid.push_back(cplx{static_cast<double>(ix) / (per_side - 1),
                          static_cast<double>(iy) / (per_side - 1)});
  return CompactSet::point_cloud(std::move(grid));
}

}  // namespace

TEST_CASE("distance on the three variants") {
  const CompactSet pts = CompactSet::point_cloud({cplx{0, 0}, cplx{3, 0}});
  CHECK(reslab::distance(pts, cplx{1, 0}) == doctest::Approx(1.0).epsilon(1e-14));

  const CompactSet disc = CompactSet::disc_union({Disc{cplx{0, 0}, 1.0}});
  CHECK(reslab::distance(disc, cplx{3, 0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(reslab::distance(disc, cplx{0.5, 0}) == 0.0);

  CHECK(reslab::distance(unit_segment(), cplx{0.5, 0.25}) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(reslab::distance(unit_segment(), cplx{2.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distance is 1-Lipschitz on random pairs") {
  testutil::Rng rng(41);
  const CompactSet sets[] = {
      CompactSet::point_cloud({cplx{0, 0}, cplx{1, 1}, cplx{-2, 0.5}}),
      CompactSet::disc_union({Disc{cplx{0, 0}, 0.5}, Disc{cplx{2, 0}, 0.25}}),
      unit_segment()};
  for (const CompactSet& K : sets) {
    for (int i = 0; i < 1000; ++i) {
      const cplx x = rng.in_disc(cplx{0, 0}, 4.0);
      const cplx y = rng.in_disc(cplx{0, 0}, 4.0);
      CHECK(std::abs(reslab::distance(K, x) - reslab::distance(K, y)) <=
            std::abs(x - y) + 1e-12);
    }
  }
}

TEST_CASE("curve validation and constructor errors") {
  LipschitzCurve bad_slope = horizontal_segment(0.0, 1.0, 3);
  bad_slope.heights = {0.0, 10.0, 0.0};
  CHECK(fails_as(Errc::BadRegion, [&] { CompactSet::curve_union({bad_slope}); }));

  LipschitzCurve bad_zeta = horizontal_segment(0.0, 1.0);
  bad_zeta.zeta = cplx{2, 0};
  CHECK(fails_as(Errc::BadRegion, [&] { CompactSet::curve_union({bad_zeta}); }));

  LipschitzCurve bad_interval = horizontal_segment(0.0, 1.0);
  bad_interval.t0 = 2.0;
  CHECK(fails_as(Errc::BadRegion, [&] { CompactSet::curve_union({bad_interval}); }));

  CHECK(fails_as(Errc::BadRegion, [] { CompactSet::point_cloud({}); }));
  CHECK(fails_as(Errc::BadRegion, [] { CompactSet::disc_union({Disc{cplx{0, 0}, -1.0}}); }));
}

TEST_CASE("sample_points stay on the set and inside the bounding disc") {
  const CompactSet pts = CompactSet::point_cloud({cplx{0, 0}, cplx{3, 0}});
  CHECK(pts.sample_points(64) == pts.points());

  const CompactSet sets[] = {pts, CompactSet::disc_union({Disc{cplx{1, 1}, 0.5}}),
                             unit_segment()};
  for (const CompactSet& K : sets) {
    const Disc b = K.bounding_disc();
    for (cplx s : K.sample_points(128)) {
      CHECK(std::abs(s - b.center) <= b.radius + 1e-9);
      CHECK(reslab::distance(K, s) <= 1e-9);
    }
  }
}

TEST_CASE("set JSON round trips") {
  const CompactSet sets[] = {
      CompactSet::point_cloud({cplx{0.5, -1}, cplx{2, 3}}),
      CompactSet::disc_union({Disc{cplx{1, 0}, 0.25}, Disc{cplx{-1, 2}, 1.5}}),
      unit_segment()};
  for (const CompactSet& K : sets) {
    const CompactSet back = CompactSet::from_json(K.to_json());
    CHECK(back.variant() == K.variant());
    testutil::Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      const cplx z = rng.in_disc(cplx{0, 0}, 3.0);
      CHECK(reslab::distance(back, z) == doctest::Approx(reslab::distance(K, z)).epsilon(1e-12));
    }
  }
  CHECK(fails_as(Errc::ParseError, [] { CompactSet::from_json({{"variant", "blob"}}); }));
}

TEST_CASE("thickened_measure matches closed-form areas") {
  // Stadium around the unit segment: 2*sigma*L + pi*sigma^2.
  const auto stadium = reslab::thickened_measure(unit_segment(), 0.1, cplx{0.5, 0}, 10.0, 2048);
  CHECK(stadium.measure ==
        doctest::Approx(2.0 * 0.1 + M_PI * 0.01).epsilon(0.05));

  // Punctured disc around a single point.
  const CompactSet origin = CompactSet::point_cloud({cplx{0, 0}});
  const auto punctured = reslab::thickened_measure(origin, 1.0, cplx{0, 0}, 10.0, 2048);
  CHECK(punctured.measure == doctest::Approx(M_PI).epsilon(0.05));
  CHECK(punctured.error_bar >= 0.0);
  CHECK(punctured.counted_cells > 0);
}

TEST_CASE("thickened_measure around a dense square cloud grows like the frame") {
  // Between two thickenings that both exceed the cloud spacing, the interior
  // contribution cancels and the increment is the square's outer frame,
  // approximately 4*sigma + 4*sigma^2.
  const CompactSet cloud = filled_square_cloud(51);
  const cplx a{0.5, 0.5};
  const double m_hi = reslab::thickened_measure(cloud, 0.1, a, 1.0, 384).measure;
  const double m_lo = reslab::thickened_measure(cloud, 0.015, a, 1.0, 384).measure;
  const auto frame = [](double s) { return 4.0 * s + 4.0 * s * s; };
  CHECK(m_hi - m_lo == doctest::Approx(frame(0.1) - frame(0.015)).epsilon(0.10));
}

TEST_CASE("thickened_measure is monotone and guards its grid") {
  const CompactSet K = CompactSet::point_cloud({cplx{0, 0}, cplx{1, 0}});
  double prev = 0.0;
  for (double sigma : {0.1, 0.2, 0.4}) {
    const double m = reslab::thickened_measure(K, sigma, cplx{0.5, 0}, 4.0, 1024).measure;
    CHECK(m >= prev);
    prev = m;
  }
  const double small_r = reslab::thickened_measure(K, 0.2, cplx{0.5, 0}, 0.3, 256).measure;
  const double big_r = reslab::thickened_measure(K, 0.2, cplx{0.5, 0}, 3.0, 1024).measure;
  CHECK(big_r >= small_r - 1e-9);

  CHECK(fails_as(Errc::ResolutionTooCoarse,
                 [&] { reslab::thickened_measure(K, 0.001, cplx{0, 0}, 1.0, 64); }));
  CHECK(fails_as(Errc::BadGrid, [&] { reslab::thickened_measure(K, 0.1, cplx{0, 0}, 1.0, 32); }));
  CHECK(fails_as(Errc::BadGrid, [&] { reslab::thickened_measure(K, -0.1, cplx{0, 0}, 1.0, 128); }));
}

TEST_CASE("thickened_measure is deterministic across worker counts") {
  const CompactSet K = unit_segment();
  const auto one = reslab::thickened_measure(K, 0.05, cplx{0.5, 0}, 1.0, 512, 1);
  const auto four = reslab::thickened_measure(K, 0.05, cplx{0.5, 0}, 1.0, 512, 4);
  CHECK(one.measure == four.measure);
  CHECK(one.counted_cells == four.counted_cells);
  CHECK(one.straddle_cells == four.straddle_cells);
}

TEST_CASE("fit_admissibility recovers segment and point exponents") {
  const std::vector<double> sigmas{0.004, 0.008, 0.016, 0.03, 0.05};
  const std::vector<double> radii{0.2, 0.35, 0.5};
  const std::vector<cplx> centers{cplx{0.3, 0}, cplx{0.5, 0}, cplx{0.7, 0}};

  const auto seg = reslab::fit_admissibility(unit_segment(), sigmas, radii, centers, 512);
  CHECK(seg.p_hat >= 0.85);
  CHECK(seg.p_hat <= 1.15);
  CHECK(seg.p_hat <= 1.2);  // one-dimensional sets cap at curve admissibility
  CHECK(seg.used_triples >= 4);
  CHECK(seg.C_hat > 0.0);

  const auto point = reslab::fit_admissibility(CompactSet::point_cloud({cplx{0.5, 0}}), sigmas,
                                               radii, centers, 512);
  CHECK(point.p_hat >= 0.0);
  CHECK(point.p_hat <= 0.2);
}

TEST_CASE("fit_admissibility input guards") {
  const CompactSet seg = unit_segment();
  const std::vector<cplx> centers{cplx{0.5, 0}};
  CHECK(fails_as(Errc::InsufficientDecades, [&] {
    reslab::fit_admissibility(seg, {0.01, 0.02, 0.04}, {0.5}, centers);
  }));
  CHECK(fails_as(Errc::InsufficientDecades, [&] {
    reslab::fit_admissibility(seg, {0.01, 0.02, 0.04, 0.08}, {0.5}, centers);
  }));
  CHECK(fails_as(Errc::BadGrid, [&] {
    reslab::fit_admissibility(seg, {0.004, 0.008, 0.016, 0.05}, {}, centers);
  }));
  CHECK(fails_as(Errc::BadGrid, [&] {
    reslab::fit_admissibility(seg, {-0.004, 0.008, 0.016, 0.05}, {0.5}, centers);
  }));
  // A set far outside every window measures zero everywhere.
  CHECK(fails_as(Errc::DegenerateFit, [&] {
    reslab::fit_admissibility(CompactSet::point_cloud({cplx{100, 100}}),
                              {0.004, 0.008, 0.016, 0.05}, {0.5}, centers, 256);
  }));
}

TEST_CASE("RegionConfig membership and validation") {
  const RegionConfig region(Disc{cplx{0, 0}, 2.0}, {{cplx{1, 0}, 0.2, 2}});
  CHECK(region.contains(cplx{0.5, 0.5}));
  CHECK_FALSE(region.contains(cplx{3, 0}));
  CHECK(region.branch_index(cplx{1.05, 0}) == 0);
  CHECK(region.branch_index(cplx{0, 0}) == -1);

  const RegionConfig back = RegionConfig::from_json(region.to_json());
  CHECK(back.omega.radius == region.omega.radius);
  REQUIRE(back.branch_neighborhoods.size() == 1);
  CHECK(back.branch_neighborhoods[0].order == 2);

  CHECK(fails_as(Errc::BadRegion, [] { RegionConfig(Disc{cplx{0, 0}, -1.0}); }));
  CHECK(fails_as(Errc::BadRegion, [] { RegionConfig(Disc{cplx{0, 0}, 1.0}, {}, 2.0); }));
  // Doubled-diameter branch disc must stay inside omega.
  CHECK(fails_as(Errc::BadRegion,
                 [] { RegionConfig(Disc{cplx{0, 0}, 2.0}, {{cplx{1.5, 0}, 0.5, 2}}); }));
  CHECK(fails_as(Errc::BadRegion, [] {
    RegionConfig(Disc{cplx{0, 0}, 4.0}, {{cplx{0.5, 0}, 0.3, 2}, {cplx{1.0, 0}, 0.3, 2}});
  }));
  CHECK(fails_as(Errc::BadRegion,
                 [] { RegionConfig(Disc{cplx{0, 0}, 2.0}, {{cplx{0, 0}, 0.2, 1}}); }));
}

TEST_CASE("preimage_set pulls back images and contains K") {
  const auto square = reslab::AnalyticFunction::polynomial({cplx{0, 0}, cplx{0, 0}, cplx{1, 0}});
  const RegionConfig around_origin(Disc{cplx{0, 0}, 2.0});
  const CompactSet one = CompactSet::point_cloud({cplx{1, 0}});
  const CompactSet pre = reslab::preimage_set(square, one, around_origin);
  CHECK(reslab::distance(pre, cplx{1, 0}) <= 1e-8);
  CHECK(reslab::distance(pre, cplx{-1, 0}) <= 1e-8);
  CHECK(pre.points().size() == 2);

  const auto f = reslab::AnalyticFunction::polynomial({cplx{0, 0}, cplx{-3, 0}, cplx{1, 0}});
  const RegionConfig wide(Disc{cplx{1.5, 0}, 3.0});
  const CompactSet zeros = CompactSet::point_cloud({cplx{0, 0}, cplx{3, 0}});
  const CompactSet pre2 = reslab::preimage_set(f, zeros, wide);
  CHECK(pre2.points().size() == 2);
  CHECK(reslab::distance(pre2, cplx{0, 0}) <= 1e-8);
  CHECK(reslab::distance(pre2, cplx{3, 0}) <= 1e-8);

  const auto ident = reslab::AnalyticFunction::polynomial({cplx{0, 0}, cplx{1, 0}});
  testutil::Rng rng(9);
  std::vector<cplx> pts;
  for (int i = 0; i < 17; ++i) pts.push_back(rng.in_disc(cplx{0, 0}, 1.0));
  const CompactSet K = CompactSet::point_cloud(pts);
  const CompactSet pre3 = reslab::preimage_set(ident, K, around_origin);
  for (cplx p : pts) CHECK(reslab::distance(pre3, p) <= 1e-8);

  CHECK(fails_as(Errc::BadRegion, [&] {
    reslab::preimage_set(square, CompactSet::point_cloud({cplx{10, 0}}), around_origin);
  }));
}
