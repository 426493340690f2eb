#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "reslab/calculus.hpp"
#include "test_util.hpp"

using reslab::AnalyticFunction;
using reslab::ComplexMatrix;
using reslab::ContourCircle;
using reslab::ContourSpec;
using reslab::cplx;
using reslab::Disc;
using reslab::Errc;
using reslab::Polynomial;
using reslab::RegionConfig;
using testutil::fails_as;

namespace {

AnalyticFunction poly(std::initializer_list<double> re) {
  std::vector<cplx> c;
  for (double v : re) c.push_back(cplx{v, 0});
  return AnalyticFunction::polynomial(std::move(c));
}

const AnalyticFunction kSquare = poly({0, 0, 1});        // z^2
const AnalyticFunction kShifted = poly({0, -3, 1});      // z^2 - 3z
const AnalyticFunction kCubicPlus = poly({1, 2, 0, 1});  // z^3 + 2z + 1

}  // namespace

TEST_CASE("default contour encloses every eigenvalue with clearance") {
  const ComplexMatrix T = ComplexMatrix::diagonal({cplx{0, 0}, cplx{3, 0}, cplx{3.1, 0}});
  const ContourSpec spec = reslab::default_contour(T);
  for (cplx eig : reslab::spectrum(T).flatten()) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : spec.circles) best = std::max(best, c.radius - std::abs(eig - c.center));
    CHECK(best >= 1e-3 - 1e-12);  // inside some circle, clear of the contour line
  }
}

TEST_CASE("dunford_apply closed forms") {
  const ComplexMatrix T = ComplexMatrix::random_triangular(5, cplx{0, 0}, 1.0, 3);
  const auto ident = poly({0, 1});
  CHECK(testutil::rel_err(reslab::dunford_apply(T, ident).data(), T.data()) <= 1e-10);

  const ComplexMatrix J3 = ComplexMatrix::jordan(cplx{3, 0}, 2);
  Eigen::MatrixXcd want(2, 2);
  want << cplx{0, 0}, cplx{3, 0}, cplx{0, 0}, cplx{0, 0};
  CHECK((reslab::dunford_apply(J3, kShifted).data() - want).norm() <= 1e-9);

  const ComplexMatrix D = ComplexMatrix::diagonal({cplx{0.2, 0.1}, cplx{-0.4, 0}, cplx{0, 0.7}});
  Eigen::MatrixXcd dwant = Eigen::MatrixXcd::Zero(3, 3);
  for (int i = 0; i < 3; ++i) dwant(i, i) = kShifted.eval(D(i, i));
  CHECK(testutil::rel_err(reslab::dunford_apply(D, kShifted).data(), dwant) <= 1e-10);
}

TEST_CASE("dunford_apply matches plain Horner on random input") {
  const ComplexMatrix T = ComplexMatrix::random_triangular(5, cplx{0, 0}, 1.0, 42);
  const std::vector<cplx> coeffs{cplx{1, 0}, cplx{2, 0}, cplx{0, 0}, cplx{1, 0}};
  const auto want = testutil::horner_matrix(coeffs, T.data());
  const auto got = reslab::dunford_apply(T, AnalyticFunction::polynomial(coeffs));
  CHECK(testutil::rel_err(got.data(), want) <= 1e-9);
}

TEST_CASE("dunford_apply is multiplicative") {
  const ComplexMatrix T = ComplexMatrix::random_triangular(6, cplx{0, 0}, 1.0, 11);
  const auto f = poly({0, 1, 1});
  const auto fg = reslab::multiply(f, kShifted);
  const Eigen::MatrixXcd lhs = reslab::dunford_apply(T, fg).data();
  const Eigen::MatrixXcd rhs =
      (reslab::dunford_apply(T, f).data() * reslab::dunford_apply(T, kShifted).data()).eval();
  CHECK(testutil::rel_err(lhs, rhs) <= 1e-8);
}

TEST_CASE("contour and quadrature failure modes") {
  const ComplexMatrix T = ComplexMatrix::diagonal({cplx{0, 0}, cplx{1, 0}});
  // Circle through an eigenvalue.
  CHECK(fails_as(Errc::ContourTooClose, [&] {
    reslab::dunford_apply(T, kSquare, ContourSpec{{ContourCircle{cplx{0, 0}, 1.0}}});
  }));
  CHECK(fails_as(Errc::ContourTooClose, [&] {
    reslab::dunford_apply(T, kSquare, ContourSpec{{ContourCircle{cplx{0, 0}, -1.0}}});
  }));
  // An unattainable quadrature target must stall at the node cap.
  reslab::Tolerances strict;
  strict.quad = 0.0;
  CHECK(fails_as(Errc::QuadratureStall, [&] {
    reslab::dunford_apply(ComplexMatrix::jordan(cplx{3, 0}, 2), kShifted, {}, strict);
  }));
  // Contour enclosing a pole of a rational function.
  const auto inv = AnalyticFunction::rational(Polynomial({cplx{1, 0}}),
                                              Polynomial({cplx{-0.5, 0}, cplx{1, 0}}));
  CHECK(fails_as(Errc::DomainError, [&] {
    reslab::dunford_apply(T, inv, ContourSpec{{ContourCircle{cplx{0.5, 0}, 2.0}}});
  }));
  // Contour leaving a power-series evaluation disc.
  const auto snub = AnalyticFunction::power_series({cplx{0, 0}, cplx{1, 0}}, 0.4);
  CHECK(fails_as(Errc::DomainError,
                 [&] { reslab::dunford_apply(ComplexMatrix::diagonal({cplx{0, 0}, cplx{0.5, 0}}),
                                             snub); }));
}

TEST_CASE("apply_analytic_exact handles rationals blockwise") {
  const auto inv = AnalyticFunction::rational(Polynomial({cplx{1, 0}}),
                                              Polynomial({cplx{-5, 0}, cplx{1, 0}}));
  const ComplexMatrix D = ComplexMatrix::diagonal({cplx{0, 0}, cplx{1, 0}});
  const ComplexMatrix got = reslab::apply_analytic_exact(D, inv);
  CHECK(std::abs(got(0, 0) - cplx{-0.2, 0}) <= 1e-14);
  CHECK(std::abs(got(1, 1) - cplx{-0.25, 0}) <= 1e-14);
  CHECK(testutil::rel_err(reslab::dunford_apply(D, inv).data(), got.data()) <= 1e-10);
}

TEST_CASE("cofactor of z: closed forms and removable fills") {
  const RegionConfig wide(Disc{cplx{1.5, 0}, 4.0});

  const auto fan1 = reslab::preimages(kShifted, cplx{1, 0}, wide);
  const reslab::RootCofactor phi1(kShifted, fan1);
  CHECK(std::abs(phi1(cplx{0.3, 0.7}) - cplx{1, 0}) <= 1e-10);
  CHECK(std::abs(phi1(fan1.entries[0].lambda) - cplx{1, 0}) <= 1e-9);

  const auto two_sq = poly({0, 0, 2});
  const auto fan2 = reslab::preimages(two_sq, cplx{2, 0}, RegionConfig(Disc{cplx{0, 0}, 4.0}));
  const reslab::RootCofactor phi2(two_sq, fan2);
  CHECK(std::abs(phi2(cplx{0.4, -0.2}) - cplx{2, 0}) <= 1e-10);
  CHECK(std::abs(phi2(cplx{1, 0}) - cplx{2, 0}) <= 1e-9);

  const auto fan0 = reslab::preimages(kShifted, cplx{0, 0}, wide);
  const reslab::RootCofactor phi0(kShifted, fan0);
  CHECK(std::abs(phi0(cplx{0, 0}) - cplx{1, 0}) <= 1e-9);
}

TEST_CASE("cofactor factorization residual stays tiny across z") {
  const RegionConfig region(Disc{cplx{0, 0}, 5.0});
  testutil::Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const cplx z = kCubicPlus.eval(rng.in_disc(cplx{0, 0}, 0.5));
    const auto fan = reslab::preimages(kCubicPlus, z, region);
    const reslab::RootCofactor phi(kCubicPlus, fan);
    for (int i = 0; i < 5; ++i) {
      const cplx lambda = rng.in_disc(cplx{0, 0}, 2.0);
      cplx prod{1, 0};
      for (cplx root : fan.flatten()) prod *= lambda - root;
      const cplx fval = kCubicPlus.eval(lambda);
      CHECK(std::abs(fval - z - phi(lambda) * prod) <= 1e-10 * (1.0 + std::abs(fval)));
    }
  }
}

TEST_CASE("partial fraction coefficients: residue closed forms") {
  reslab::PreimageFan fan;
  fan.z = cplx{0, 0};
  fan.entries = {{cplx{0, 0}, 1}, {cplx{3, 0}, 1}};
  fan.count = 2;
  const auto c = reslab::partial_fraction_coeffs(fan);
  REQUIRE(c.size() == 2);
  CHECK(std::abs(c[0] - cplx{-1.0 / 3.0, 0}) <= 1e-14);
  CHECK(std::abs(c[1] - cplx{1.0 / 3.0, 0}) <= 1e-14);

  reslab::PreimageFan single;
  single.entries = {{cplx{5, 0}, 1}};
  single.count = 1;
  const auto c1 = reslab::partial_fraction_coeffs(single);
  REQUIRE(c1.size() == 1);
  CHECK(std::abs(c1[0] - cplx{1, 0}) <= 1e-14);

  reslab::PreimageFan pm;
  pm.entries = {{cplx{1, 0}, 1}, {cplx{-1, 0}, 1}};
  pm.count = 2;
  const auto c2 = reslab::partial_fraction_coeffs(pm);
  CHECK(std::abs(c2[0] - cplx{0.5, 0}) <= 1e-14);
  CHECK(std::abs(c2[1] - cplx{-0.5, 0}) <= 1e-14);
}

TEST_CASE("partial fraction reconstruction and collision guards") {
  const RegionConfig region(Disc{cplx{0, 0}, 5.0});
  const auto fan = reslab::preimages(kCubicPlus, cplx{2, 0.5}, region);
  REQUIRE(fan.count == 3);
  const auto c = reslab::partial_fraction_coeffs(fan);
  const auto roots = fan.flatten();
  testutil::Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    const cplx lambda = rng.in_disc(cplx{0, 0}, 3.0);
    if (testutil::dist_to(roots, lambda) < 1e-2) continue;
    cplx sum{0, 0};
    cplx prod{1, 0};
    for (std::size_t j = 0; j < roots.size(); ++j) {
      sum += c[j] / (lambda - roots[j]);
      prod *= lambda - roots[j];
    }
    CHECK(std::abs(sum - 1.0 / prod) <= 1e-10 * std::abs(1.0 / prod));
  }

  reslab::PreimageFan crowded;
  crowded.entries = {{cplx{0, 0}, 1}, {cplx{5e-8, 0}, 1}};
  crowded.count = 2;
  CHECK(fails_as(Errc::CriticalValueCollision,
                 [&] { reslab::partial_fraction_coeffs(crowded); }));
  reslab::PreimageFan doubled;
  doubled.entries = {{cplx{1.5, 0}, 2}};
  doubled.count = 2;
  CHECK(fails_as(Errc::CriticalValueCollision,
                 [&] { reslab::partial_fraction_coeffs(doubled); }));
}

TEST_CASE("difference quotient closed forms") {
  const reslab::DifferenceQuotient sq(kSquare, cplx{0.3, 0});
  CHECK(std::abs(sq(cplx{1.7, 0}) - cplx{2.0, 0}) <= 1e-13);  // t + lambda

  const reslab::DifferenceQuotient ps0(kShifted, cplx{0, 0});
  CHECK(std::abs(ps0(cplx{3, 0})) <= 1e-13);

  const reslab::DifferenceQuotient at07(kShifted, cplx{0.7, 0});
  CHECK(std::abs(at07(cplx{0.7, 0}) - cplx{-1.6, 0}) <= 1e-13);  // f'(lambda) at the anchor

  const auto inv = AnalyticFunction::rational(Polynomial({cplx{1, 0}}),
                                              Polynomial({cplx{-10, 0}, cplx{1, 0}}));
  const reslab::DifferenceQuotient rq(inv, cplx{2, 0});
  CHECK(std::abs(rq(cplx{3, 0}) - cplx{-1.0 / 56.0, 0}) <= 1e-14);

  const auto series = AnalyticFunction::power_series({cplx{0, 0}, cplx{1, 0}, cplx{0.5, 0}}, 5.0);
  const reslab::DifferenceQuotient sr(series, cplx{0.5, 0});
  CHECK(std::abs(sr(cplx{1, 0}) - cplx{1.75, 0}) <= 1e-13);
}

TEST_CASE("difference quotient transfers resolvents through f") {
  const ComplexMatrix T = ComplexMatrix::random_triangular(6, cplx{5, 0}, 1.0, 13);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(6, 6);
  testutil::Rng rng(31);
  const std::vector<cplx> eigs = reslab::spectrum(T).flatten();
  int tested = 0;
  for (int i = 0; i < 60 && tested < 25; ++i) {
    const cplx lambda = rng.in_disc(cplx{5, 0}, 2.0);
    if (testutil::dist_to(eigs, lambda) < 2e-2) continue;
    ++tested;
    const reslab::DifferenceQuotient psi(kSquare, lambda);
    const Eigen::MatrixXcd lhs = (T.data() - lambda * I).inverse();
    const Eigen::MatrixXcd fT = testutil::horner_matrix({cplx{0, 0}, cplx{0, 0}, cplx{1, 0}},
                                                        T.data());
    const Eigen::MatrixXcd rhs =
        (psi.apply(T).data() * (fT - kSquare.eval(lambda) * I).inverse()).eval();
    CHECK(testutil::rel_err(rhs, lhs) <= 1e-8);
  }
  CHECK(tested >= 20);
}

TEST_CASE("resolvent identity against direct inversion") {
  const ComplexMatrix T1 = ComplexMatrix::random_triangular(6, cplx{0, 0}, 1.0, 1);
  const auto r1 =
      reslab::resolvent_identity_check(T1, kSquare, cplx{4, 0}, RegionConfig(Disc{cplx{0, 0}, 4.0}));
  CHECK(r1.residual <= 1e-8);
  CHECK(r1.coeffs.size() == r1.fan.entries.size());
  CHECK(r1.cofactor_inverse_norm > 0.0);
  const auto j = r1.to_json();
  CHECK(j.contains("residual"));
  CHECK(j.contains("coeffs"));

  const ComplexMatrix T2 = ComplexMatrix::diagonal({cplx{0, 0}, cplx{1, 0}});
  const auto ident = poly({0, 1});
  const auto r2 =
      reslab::resolvent_identity_check(T2, ident, cplx{2, 0}, RegionConfig(Disc{cplx{0, 0}, 4.0}));
  CHECK(r2.residual <= 1e-12);

  const ComplexMatrix T3 = ComplexMatrix::jordan(cplx{3, 0}, 2);
  const auto r3 =
      reslab::resolvent_identity_check(T3, kShifted, cplx{1, 0}, RegionConfig(Disc{cplx{1.5, 0}, 4.0}));
  CHECK(r3.residual <= 1e-8);
}

TEST_CASE("sup of 1/|phi_z| over the shrunk region") {
  const RegionConfig wide(Disc{cplx{1.5, 0}, 4.0});
  const std::vector<cplx> zs{cplx{1, 0}, cplx{0, 1}, cplx{2, 0.5}};
  const auto monic = reslab::cofactor_inverse_scan(kShifted, zs, wide, 96);
  REQUIRE(monic.per_z_sup.size() == zs.size());
  for (double v : monic.per_z_sup) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(monic.overall_sup == doctest::Approx(1.0).epsilon(1e-9));

  const auto two_sq = poly({0, 0, 2});
  const auto scaled = reslab::cofactor_inverse_scan(two_sq, {cplx{2, 0}, cplx{1, 0}},
                                                    RegionConfig(Disc{cplx{0, 0}, 2.0}), 96);
  for (double v : scaled.per_z_sup) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));

  // Grid refinement changes the reported sup by at most a few percent.
  const RegionConfig narrow(Disc{cplx{1.5, 0}, 2.0});
  std::vector<cplx> sweep;
  for (int i = 0; i < 50; ++i) {
    const double th = 2.0 * M_PI * i / 50.0;
    sweep.push_back(kShifted.eval(cplx{1.5, 0} + 0.8 * cplx{std::cos(th), std::sin(th)}));
  }
  const double coarse = reslab::cofactor_inverse_scan(kShifted, sweep, narrow, 128).overall_sup;
  const double fine = reslab::cofactor_inverse_scan(kShifted, sweep, narrow, 256).overall_sup;
  CHECK(std::abs(coarse - fine) <= 0.05 * fine);
}

TEST_CASE("branch-case diagnostics: coefficient scaling near branch points") {
  const reslab::CompactSet origin = reslab::CompactSet::point_cloud({cplx{0, 0}});

  const RegionConfig region2(Disc{cplx{0, 0}, 2.0}, {{cplx{0, 0}, 0.4, 2}});
  const auto crit2 = reslab::critical_data(kSquare, region2);
  for (int i = 0; i < 15; ++i) {
    const double z = 1e-5 * std::pow(10.0, 3.0 * i / 14.0);
    const auto fan = reslab::preimages(kSquare, cplx{z, 0}, region2);
    const auto recs = reslab::branch_case_diagnostics(kSquare, cplx{z, 0}, fan, crit2, origin,
                                                      region2);
    REQUIRE(recs.size() == 2);
    for (const auto& r : recs) {
      CHECK(r.case_id == 2);
      CHECK(r.branch == 0);
      CHECK(r.case2_ratio == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(r.transfer_bound > 0.0);
    }
  }

  const auto ident = poly({0, 1});
  const RegionConfig plain(Disc{cplx{0, 0}, 2.0});
  const auto fan1 = reslab::preimages(ident, cplx{0.3, 0}, plain);
  const auto recs1 = reslab::branch_case_diagnostics(ident, cplx{0.3, 0}, fan1,
                                                     reslab::critical_data(ident, plain), origin,
                                                     plain);
  REQUIRE(recs1.size() == 1);
  CHECK(recs1[0].case_id == 1);
  CHECK(recs1[0].branch == -1);
  CHECK(recs1[0].abs_coeff == doctest::Approx(1.0).epsilon(1e-12));

  const auto cube = poly({0, 0, 0, 1});
  const RegionConfig region3(Disc{cplx{0, 0}, 2.0}, {{cplx{0, 0}, 0.4, 3}});
  const auto crit3 = reslab::critical_data(cube, region3);
  const auto fan3 = reslab::preimages(cube, cplx{1e-6, 0}, region3);
  const auto recs3 = reslab::branch_case_diagnostics(cube, cplx{1e-6, 0}, fan3, crit3, origin,
                                                     region3);
  REQUIRE(recs3.size() == 3);
  for (const auto& r : recs3) {
    CHECK(r.case_id == 2);
    CHECK(r.case2_ratio == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }
}

TEST_CASE("empirical preimage gap is strictly positive") {
  const RegionConfig region(Disc{cplx{1.5, 0}, 2.5}, {{cplx{1.5, 0}, 0.25, 2}});
  std::vector<cplx> zs;
  for (int i = 0; i < 24; ++i) {
    const double th = 2.0 * M_PI * i / 24.0;
    zs.push_back(kShifted.eval(cplx{1.5, 0} + 1.2 * cplx{std::cos(th), std::sin(th)}));
  }
  CHECK(reslab::empirical_preimage_gap(kShifted, region, zs) > 0.1);
}

TEST_CASE("derivative floor over the shrunk region") {
  const RegionConfig region(Disc{cplx{0, 0}, 1.0});
  const auto floor = reslab::derivative_floor(kShifted, region, 128);
  // min |2z - 3| over the disc of radius 0.95 is 1.1, at z = 0.95.
  CHECK(floor.tau >= 1.1 - 1e-9);
  CHECK(floor.tau <= 1.13);
  CHECK(floor.rho == doctest::Approx(floor.tau * 0.05 / 4.0).epsilon(1e-12));
  CHECK(std::abs(floor.argmin - cplx{0.95, 0}) <= 0.05);
  CHECK(fails_as(Errc::BadGrid, [&] { reslab::derivative_floor(kShifted, region, 1); }));
}
