#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "reslab/matrix.hpp"
#include "test_util.hpp"

using reslab::ComplexMatrix;
using reslab::cplx;
using reslab::Errc;
using testutil::fails_as;

namespace {

ComplexMatrix from_rows(const std::vector<std::vector<cplx>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return ComplexMatrix(m);
}

std::vector<cplx> sorted_flat_spectrum(const ComplexMatrix& T) {
  std::vector<cplx> eigs = reslab::spectrum(T).flatten();
  std::sort(eigs.begin(), eigs.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return eigs;
}

}  // namespace

TEST_CASE("min_singular_value on closed-form matrices") {
  CHECK(reslab::min_singular_value(ComplexMatrix(Eigen::MatrixXcd::Identity(2, 2))) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(reslab::min_singular_value(ComplexMatrix(Eigen::MatrixXcd::Zero(3, 3))) ==
        doctest::Approx(0.0).epsilon(1e-14));
  // sigma_min of [[-1,1],[0,-1]] solves the 2x2 Gram characteristic equation:
  // (sqrt(5)-1)/2.
  const ComplexMatrix A = from_rows({{cplx{-1, 0}, cplx{1, 0}}, {cplx{0, 0}, cplx{-1, 0}}});
  CHECK(reslab::min_singular_value(A) ==
        doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("resolvent_norm closed forms and the proximity guard") {
  const ComplexMatrix D = ComplexMatrix::diagonal({cplx{0, 0}, cplx{1, 0}});
  CHECK(reslab::resolvent_norm(D, cplx{2, 0}) == doctest::Approx(1.0).epsilon(1e-12));

  const ComplexMatrix J = ComplexMatrix::jordan(cplx{0, 0}, 2);
  CHECK(reslab::resolvent_norm(J, cplx{1, 0}) ==
        doctest::Approx(2.0 / (std::sqrt(5.0) - 1.0)).epsilon(1e-12));

  CHECK(fails_as(Errc::SpectrumProximity, [&] { reslab::resolvent_norm(J, cplx{0, 0}); }));
}

TEST_CASE("spectrum: triangular read-off, multiplicities, dense path") {
  const auto d = sorted_flat_spectrum(ComplexMatrix::diagonal({cplx{1, 0}, cplx{2, 0}, cplx{3, 0}}));
  REQUIRE(d.size() == 3);
  CHECK(std::abs(d[0] - cplx{1, 0}) <= 1e-14);
  CHECK(std::abs(d[1] - cplx{2, 0}) <= 1e-14);
  CHECK(std::abs(d[2] - cplx{3, 0}) <= 1e-14);

  const auto jr = reslab::spectrum(ComplexMatrix::jordan(cplx{3, 0}, 2));
  REQUIRE(jr.eigenvalues.size() == 1);
  CHECK(jr.eigenvalues[0].multiplicity == 2);
  CHECK(std::abs(jr.eigenvalues[0].value - cplx{3, 0}) <= 1e-14);
  CHECK(jr.total_multiplicity() == 2);

  // Companion matrix of z^2 - 3z; its eigenvalues are the roots {0, 3}.
  const ComplexMatrix C = from_rows({{cplx{0, 0}, cplx{0, 0}}, {cplx{1, 0}, cplx{3, 0}}});
  const auto ce = sorted_flat_spectrum(C);
  REQUIRE(ce.size() == 2);
  CHECK(std::abs(ce[0]) <= 1e-12);
  CHECK(std::abs(ce[1] - cplx{3, 0}) <= 1e-12);

  // Non-triangular input exercises the dense eigensolver.
  const ComplexMatrix S = from_rows({{cplx{0, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{0, 0}}});
  const auto se = sorted_flat_spectrum(S);
  REQUIRE(se.size() == 2);
  CHECK(std::abs(se[0] - cplx{-1, 0}) <= 1e-10);
  CHECK(std::abs(se[1] - cplx{1, 0}) <= 1e-10);
}

TEST_CASE("builders: jordan, diagonal, direct_sum, random_triangular") {
  const ComplexMatrix J = ComplexMatrix::jordan(cplx{3, 0}, 2);
  CHECK(J(0, 0) == cplx{3, 0});
  CHECK(J(0, 1) == cplx{1, 0});
  CHECK(J(1, 0) == cplx{0, 0});
  CHECK(J(1, 1) == cplx{3, 0});

  const ComplexMatrix AB =
      ComplexMatrix::direct_sum(ComplexMatrix::diagonal({cplx{1, 0}}),
                                ComplexMatrix::diagonal({cplx{2, 0}}));
  CHECK(AB.dim() == 2);
  CHECK(AB(0, 0) == cplx{1, 0});
  CHECK(AB(1, 1) == cplx{2, 0});
  CHECK(AB(0, 1) == cplx{0, 0});

  const ComplexMatrix R1 = ComplexMatrix::random_triangular(4, cplx{0, 0}, 1.0, 7);
  const ComplexMatrix R2 = ComplexMatrix::random_triangular(4, cplx{0, 0}, 1.0, 7);
  CHECK(R1.data() == R2.data());
  CHECK(R1.is_upper_triangular());
  for (int i = 0; i < 4; ++i) CHECK(std::abs(R1(i, i)) <= 1.0 + 1e-12);
  const ComplexMatrix R3 = ComplexMatrix::random_triangular(4, cplx{0, 0}, 1.0, 8);
  CHECK(R1.data() != R3.data());
}

TEST_CASE("builder and construction errors") {
  CHECK(fails_as(Errc::BadDimension, [] { ComplexMatrix::jordan(cplx{0, 0}, 0); }));
  CHECK(fails_as(Errc::BadDimension, [] { ComplexMatrix::diagonal({}); }));
  CHECK(fails_as(Errc::BadDimension, [] { ComplexMatrix::random_triangular(0, cplx{0, 0}, 1, 1); }));
  CHECK(fails_as(Errc::BadRegion, [] { ComplexMatrix::random_triangular(3, cplx{0, 0}, -1, 1); }));
  CHECK(fails_as(Errc::BadDimension, [] { ComplexMatrix(Eigen::MatrixXcd(2, 3)); }));
  CHECK(fails_as(Errc::BadDimension, [] { ComplexMatrix(Eigen::MatrixXcd(0, 0)); }));
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 1) = cplx{std::numeric_limits<double>::quiet_NaN(), 0};
  CHECK(fails_as(Errc::NonFinite, [&] { ComplexMatrix{bad}; }));
}

TEST_CASE("block partition and triangular flags") {
  const ComplexMatrix T =
      ComplexMatrix::direct_sum(ComplexMatrix::jordan(cplx{0, 0}, 2),
                                ComplexMatrix::diagonal({cplx{5, 0}}));
  REQUIRE(T.diagonal_blocks().size() == 2);
  CHECK(T.diagonal_blocks()[0] == std::vector<int>{0, 1});
  CHECK(T.diagonal_blocks()[1] == std::vector<int>{2});
  CHECK(T.is_upper_triangular());
  CHECK_FALSE(T.is_lower_triangular());

  // Operator norm: sigma_max of [[-1,1],[0,-1]] is (sqrt(5)+1)/2.
  const ComplexMatrix A = from_rows({{cplx{-1, 0}, cplx{1, 0}}, {cplx{0, 0}, cplx{-1, 0}}});
  CHECK(A.operator_norm() == doctest::Approx((std::sqrt(5.0) + 1.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("JSON and CSV exchange") {
  const ComplexMatrix T = ComplexMatrix::random_triangular(5, cplx{1, 1}, 2.0, 3);
  const ComplexMatrix back = ComplexMatrix::from_json(T.to_json());
  CHECK(back.data() == T.data());

  std::istringstream csv("row,col,re,im\n0,0,1,0\n1,1,2,-0.5\n");
  const ComplexMatrix M = ComplexMatrix::from_csv(csv);
  CHECK(M.dim() == 2);
  CHECK(M(0, 0) == cplx{1, 0});
  CHECK(M(1, 1) == cplx{2, -0.5});
  CHECK(M(0, 1) == cplx{0, 0});
  CHECK(M(1, 0) == cplx{0, 0});

  std::istringstream bad_header("a,b,c,d\n0,0,1,0\n");
  CHECK(fails_as(Errc::ParseError, [&] { ComplexMatrix::from_csv(bad_header); }));
  std::istringstream negative("row,col,re,im\n-1,0,1,0\n");
  CHECK(fails_as(Errc::ParseError, [&] { ComplexMatrix::from_csv(negative); }));
  nlohmann::json j = {{"dim", 2}, {"re", {{0, 0}}}, {"im", {{0, 0}}}};
  CHECK(fails_as(Errc::BadDimension, [&] { ComplexMatrix::from_json(j); }));
}

TEST_CASE("normal operators: resolvent norm times distance is 1") {
  testutil::Rng rng(11);
  std::vector<cplx> eigs;
  for (int i = 0; i < 40; ++i) eigs.push_back(rng.in_disc(cplx{0, 0}, 1.0));
  const ComplexMatrix D = ComplexMatrix::diagonal(eigs);
  int tested = 0;
  for (int i = 0; i < 300; ++i) {
    const cplx anchor = eigs[static_cast<std::size_t>(rng.next() % eigs.size())];
    const cplx lambda = anchor + std::polar(rng.log_in(1e-6, 1.0), 2.0 * M_PI * rng.unit());
    const double d = testutil::dist_to(eigs, lambda);
    if (d < 1e-7) continue;
    ++tested;
    CHECK(reslab::resolvent_norm(D, lambda) * d == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(tested >= 250);
}

TEST_CASE("resolvent norm dominates the eigenvalue lower bound") {
  testutil::Rng rng(12);
  const ComplexMatrix T = ComplexMatrix::random_triangular(9, cplx{0, 0}, 1.0, 21);
  const std::vector<cplx> eigs = reslab::spectrum(T).flatten();
  for (int i = 0; i < 200; ++i) {
    const cplx lambda = rng.in_disc(cplx{0, 0}, 2.0);
    const double d = testutil::dist_to(eigs, lambda);
    if (d < 1e-4) continue;
    CHECK(reslab::resolvent_norm(T, lambda) >= (1.0 - 1e-10) / d);
  }
}

TEST_CASE("min_singular_value is unitarily invariant") {
  testutil::Rng rng(13);
  const ComplexMatrix T = ComplexMatrix::random_triangular(7, cplx{0, 0}, 1.0, 31);
  const auto householder = [&](std::uint64_t salt) {
    testutil::Rng r(salt);
    Eigen::VectorXcd v(7);
    for (int i = 0; i < 7; ++i) v(i) = cplx{r.in(-1, 1), r.in(-1, 1)};
    v.normalize();
    return (Eigen::MatrixXcd::Identity(7, 7) - 2.0 * v * v.adjoint()).eval();
  };
  const Eigen::MatrixXcd U = householder(101);
  const Eigen::MatrixXcd V = householder(202);
  const ComplexMatrix rotated = ComplexMatrix((U * T.data() * V).eval());
  CHECK(reslab::min_singular_value(rotated) ==
        doctest::Approx(reslab::min_singular_value(T)).epsilon(1e-12));
}

TEST_CASE("spectrum of a direct sum is the multiset union") {
  const ComplexMatrix A = ComplexMatrix::random_triangular(4, cplx{0, 0}, 1.0, 5);
  const ComplexMatrix B = ComplexMatrix::jordan(cplx{2, 1}, 3);
  auto joined = reslab::spectrum(A).flatten();
  const auto bs = reslab::spectrum(B).flatten();
  joined.insert(joined.end(), bs.begin(), bs.end());
  auto got = sorted_flat_spectrum(ComplexMatrix::direct_sum(A, B));
  std::sort(joined.begin(), joined.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  REQUIRE(got.size() == joined.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - joined[i]) <= 1e-10);
}
