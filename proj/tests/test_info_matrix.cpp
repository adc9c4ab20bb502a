#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "phasecrb/errors.hpp"
#include "phasecrb/info_matrix.hpp"

using namespace phasecrb;

TEST_SUITE("info_matrix") {
  TEST_CASE("L = 2 blocks") {
    const auto h = build_him(2.0, 0.005, 2);
    const auto t = h.h11();
    REQUIRE(t.size() == 2);
    CHECK(t.diag[0] == doctest::Approx(202.0).epsilon(1e-14));
    CHECK(t.diag[1] == doctest::Approx(202.0).epsilon(1e-14));
    CHECK(t.sub[0] == doctest::Approx(-200.0).epsilon(1e-14));
    CHECK(h.h12_first == doctest::Approx(200.0).epsilon(1e-14));
    CHECK(h.h12_last == doctest::Approx(-200.0).epsilon(1e-14));
    CHECK(h.h22 == doctest::Approx(200.0).epsilon(1e-14));

    const Eigen::MatrixXd d = h.dense();
    REQUIRE(d.rows() == 3);
    CHECK((d - d.transpose()).norm() == 0.0);
    CHECK(d(0, 2) == doctest::Approx(200.0));
    CHECK(d(1, 2) == doctest::Approx(-200.0));
  }

  TEST_CASE("H11 structure") {
    const double jd = 3.7, sw = 0.02;
    const auto h = build_him(jd, sw, 7);
    CHECK(h.a_coef == doctest::Approx(-sw * jd - 2.0));
    CHECK(h.b_coef == doctest::Approx(-1.0 / sw));
    const auto t = h.h11();
    // Each row of the prior part sums to zero; J_D is added on the diagonal.
    for (int i = 0; i < t.size(); ++i) {
      double row = t.diag[i];
      if (i > 0) row += t.sub[i - 1];
      if (i + 1 < t.size()) row += t.sub[i];
      CHECK(row == doctest::Approx(jd).epsilon(1e-12));
    }
    CHECK(h.h22 == doctest::Approx(6.0 / sw));
  }

  TEST_CASE("HIM is positive definite") {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_him(0.5, 0.1, 5).dense());
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }

  TEST_CASE("construction rejects bad input") {
    CHECK_THROWS_AS(build_him(2.0, 0.005, 1), InvalidInput);
    CHECK_THROWS_AS(build_him(0.0, 0.005, 5), InvalidInput);
    CHECK_THROWS_AS(build_him(2.0, -1.0, 5), InvalidInput);
    CHECK_THROWS_AS(build_bim(2.0, 0.005, 0), InvalidInput);
    CHECK_THROWS_AS(oracle_hcrb_diag(build_him(2.0, 0.005, kOracleMaxLength + 1)), InvalidInput);
  }

  TEST_CASE("BIM") {
    const auto one = build_bim(2.0, 0.005, 1);
    REQUIRE(one.size() == 1);
    CHECK(one.diag[0] == 2.0);
    const auto two = build_bim(2.0, 0.005, 2);
    CHECK(two.diag[0] == doctest::Approx(202.0));
    CHECK(two.sub[0] == doctest::Approx(-200.0));
    const auto h = build_him(2.0, 0.005, 9).h11();
    const auto b = build_bim(2.0, 0.005, 9);
    CHECK(h.diag == b.diag);
    CHECK(h.sub == b.sub);
  }

  TEST_CASE("oracle bounds at small L") {
    const auto hc = oracle_hcrb_diag(build_him(2.0, 0.005, 2));
    CHECK(std::fabs(hc[0] - 0.5) <= 1e-12);
    CHECK(std::fabs(hc[1] - 0.5) <= 1e-12);
    const auto bc = oracle_bcrb_diag(build_bim(2.0, 0.005, 2));
    CHECK(bc[0] == doctest::Approx(202.0 / 804.0).epsilon(1e-13));
    CHECK(oracle_bcrb_diag(build_bim(2.0, 0.005, 1))[0] == 0.5);
    // A nearly flat prior leaves one observation's worth of information.
    CHECK(oracle_bcrb_diag(build_bim(2.0, 1e6, 2))[0] == doctest::Approx(0.5).epsilon(1e-3));
  }

  TEST_CASE("HCRB dominates BCRB and both are palindromic") {
    for (double jd : {0.5, 2.0, 20.0}) {
      for (double sw : {0.005, 0.1}) {
        const int L = 30;
        const auto h = oracle_hcrb_diag(build_him(jd, sw, L));
        const auto b = oracle_bcrb_diag(build_bim(jd, sw, L));
        for (int l = 0; l < L; ++l) {
          CHECK(h[l] >= b[l]);
          CHECK(b[l] <= (1.0 / jd) * (1.0 + 1e-9));
          CHECK(std::fabs(h[l] - h[L - 1 - l]) <= 1e-10 * h[l]);
          CHECK(std::fabs(b[l] - b[L - 1 - l]) <= 1e-10 * b[l]);
        }
      }
    }
  }

  TEST_CASE("oracle_bound dispatch") {
    const double jd = 3.1, sw = 0.01;
    const auto off = oracle_hcrb_diag(build_him(jd, sw, 12));
    CHECK(oracle_bound(jd, sw, BoundKind::hcrb, EstimationMode::offline, 12, 4) == off[3]);
    const auto on = oracle_bcrb_diag(build_bim(jd, sw, 4));
    CHECK(oracle_bound(jd, sw, BoundKind::bcrb, EstimationMode::online, 12, 4) == on[3]);
    CHECK_THROWS_AS(oracle_bound(jd, sw, BoundKind::hcrb, EstimationMode::offline, 12, 13), InvalidInput);
    CHECK_THROWS_AS(oracle_bound(jd, sw, BoundKind::hcrb, EstimationMode::online, 12, 1), InvalidInput);
  }

  TEST_CASE("singular matrices are reported") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 2.0, 2.0, 4.0;
    CHECK_THROWS_AS(oracle_inverse(m), SingularMatrix);
    m << 1.0, 0.0, 0.0, 1e-30;
    CHECK_THROWS_AS(oracle_inverse(m), SingularMatrix);
    m << 2.0, 1.0, 1.0, 2.0;
    CHECK(oracle_inverse(m)(0, 0) == doctest::Approx(2.0 / 3.0));
  }
}
