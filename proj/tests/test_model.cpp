#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "phasecrb/errors.hpp"
#include "phasecrb/model.hpp"

using namespace phasecrb;

TEST_SUITE("model") {
  TEST_CASE("BPSK is {-1, +1}") {
    const auto c = build_constellation(ConstellationLabel::bpsk);
    REQUIRE(c.order() == 2);
    CHECK(c.points()[0] == std::complex<double>(-1.0, 0.0));
    CHECK(c.points()[1] == std::complex<double>(1.0, 0.0));
    CHECK(c.mean_energy() == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("QAM4 is (+-1 +- j)/sqrt2") {
    const auto c = build_constellation(ConstellationLabel::qam4);
    REQUIRE(c.order() == 4);
    for (const auto& p : c.points()) {
      CHECK(std::fabs(p.real()) == doctest::Approx(1.0 / std::sqrt(2.0)));
      CHECK(std::fabs(p.imag()) == doctest::Approx(1.0 / std::sqrt(2.0)));
    }
  }

  TEST_CASE("QAM16 sits on the odd grid scaled by 1/sqrt(10)") {
    // Unscaled grid energy: sum over {+-1, +-3}^2 of |s|^2 is 160, i.e. 10 per point.
    double raw = 0.0;
    for (int a : {-3, -1, 1, 3})
      for (int b : {-3, -1, 1, 3}) raw += a * a + b * b;
    REQUIRE(raw / 16.0 == 10.0);

    const auto c = build_constellation(ConstellationLabel::qam16);
    REQUIRE(c.order() == 16);
    for (const auto& p : c.points()) {
      const double re = p.real() * std::sqrt(10.0), im = p.imag() * std::sqrt(10.0);
      CHECK(std::fabs(re - std::round(re)) < 1e-12);
      CHECK(static_cast<long>(std::round(re)) % 2 != 0);
      CHECK(static_cast<long>(std::round(im)) % 2 != 0);
    }
    // Row-major: imaginary outer, real inner, both ascending.
    CHECK(c.points()[0].real() < c.points()[1].real());
    CHECK(c.points()[0].imag() == c.points()[3].imag());
    CHECK(c.points()[0].imag() < c.points()[4].imag());
  }

  TEST_CASE("every label: unit energy, distinct, negation symmetric") {
    for (auto label : {ConstellationLabel::bpsk, ConstellationLabel::qam4, ConstellationLabel::qam16,
                       ConstellationLabel::qam64, ConstellationLabel::qam256}) {
      CAPTURE(to_string(label));
      const auto c = build_constellation(label);
      CHECK(std::fabs(c.mean_energy() - 1.0) < 1e-12);
      const auto& pts = c.points();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) CHECK(pts[i] != pts[j]);
        const auto neg = -pts[i];
        CHECK(std::any_of(pts.begin(), pts.end(), [&](auto q) { return std::abs(q - neg) < 1e-14; }));
      }
    }
    CHECK(build_constellation(ConstellationLabel::qam256).order() == 256);
  }

  TEST_CASE("label parsing") {
    CHECK(parse_constellation("QAM64") == ConstellationLabel::qam64);
    CHECK(parse_constellation("bpsk") == ConstellationLabel::bpsk);
    CHECK_THROWS_AS(parse_constellation("qam32"), InvalidInput);
    CHECK_THROWS_AS(parse_scenario("cda"), InvalidInput);
    CHECK(parse_mode("off-line") == EstimationMode::offline);
    CHECK(parse_bound_kind("HCRB") == BoundKind::hcrb);
  }

  TEST_CASE("noise variance") {
    PhaseModel pm;
    pm.snr_db = 0.0;
    CHECK(noise_variance(pm) == 1.0);
    pm.snr_db = 10.0;
    CHECK(noise_variance(pm) == doctest::Approx(0.1).epsilon(1e-15));
    pm.snr_db = 2.0;
    CHECK(noise_variance(pm) == doctest::Approx(0.63095734448019325).epsilon(1e-14));  // 10^-0.2
    double prev = HUGE_VAL;
    for (double snr = -20.0; snr <= 60.0; snr += 0.37) {
      const double v = noise_variance_from_snr_db(snr);
      CHECK(v > 0.0);
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("phase model validation") {
    PhaseModel pm;
    CHECK_NOTHROW(pm.validate());
    pm.sigma_w2 = 0.0;
    CHECK_THROWS_AS(pm.validate(), InvalidInput);
    pm.sigma_w2 = 0.005;
    pm.block_len = 0;
    CHECK_THROWS_AS(pm.validate(), InvalidInput);
  }
}
