#include "qdm/error.hpp"
#include "qdm/photophysics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace qdm;
using qdm::test::rel_err;

namespace {

PhotophysicsModel model_with(LogQuadraticCurve init, LogQuadraticCurve ro) {
  auto m = PhotophysicsModel::synthetic_default();
  m.init_curve = init;
  m.readout_curve = ro;
  return m;
}

}  // namespace

TEST_CASE("intensity rejects negative and non-finite values") {
  CHECK_THROWS_AS(Intensity(-1e-9), DomainError);
  CHECK_THROWS_AS(Intensity(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(Intensity(std::numeric_limits<double>::infinity()), DomainError);
  CHECK(Intensity(0.0).value() == 0.0);
}

TEST_CASE("light-sheet intensity is power over sheet cross-section") {
  CHECK(lightsheet_intensity(2000, 100, 10).value() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lightsheet_intensity(0, 100, 10).value() == 0.0);
  CHECK(lightsheet_intensity(2, 100, 10).value() == doctest::Approx(0.002).epsilon(1e-15));
  CHECK(lightsheet_intensity(200, 100, 10).value() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(lightsheet_intensity(1, 0, 10), DomainError);
  CHECK_THROWS_AS(lightsheet_intensity(1, 100, -1), DomainError);
}

TEST_CASE("confocal intensity is power over the squared focus diameter") {
  CHECK(rel_err(confocal_intensity(2, 0.53).value(), 7.11997152011392) < 1e-14);
  CHECK(confocal_intensity(1, 1).value() == 1.0);
  CHECK(rel_err(confocal_intensity(0.002, 0.53).value(), 0.00711997152011392) < 1e-14);
  CHECK_THROWS_AS(confocal_intensity(1, 0), DomainError);
}

TEST_CASE("default timescale curves") {
  const auto m = PhotophysicsModel::synthetic_default();
  CHECK(rel_err(init_time(m, Intensity(1)), 5.011872336272723) < 1e-14);
  CHECK(rel_err(init_time(m, Intensity(0.01)), 794.3282347242815) < 1e-13);
  CHECK(rel_err(readout_time(m, Intensity(1)), 5.011872336272723) < 1e-14);
  CHECK(rel_err(readout_time(m, Intensity(0.1)), 10.0) < 1e-14);
}

TEST_CASE("constant curves give constant timescales") {
  const auto m = model_with({1, 0, 0}, {0, 0, 0});
  for (double i : {0.001, 0.05, 1.0, 7.0}) {
    CHECK(init_time(m, Intensity(i)) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(readout_time(m, Intensity(i)) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("timescales reject zero and out-of-window intensity") {
  const auto m = PhotophysicsModel::synthetic_default();
  CHECK_THROWS_AS(init_time(m, Intensity(0)), DomainError);
  CHECK_THROWS_AS(readout_time(m, Intensity(0)), DomainError);
  CHECK_THROWS_AS(init_time(m, Intensity(1e-4)), OutOfRangeError);
  CHECK_THROWS_AS(readout_time(m, Intensity(20)), OutOfRangeError);
  CHECK_NOTHROW(init_time(m, Intensity(m.validity.lo)));
  CHECK_NOTHROW(init_time(m, Intensity(m.validity.hi)));
}

TEST_CASE("photon flux saturates") {
  const auto m = PhotophysicsModel::synthetic_default();
  CHECK(photon_flux(m, m.i_sat) == doctest::Approx(m.r_max / 2).epsilon(1e-15));
  CHECK(photon_flux(m, Intensity(0)) == 0.0);
  CHECK(photon_flux(m, Intensity(3 * m.i_sat.value())) == doctest::Approx(0.75 * m.r_max).epsilon(1e-15));
}

TEST_CASE("contrast at delay") {
  const auto m = PhotophysicsModel::synthetic_default();
  const Intensity i(0.3);
  CHECK(contrast_at_delay(m, i, 0) == m.c0);
  CHECK(rel_err(contrast_at_delay(m, i, init_time(m, i)), m.c0 * std::exp(-3.0)) < 1e-12);
  // tau_p = 3 us means t_init = 9 us; find that intensity on a constant curve.
  const auto flat = model_with({std::log10(9.0), 0, 0}, {0, 0, 0});
  CHECK(rel_err(contrast_at_delay(flat, Intensity(1), 3.0), 0.011036383235143270) < 1e-14);
  CHECK_THROWS_AS(contrast_at_delay(m, i, -1), DomainError);
}

TEST_CASE("model validation") {
  CHECK_NOTHROW(PhotophysicsModel::synthetic_default().validate());
  auto m = PhotophysicsModel::synthetic_default();
  m.c0 = 0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = PhotophysicsModel::synthetic_default();
  m.c0 = 1;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = PhotophysicsModel::synthetic_default();
  m.r_max = 0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = PhotophysicsModel::synthetic_default();
  m.validity = {1, 0.5};
  CHECK_THROWS_AS(m.validate(), DomainError);
  // Readout longer than init below saturation is rejected.
  CHECK_THROWS_AS(model_with({0, 0, 0}, {1, 0, 0}).validate(), DomainError);
}

TEST_CASE("property: timescales positive and finite over the window") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const auto m = model_with({coef(rng), coef(rng), coef(rng)}, {coef(rng), coef(rng), coef(rng)});
    const double i = qdm::test::log_uniform(rng, m.validity.lo, m.validity.hi);
    const double ti = init_time(m, Intensity(i));
    const double tr = readout_time(m, Intensity(i));
    REQUIRE(std::isfinite(ti));
    REQUIRE(ti > 0);
    REQUIRE(std::isfinite(tr));
    REQUIRE(tr > 0);
  }
}

TEST_CASE("property: init/readout ratio non-increasing on [0.01, 1]") {
  const auto m = PhotophysicsModel::synthetic_default();
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 400; ++k) {
    const double i = std::pow(10.0, -2.0 + 2.0 * k / 400.0);
    const double ratio = init_time(m, Intensity(i)) / readout_time(m, Intensity(i));
    REQUIRE(ratio <= prev * (1 + 1e-12));
    prev = ratio;
  }
}

TEST_CASE("property: flux monotone and bounded") {
  const auto m = PhotophysicsModel::synthetic_default();
  double prev = 0;
  for (int k = 0; k <= 1000; ++k) {
    const double f = photon_flux(m, Intensity(k * 0.05));
    REQUIRE(f >= prev);
    REQUIRE(f <= m.r_max);
    prev = f;
  }
}

TEST_CASE("property: contrast depends only on t / tau_p") {
  std::mt19937_64 rng(11);
  const auto m = PhotophysicsModel::synthetic_default();
  for (int k = 0; k < 500; ++k) {
    const double i1 = qdm::test::log_uniform(rng, 0.01, 5);
    const double i2 = qdm::test::log_uniform(rng, 0.01, 5);
    const double x = qdm::test::log_uniform(rng, 0.01, 5);
    const double c1 = contrast_at_delay(m, Intensity(i1), x * init_time(m, Intensity(i1)));
    const double c2 = contrast_at_delay(m, Intensity(i2), x * init_time(m, Intensity(i2)));
    REQUIRE(rel_err(c1, c2) < 1e-12);
  }
}
