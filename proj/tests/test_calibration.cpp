#include "qdm/calibration.hpp"
#include "qdm/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace qdm;
using qdm::test::rel_err;

namespace {

// Root of 2x = e^x - 1 by bisection; maximizer of (1 - e^-x) / sqrt(x).
double x_star() {
  double lo = 0.5, hi = 3.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (2 * mid - std::expm1(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CalibrationTrace exponential_trace(double tau, double step, double t_max, double c0 = 0.03, double flux = 1.0) {
  CalibrationTrace t;
  t.intensity = Intensity(1);
  for (double s = 0; s <= t_max + 1e-12; s += step) {
    const double c = c0 * std::exp(-s / tau);
    t.samples.push_back({s, flux * (1 - c), flux});
  }
  return t;
}

std::vector<CurvePoint> curve_points(const LogQuadraticCurve& c, std::initializer_list<double> intensities) {
  std::vector<CurvePoint> pts;
  for (double i : intensities) pts.push_back({Intensity(i), c(i)});
  return pts;
}

}  // namespace

TEST_CASE("contrast definition") {
  CHECK(contrast(0.9, 1.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(contrast(1.0, 1.0) == 0.0);
  CHECK(contrast(0.97, 1.0) == doctest::Approx(0.03).epsilon(1e-14));
  CHECK_THROWS_AS(contrast(1.0, 0.0), DomainError);
}

TEST_CASE("x* oracle") { CHECK(std::abs(x_star() - 1.2564312086261697) < 1e-14); }

TEST_CASE("init time from exponential traces") {
  for (double tau : {3.0, 10.0}) {
    const double step = 0.01;
    const auto t = exponential_trace(tau, step, 8 * tau);
    CHECK(std::abs(extract_init_time(t) - 3 * tau) <= step);
  }
}

TEST_CASE("readout time from exponential traces") {
  for (double tau : {3.0, 10.0}) {
    const double step = 0.005;
    const auto t = exponential_trace(tau, step, 8 * tau);
    const auto r = extract_readout_time(t);
    CHECK(r.interior_maximum);
    CHECK(rel_err(r.t_ro, x_star() * tau) < 0.01);
    CHECK(std::abs(r.t_ro - x_star() * tau) <= step);
  }
}

TEST_CASE("readout extraction is flux-scale invariant") {
  const auto a = extract_readout_time(exponential_trace(4, 0.01, 30, 0.03, 1.0));
  const auto b = extract_readout_time(exponential_trace(4, 0.01, 30, 0.03, 37.5));
  CHECK(a.t_ro == b.t_ro);
}

TEST_CASE("constant contrast") {
  CalibrationTrace t;
  t.intensity = Intensity(1);
  for (int k = 0; k <= 50; ++k) t.samples.push_back({0.1 * k, 0.97, 1.0});
  CHECK_THROWS_AS(extract_init_time(t), ExtractionError);
  const auto r = extract_readout_time(t);
  CHECK_FALSE(r.interior_maximum);
  CHECK(r.t_ro == doctest::Approx(5.0));
}

TEST_CASE("trace validation") {
  auto t = exponential_trace(3, 0.1, 5);
  t.samples[3].t_sweep = t.samples[2].t_sweep;
  CHECK_THROWS_AS(t.validate(), DomainError);
  t = exponential_trace(3, 0.1, 5);
  t.samples.front().t_sweep = -0.1;
  CHECK_THROWS_AS(extract_init_time(t), DomainError);
  CalibrationTrace tiny;
  tiny.intensity = Intensity(1);
  tiny.samples = {{0, 0.97, 1}, {1, 0.99, 1}};
  CHECK_THROWS_AS(extract_init_time(tiny), DomainError);
}

TEST_CASE("extract_times collects both and warns") {
  const auto e = extract_times(exponential_trace(3, 0.01, 30));
  CHECK(std::abs(e.t_init - 9) <= 0.01);
  CHECK(rel_err(e.t_ro, x_star() * 3) < 0.01);
  CHECK(e.peak_contrast == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("trace CSV round-trip") {
  const auto t = exponential_trace(3, 0.37, 12);
  std::stringstream s;
  write_trace_csv(t, s);
  CHECK(s.str().rfind("t_sweep_us,sig_pl,ref_pl\n", 0) == 0);
  const auto back = read_trace_csv(s, t.intensity);
  REQUIRE(back.samples.size() == t.samples.size());
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    CHECK(back.samples[k].t_sweep == t.samples[k].t_sweep);
    CHECK(back.samples[k].sig_pl == t.samples[k].sig_pl);
    CHECK(back.samples[k].ref_pl == t.samples[k].ref_pl);
  }
  std::istringstream bad("time,sig,ref\n0,1,1\n");
  CHECK_THROWS(read_trace_csv(bad, t.intensity));
}

TEST_CASE("log-quadratic fit") {
  const LogQuadraticCurve gen{1.0, -0.8, 0.05};
  const auto pts = curve_points(gen, {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10});
  const auto fit = fit_log_quadratic(pts);
  CHECK(std::abs(fit.a - 1.0) < 1e-9);
  CHECK(std::abs(fit.b + 0.8) < 1e-9);
  CHECK(std::abs(fit.c - 0.05) < 1e-9);
  CHECK(log_residual_rms(fit, pts) < 1e-9);

  const auto three = curve_points({0.3, 0.2, -0.1}, {0.1, 1, 3});
  CHECK(log_residual_rms(fit_log_quadratic(three), three) < 1e-12);

  const auto two = curve_points(gen, {0.1, 1, 1, 0.1});
  CHECK_THROWS_AS(fit_log_quadratic(two), UnderdeterminedError);

  std::vector<CurvePoint> zero = curve_points(gen, {0.1, 1, 3});
  zero[1].duration = 0;
  CHECK_THROWS_AS(fit_log_quadratic(zero), DomainError);
  zero = curve_points(gen, {0.1, 1, 3});
  zero[0].intensity = Intensity(0);
  CHECK_THROWS_AS(fit_log_quadratic(zero), DomainError);
}

TEST_CASE("extraction report is key = value") {
  const auto t = exponential_trace(3, 0.01, 30);
  const auto report = format_extraction_report(t, extract_times(t), ReadoutCriterion::WindowAverage);
  CHECK(report.find("t_init_us = ") != std::string::npos);
  CHECK(report.find("t_ro_us = ") != std::string::npos);
}
