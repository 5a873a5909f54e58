#include "qdm/photophysics.hpp"

#include "qdm/error.hpp"
#include "qdm/text.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qdm {

namespace {

void require_in_window(const PhotophysicsModel& model, Intensity i, const char* what) {
  if (!(i.value() > 0.0)) {
    throw DomainError(std::string(what) + ": intensity must be > 0");
  }
  if (!model.validity.contains(i.value())) {
    throw OutOfRangeError(std::string(what) + ": intensity " + text::format_double(i.value()) +
                          " mW/um^2 outside calibrated window [" +
                          text::format_double(model.validity.lo) + ", " +
                          text::format_double(model.validity.hi) + "]");
  }
}

// Minimum of q(x) = a + b x + c x^2 over [lo, hi].
double quadratic_min(double a, double b, double c, double lo, double hi) {
  auto q = [&](double x) { return a + b * x + c * x * x; };
  double m = std::min(q(lo), q(hi));
  if (c > 0.0) {
    const double vertex = -b / (2.0 * c);
    if (vertex > lo && vertex < hi) m = std::min(m, q(vertex));
  }
  return m;
}

}  // namespace

Intensity::Intensity(double mw_per_um2) : value_(mw_per_um2) {
  if (!std::isfinite(mw_per_um2) || mw_per_um2 < 0.0) {
    throw DomainError("intensity must be finite and >= 0, got " + text::format_double(mw_per_um2));
  }
}

double LogQuadraticCurve::log10_duration(double intensity) const {
  const double x = std::log10(intensity);
  return a + b * x + c * x * x;
}

double LogQuadraticCurve::operator()(double intensity) const {
  return std::pow(10.0, log10_duration(intensity));
}

void PhotophysicsModel::validate() const {
  if (!(i_sat.value() > 0.0)) throw DomainError("i_sat must be > 0");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw DomainError("r_max must be finite and > 0");
  if (!(c0 > 0.0 && c0 < 1.0)) throw DomainError("c0 must lie in (0, 1)");
  if (!(validity.lo > 0.0 && validity.hi > validity.lo && std::isfinite(validity.hi))) {
    throw DomainError("validity window must satisfy 0 < lo < hi");
  }
  for (const auto* curve : {&init_curve, &readout_curve}) {
    if (!std::isfinite(curve->a) || !std::isfinite(curve->b) || !std::isfinite(curve->c)) {
      throw DomainError("curve coefficients must be finite");
    }
  }
  // Initialization is the slower process at and below saturation.
  const double upper = std::min(validity.hi, i_sat.value());
  if (upper >= validity.lo) {
    const double lo = std::log10(validity.lo);
    const double hi = std::log10(upper);
    const double gap = quadratic_min(init_curve.a - readout_curve.a, init_curve.b - readout_curve.b,
                                     init_curve.c - readout_curve.c, lo, hi);
    if (gap < -1e-12) {
      throw DomainError("init_curve must not fall below readout_curve at or below i_sat");
    }
  }
}

PhotophysicsModel PhotophysicsModel::synthetic_default() {
  PhotophysicsModel m;
  m.init_curve = {0.7, -0.9, 0.1};
  m.readout_curve = {0.7, -0.3, 0.0};
  m.i_sat = Intensity(1.0);
  m.r_max = 30.0;
  m.c0 = 0.03;
  m.validity = {1e-3, 10.0};
  return m;
}

Intensity lightsheet_intensity(double p_ls_mw, double l_y_um, double d_ls_um) {
  if (!(l_y_um > 0.0) || !(d_ls_um > 0.0)) {
    throw DomainError("light-sheet dimensions must be > 0");
  }
  if (!(p_ls_mw >= 0.0)) throw DomainError("light-sheet power must be >= 0");
  return Intensity(p_ls_mw / (l_y_um * d_ls_um));
}

Intensity confocal_intensity(double p_conf_mw, double delta_conf_um) {
  if (!(delta_conf_um > 0.0)) throw DomainError("confocal beam diameter must be > 0");
  if (!(p_conf_mw >= 0.0)) throw DomainError("confocal power must be >= 0");
  return Intensity(p_conf_mw / (delta_conf_um * delta_conf_um));
}

double init_time(const PhotophysicsModel& model, Intensity i) {
  require_in_window(model, i, "init_time");
  return model.init_curve(i.value());
}

double readout_time(const PhotophysicsModel& model, Intensity i) {
  require_in_window(model, i, "readout_time");
  return model.readout_curve(i.value());
}

double photon_flux(const PhotophysicsModel& model, Intensity i) {
  const double v = i.value();
  return model.r_max * v / (v + model.i_sat.value());
}

double contrast_at_delay(const PhotophysicsModel& model, Intensity i, double t_sweep_us) {
  if (!(t_sweep_us >= 0.0)) throw DomainError("t_sweep must be >= 0");
  const double t_init = init_time(model, i);
  return model.c0 * std::exp(-3.0 * t_sweep_us / t_init);
}

}  // namespace qdm
