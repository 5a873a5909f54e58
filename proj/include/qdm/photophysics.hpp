#pragma once

// Intensity-dependent NV timescales, photon flux and spin contrast.
//
// Canonical units throughout the library: us, um, mW, mW/um^2, MHz,
// counts/us.

#include <compare>

namespace qdm {

/// Laser intensity in mW/um^2. Non-negative and finite.
class Intensity {
 public:
  constexpr Intensity() = default;
  explicit Intensity(double mw_per_um2);

  constexpr double value() const noexcept { return value_; }
  auto operator<=>(const Intensity&) const = default;

 private:
  double value_ = 0.0;
};

/// Closed intensity window over which the fitted curves are trusted.
struct IntensityRange {
  double lo = 1e-3;
  double hi = 10.0;

  bool contains(double i) const noexcept { return i >= lo && i <= hi; }
  bool operator==(const IntensityRange&) const = default;
};

/// log10(t / us) = a + b*log10(I) + c*(log10 I)^2, I in mW/um^2.
struct LogQuadraticCurve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double log10_duration(double intensity) const;
  /// Duration in us. No range checking; see init_time/readout_time.
  double operator()(double intensity) const;

  bool operator==(const LogQuadraticCurve&) const = default;
};

struct PhotophysicsModel {
  LogQuadraticCurve init_curve;     // t_init(I), used for both confocal and light-sheet beams
  LogQuadraticCurve readout_curve;  // t_RO(I)
  Intensity i_sat;                  // saturation intensity
  double r_max = 0.0;               // counts/us at the saturation asymptote
  double c0 = 0.0;                  // peak spin contrast
  IntensityRange validity;

  /// Throws DomainError when an invariant is broken: i_sat > 0, r_max > 0,
  /// 0 < c0 < 1, a non-empty positive validity window, and init_curve >=
  /// readout_curve over the part of the window at or below i_sat.
  void validate() const;

  /// Synthetic stand-in coefficients: init (0.7, -0.9, 0.1), readout
  /// (0.7, -0.3, 0), i_sat = 1 mW/um^2, r_max = 30 counts/us, c0 = 0.03.
  /// They reproduce the qualitative anchors only (t_RO ~ t_init near
  /// saturation, t_RO << t_init well below it, 1-100 us timescales); they are
  /// not measured values.
  static PhotophysicsModel synthetic_default();

  bool operator==(const PhotophysicsModel&) const = default;
};

/// I_LS = P_LS / (L_y * d_LS).
Intensity lightsheet_intensity(double p_ls_mw, double l_y_um, double d_ls_um);

/// I_conf = P_conf / delta_conf^2 (square of the focal diameter, not the
/// Gaussian beam area).
Intensity confocal_intensity(double p_conf_mw, double delta_conf_um);

/// Spin initialization time (us). Throws DomainError for i <= 0 and
/// OutOfRangeError outside the model's validity window.
double init_time(const PhotophysicsModel& model, Intensity i);

/// Spin readout time (us); same checks as init_time.
double readout_time(const PhotophysicsModel& model, Intensity i);

/// Detected PL rate r_max * I / (I + I_sat), counts/us.
double photon_flux(const PhotophysicsModel& model, Intensity i);

/// c0 * exp(-t_sweep / tau_p) with tau_p = init_time(i) / 3, so the contrast
/// has decayed to c0/e^3 exactly at t_sweep = init_time(i).
double contrast_at_delay(const PhotophysicsModel& model, Intensity i, double t_sweep_us);

}  // namespace qdm
