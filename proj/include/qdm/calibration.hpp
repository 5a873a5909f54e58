#pragma once

// Contrast-vs-delay analysis: spin readout and initialization times from a
// swept-delay trace, and log-quadratic fits of those times against intensity.

#include "qdm/photophysics.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qdm {

struct TraceSample {
  double t_sweep = 0.0;  // us
  double sig_pl = 0.0;   // counts/us, after the MW pi pulse
  double ref_pl = 0.0;   // counts/us, no MW pulse
};

struct CalibrationTrace {
  Intensity intensity;
  std::vector<TraceSample> samples;

  /// t_sweep finite, >= 0 and strictly increasing; ref_pl > 0. Throws
  /// DomainError naming the offending sample.
  void validate() const;
  std::vector<double> contrasts() const;
};

/// (ref - sig) / ref.
double contrast(double sig_pl, double ref_pl);

/// First delay at which the contrast has fallen to peak * e^-3, linearly
/// interpolated between the bracketing samples. Throws ExtractionError when
/// the trace never decays that far, DomainError for fewer than 3 samples.
double extract_init_time(const CalibrationTrace& trace);

enum class ReadoutCriterion {
  /// Window-averaged contrast over [0, t] times sqrt(cumulative reference
  /// counts); both integrals by the trapezoid rule.
  WindowAverage,
  /// Contrast at t times sqrt(cumulative reference counts).
  Instantaneous,
};

struct ReadoutExtraction {
  double t_ro = 0.0;
  double objective = 0.0;
  /// False when the objective peaks at the last sample (trace too short or
  /// no decay), in which case t_ro is only a lower bound.
  bool interior_maximum = false;
};

/// Sample delay maximizing the readout objective; ties go to the smaller
/// delay.
ReadoutExtraction extract_readout_time(const CalibrationTrace& trace,
                                       ReadoutCriterion criterion = ReadoutCriterion::WindowAverage);

struct ExtractedTimes {
  double t_ro = 0.0;
  double t_init = 0.0;
  double peak_contrast = 0.0;
  std::vector<std::string> warnings;
};

ExtractedTimes extract_times(const CalibrationTrace& trace,
                             ReadoutCriterion criterion = ReadoutCriterion::WindowAverage);

struct CurvePoint {
  Intensity intensity;
  double duration = 0.0;  // us
};

/// Ordinary least squares of log10(t) on {1, log10 I, (log10 I)^2}.
/// UnderdeterminedError with fewer than 3 distinct intensities; DomainError
/// for non-positive input.
LogQuadraticCurve fit_log_quadratic(std::span<const CurvePoint> points);

/// RMS of log10 residuals of `curve` over `points`.
double log_residual_rms(const LogQuadraticCurve& curve, std::span<const CurvePoint> points);

/// Trace CSV with header `t_sweep_us,sig_pl,ref_pl`.
CalibrationTrace read_trace_csv(std::istream& in, Intensity intensity);
void write_trace_csv(const CalibrationTrace& trace, std::ostream& out);

std::string format_extraction_report(const CalibrationTrace& trace, const ExtractedTimes& times,
                                     ReadoutCriterion criterion);

}  // namespace qdm
