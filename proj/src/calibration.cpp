#include "qdm/calibration.hpp"

#include "qdm/error.hpp"
#include "qdm/text.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace qdm {

namespace {

void require_samples(const CalibrationTrace& trace) {
  trace.validate();
  if (trace.samples.size() < 3) throw DomainError("calibration trace needs at least 3 samples");
}

}  // namespace

void CalibrationTrace::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string where = "trace sample " + std::to_string(i);
    if (!std::isfinite(s.t_sweep) || s.t_sweep < 0.0) throw DomainError(where + ": t_sweep must be >= 0");
    if (i > 0 && !(s.t_sweep > samples[i - 1].t_sweep)) {
      throw DomainError(where + ": t_sweep must be strictly increasing");
    }
    if (!std::isfinite(s.ref_pl) || !(s.ref_pl > 0.0)) throw DomainError(where + ": ref_pl must be > 0");
    if (!std::isfinite(s.sig_pl)) throw DomainError(where + ": sig_pl must be finite");
  }
}

std::vector<double> CalibrationTrace::contrasts() const {
  std::vector<double> c(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) c[i] = contrast(samples[i].sig_pl, samples[i].ref_pl);
  return c;
}

double contrast(double sig_pl, double ref_pl) {
  if (!(ref_pl > 0.0)) throw DomainError("reference PL must be > 0");
  return (ref_pl - sig_pl) / ref_pl;
}

double extract_init_time(const CalibrationTrace& trace) {
  require_samples(trace);
  const auto c = trace.contrasts();
  const auto peak_it = std::max_element(c.begin(), c.end());
  if (!(*peak_it > 0.0)) throw ExtractionError("contrast has no positive peak");
  const double threshold = *peak_it * std::exp(-3.0);
  for (auto i = static_cast<std::size_t>(peak_it - c.begin()) + 1; i < c.size(); ++i) {
    if (c[i] <= threshold) {
      const auto& a = trace.samples[i - 1];
      const auto& b = trace.samples[i];
      const double frac = (c[i - 1] - threshold) / (c[i - 1] - c[i]);
      return a.t_sweep + frac * (b.t_sweep - a.t_sweep);
    }
  }
  throw ExtractionError("contrast never decays to peak/e^3 within the trace; extend the delay sweep");
}

ReadoutExtraction extract_readout_time(const CalibrationTrace& trace, ReadoutCriterion criterion) {
  require_samples(trace);
  const auto c = trace.contrasts();
  const auto& s = trace.samples;

  ReadoutExtraction best{s.front().t_sweep, 0.0, false};
  std::size_t best_index = 0;
  double contrast_area = 0.0;
  double counts = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double dt = s[k].t_sweep - s[k - 1].t_sweep;
    contrast_area += 0.5 * (c[k] + c[k - 1]) * dt;
    counts += 0.5 * (s[k].ref_pl + s[k - 1].ref_pl) * dt;
    const double window = s[k].t_sweep - s.front().t_sweep;
    const double mean_contrast = criterion == ReadoutCriterion::WindowAverage ? contrast_area / window : c[k];
    const double objective = mean_contrast * std::sqrt(counts);
    if (objective > best.objective) {
      best.objective = objective;
      best.t_ro = s[k].t_sweep;
      best_index = k;
    }
  }
  best.interior_maximum = best_index > 0 && best_index + 1 < s.size();
  return best;
}

ExtractedTimes extract_times(const CalibrationTrace& trace, ReadoutCriterion criterion) {
  ExtractedTimes out;
  const auto ro = extract_readout_time(trace, criterion);
  out.t_ro = ro.t_ro;
  out.t_init = extract_init_time(trace);
  const auto c = trace.contrasts();
  out.peak_contrast = *std::max_element(c.begin(), c.end());
  if (!ro.interior_maximum) {
    out.warnings.push_back("readout objective has no interior maximum; t_ro is a bound");
  }
  if (out.t_init < out.t_ro) out.warnings.push_back("t_init < t_ro");
  return out;
}

LogQuadraticCurve fit_log_quadratic(std::span<const CurvePoint> points) {
  std::vector<double> xs;
  xs.reserve(points.size());
  for (const auto& p : points) {
    if (!(p.intensity.value() > 0.0)) throw DomainError("fit intensities must be > 0");
    if (!(p.duration > 0.0) || !std::isfinite(p.duration)) throw DomainError("fit durations must be > 0");
    xs.push_back(p.intensity.value());
  }
  std::sort(xs.begin(), xs.end());
  const auto distinct = std::unique(xs.begin(), xs.end()) - xs.begin();
  if (distinct < 3) {
    throw UnderdeterminedError("log-quadratic fit needs at least 3 distinct intensities, got " +
                               std::to_string(distinct));
  }

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& p = points[static_cast<std::size_t>(r)];
    const double x = std::log10(p.intensity.value());
    design(r, 0) = 1.0;
    design(r, 1) = x;
    design(r, 2) = x * x;
    y(r) = std::log10(p.duration);
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);
  return {coef(0), coef(1), coef(2)};
}

double log_residual_rms(const LogQuadraticCurve& curve, std::span<const CurvePoint> points) {
  if (points.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : points) {
    const double r = curve.log10_duration(p.intensity.value()) - std::log10(p.duration);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(points.size()));
}

CalibrationTrace read_trace_csv(std::istream& in, Intensity intensity) {
  CalibrationTrace trace{intensity, {}};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = text::trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!header) {
      if (view != "t_sweep_us,sig_pl,ref_pl") {
        throw DomainError("trace line " + std::to_string(line_no) +
                          ": expected header 't_sweep_us,sig_pl,ref_pl'");
      }
      header = true;
      continue;
    }
    const auto fields = text::split(view, ',');
    if (fields.size() != 3) {
      throw DomainError("trace line " + std::to_string(line_no) + ": expected 3 fields");
    }
    try {
      trace.samples.push_back({text::parse_double(fields[0]), text::parse_double(fields[1]),
                               text::parse_double(fields[2])});
    } catch (const DomainError& e) {
      throw DomainError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header) throw DomainError("trace has no header");
  trace.validate();
  return trace;
}

void write_trace_csv(const CalibrationTrace& trace, std::ostream& out) {
  out << "t_sweep_us,sig_pl,ref_pl\n";
  for (const auto& s : trace.samples) {
    out << text::format_double(s.t_sweep) << ',' << text::format_double(s.sig_pl) << ','
        << text::format_double(s.ref_pl) << '\n';
  }
}

std::string format_extraction_report(const CalibrationTrace& trace, const ExtractedTimes& times,
                                     ReadoutCriterion criterion) {
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("intensity_mw_per_um2", text::format_double(trace.intensity.value()));
  kv("samples", std::to_string(trace.samples.size()));
  kv("criterion", criterion == ReadoutCriterion::WindowAverage ? "window-average" : "instantaneous");
  kv("peak_contrast", text::format_double(times.peak_contrast));
  kv("t_ro_us", text::format_double(times.t_ro));
  kv("t_init_us", text::format_double(times.t_init));
  for (std::size_t i = 0; i < times.warnings.size(); ++i) {
    kv("warning_" + std::to_string(i), times.warnings[i]);
  }
  return out;
}

}  // namespace qdm
