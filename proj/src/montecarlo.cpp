#include "qdm/montecarlo.hpp"

#include "qdm/error.hpp"
#include "qdm/rng.hpp"
#include "qdm/text.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace qdm {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;  // central, divided by n
  double m4 = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  CompensatedSum s;
  for (double x : v) s.add(x);
  const auto n = static_cast<double>(v.size());
  m.mean = s.value() / n;
  CompensatedSum s2;
  CompensatedSum s4;
  for (double x : v) {
    const double d = x - m.mean;
    s2.add(d * d);
    s4.add(d * d * d * d);
  }
  m.m2 = s2.value() / n;
  m.m4 = s4.value() / n;
  return m;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  const std::size_t n = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (n == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + n - 1) / n;
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace

void SimConfig::validate() const {
  params.validate();
  model.validate();
  if (n_trials < 1) throw DomainError("n_trials must be >= 1");
  if (!(i_conf.value() > 0.0)) throw DomainError("i_conf must be > 0");
  if (!model.validity.contains(i_conf.value())) {
    throw OutOfRangeError("i_conf outside the model validity window");
  }
}

SimOutcome simulate_protocol(const SimConfig& cfg, Protocol protocol, unsigned workers, bool keep_trials) {
  cfg.validate();
  if (protocol == Protocol::Calibration) throw DomainError("use simulate_calibration for calibration traces");

  const PulseSequence seq = build_cycle(cfg.params, protocol);
  const std::vector<double> delays = readout_delays(seq);
  const std::size_t n_readouts = delays.size();

  const double c0 = cfg.model.c0;
  const double mu = photon_flux(cfg.model, cfg.i_conf) * cfg.params.t_ro_conf;
  if (!(mu > 0.0)) throw DomainError("zero photon budget per readout");

  std::vector<double> signal(n_readouts);
  std::vector<double> weight(n_readouts);
  double weight_sum = 0.0;
  double weighted_signal = 0.0;
  for (std::size_t k = 0; k < n_readouts; ++k) {
    signal[k] = cfg.null_signal ? 0.0 : std::exp(-delays[k] / cfg.params.t1);
    weight[k] = c0 * c0 * mu / (2.0 - c0 * signal[k]);
    weight_sum += weight[k];
    weighted_signal += weight[k] * signal[k];
  }
  const double model_sd = std::sqrt(1.0 / weight_sum);
  const double snr_single = c0 * std::sqrt(mu) / std::sqrt(2.0 - c0);
  const double scale = std::sqrt(seq.span()) * snr_single;

  SimOutcome out;
  out.readouts_per_cycle = n_readouts;
  out.cycle_time = seq.span();

  std::vector<double> trials;
  if (cfg.noiseless) {
    trials.assign(1, weighted_signal / weight_sum);
  } else {
    const rng::PoissonSampler reference(mu);
    std::vector<rng::PoissonSampler> signal_samplers;
    signal_samplers.reserve(n_readouts);
    for (double s : signal) signal_samplers.emplace_back(mu * (1.0 - c0 * s));
    const double to_signal = 1.0 / (c0 * mu);

    trials.resize(cfg.n_trials);
    parallel_for(cfg.n_trials, workers, [&](std::size_t t) {
      rng::Generator gen(rng::derive_seed(cfg.master_seed, t));
      double acc = 0.0;
      for (std::size_t k = 0; k < n_readouts; ++k) {
        const auto r = reference(gen);
        const auto s = signal_samplers[k](gen);
        acc += weight[k] * static_cast<double>(r - s) * to_signal;
      }
      trials[t] = acc / weight_sum;
    });
  }

  const Moments m = moments(trials);
  const auto n = static_cast<double>(trials.size());
  out.signal_mean = m.mean;

  double spread = model_sd;
  if (!cfg.noiseless && trials.size() >= 2) {
    spread = std::sqrt(m.m2 * n / (n - 1.0));
    out.stderr_available = true;
  }
  out.signal_stderr = cfg.noiseless ? 0.0 : spread / std::sqrt(n);

  const double nan = std::nan("");
  if (cfg.null_signal) {
    out.eta_empirical = nan;
    out.eta_stderr = nan;
    out.stderr_available = false;
  } else {
    out.eta_empirical = scale * spread / m.mean;
    if (cfg.noiseless) {
      out.eta_stderr = 0.0;
      out.stderr_available = true;
    } else if (out.stderr_available) {
      // Delta method: relative variance of the sample spread plus that of
      // the sample mean.
      const double kurt = m.m4 / (m.m2 * m.m2);
      const double rel_var = (kurt - 1.0) / (4.0 * n) + m.m2 / (n * m.mean * m.mean);
      out.eta_stderr = out.eta_empirical * std::sqrt(rel_var);
    } else {
      out.eta_stderr = nan;
    }
  }

  if (keep_trials) {
    out.trial_eta.reserve(trials.size());
    for (double x : trials) out.trial_eta.push_back(scale * model_sd / x);
  }
  return out;
}

CalibrationTrace simulate_calibration(const PhotophysicsModel& model, Intensity i,
                                      std::span<const double> sweep_grid, std::size_t shots,
                                      std::uint64_t seed, bool noiseless) {
  model.validate();
  if (!noiseless && shots == 0) throw DomainError("shots must be >= 1");
  for (std::size_t j = 0; j < sweep_grid.size(); ++j) {
    if (!std::isfinite(sweep_grid[j]) || sweep_grid[j] < 0.0 || (j > 0 && !(sweep_grid[j] > sweep_grid[j - 1]))) {
      throw DomainError("sweep grid must be non-negative and strictly increasing");
    }
  }
  const double flux = photon_flux(model, i);
  if (!(flux > 0.0)) throw DomainError("zero photon flux");

  CalibrationTrace trace{i, {}};
  trace.samples.reserve(sweep_grid.size());
  for (std::size_t j = 0; j < sweep_grid.size(); ++j) {
    const double t = sweep_grid[j];
    const double sig_rate = flux * (1.0 - contrast_at_delay(model, i, t));
    if (noiseless) {
      trace.samples.push_back({t, sig_rate, flux});
      continue;
    }
    rng::Generator gen(rng::derive_seed(seed, j));
    const rng::PoissonSampler sig(sig_rate);
    const rng::PoissonSampler ref(flux);
    std::int64_t sig_total = 0;
    std::int64_t ref_total = 0;
    for (std::size_t shot = 0; shot < shots; ++shot) {
      sig_total += sig(gen);
      ref_total += ref(gen);
    }
    const auto n = static_cast<double>(shots);
    // A zero reference count would make contrast undefined; floor it at one
    // count, far outside any usable photon budget.
    trace.samples.push_back({t, static_cast<double>(sig_total) / n,
                             static_cast<double>(std::max<std::int64_t>(ref_total, 1)) / n});
  }
  trace.validate();
  return trace;
}

std::vector<double> calibration_grid(const PhotophysicsModel& model, Intensity i, std::size_t points,
                                     double span_factor) {
  if (points < 3) throw DomainError("calibration grid needs at least 3 points");
  if (!(span_factor > 0.0)) throw DomainError("span factor must be > 0");
  const double end = span_factor * init_time(model, i);
  std::vector<double> grid(points);
  for (std::size_t j = 0; j < points; ++j) {
    grid[j] = end * static_cast<double>(j) / static_cast<double>(points - 1);
  }
  return grid;
}

PipelineResult end_to_end_pipeline(const PhotophysicsModel& model, std::span<const double> intensities,
                                   std::span<const std::vector<double>> grids, std::size_t shots,
                                   std::uint64_t seed, bool noiseless) {
  if (grids.size() != intensities.size()) throw DomainError("one delay grid per intensity is required");
  PipelineResult result;
  std::vector<CurvePoint> init_points;
  std::vector<CurvePoint> readout_points;
  for (std::size_t m = 0; m < intensities.size(); ++m) {
    const Intensity i(intensities[m]);
    const auto trace = simulate_calibration(model, i, grids[m], shots, rng::derive_seed(seed, m), noiseless);
    auto times = extract_times(trace);
    init_points.push_back({i, times.t_init});
    readout_points.push_back({i, times.t_ro});
    result.per_intensity.push_back(std::move(times));
  }
  result.init_curve = fit_log_quadratic(init_points);
  result.readout_curve = fit_log_quadratic(readout_points);
  return result;
}

std::string format_sim_report(const SimConfig& cfg, Protocol protocol, const SimOutcome& o) {
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("protocol", std::string(to_string(protocol)));
  kv("i_conf_mw_per_um2", text::format_double(cfg.i_conf.value()));
  kv("n_trials", std::to_string(cfg.n_trials));
  kv("master_seed", std::to_string(cfg.master_seed));
  kv("noiseless", cfg.noiseless ? "true" : "false");
  kv("readouts_per_cycle", std::to_string(o.readouts_per_cycle));
  kv("cycle_time_us", text::format_double(o.cycle_time));
  kv("signal_mean", text::format_double(o.signal_mean));
  kv("signal_stderr", text::format_double(o.signal_stderr));
  kv("eta_empirical_sqrt_us", text::format_double(o.eta_empirical));
  kv("eta_stderr_sqrt_us", o.stderr_available ? text::format_double(o.eta_stderr) : "unavailable");
  return out;
}

}  // namespace qdm
