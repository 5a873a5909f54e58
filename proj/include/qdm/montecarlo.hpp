#pragma once

// Photon-counting simulation of the scanning protocols, used as an
// independent check on the analytic sensitivity formulas, and a generator of
// synthetic contrast-vs-delay traces.
//
// Photon model shared by both simulators: a readout of length t collects
// Poisson counts with mean flux*t*(1 - c0*s) after the MW pi pulse and
// flux*t for the reference, where s is the surviving spin signal.

#include "qdm/calibration.hpp"
#include "qdm/photophysics.hpp"
#include "qdm/sequence.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qdm {

struct SimConfig {
  ProtocolParams params;
  PhotophysicsModel model;
  Intensity i_conf;
  std::size_t n_trials = 1;
  std::uint64_t master_seed = 0;
  /// Replace counts by their means and the spread by the Poisson variance
  /// model (the infinite-flux limit of the estimator).
  bool noiseless = false;
  /// Drop the MW pi pulse: both windows see the reference rate. The signal
  /// estimate must then be consistent with zero; eta is reported as NaN.
  bool null_signal = false;

  void validate() const;
};

struct SimOutcome {
  double eta_empirical = 0.0;  // sqrt(us)
  double eta_stderr = 0.0;     // sqrt(us); NaN when stderr_available is false
  bool stderr_available = false;
  std::size_t readouts_per_cycle = 0;
  double cycle_time = 0.0;  // us
  /// Inverse-variance weighted spin signal over one cycle (1 = fully
  /// polarized, undecayed), mean over trials and its standard error.
  double signal_mean = 0.0;
  double signal_stderr = 0.0;
  std::vector<double> trial_eta;  // filled when requested
};

/// Monte Carlo estimate of the per-voxel sensitivity of one protocol.
///
/// Each trial simulates one cycle of the protocol's pulse sequence. A readout
/// that starts tau after the MW block carries signal s = exp(-tau / t1). Its
/// estimate (R - S) / (c0 * mu), mu = flux * t_ro, has variance
/// (2 - c0*s) / (c0^2 * mu); the cycle's readouts are combined with those
/// inverse variances as weights. With M and D the mean and spread of the
/// combined estimate over trials, the per-voxel SNR relative to one ideal
/// undecayed readout is (M / D) / (sqrt(N) * SNR_1), SNR_1 =
/// c0*sqrt(mu)/sqrt(2 - c0), and eta = sqrt(cycle_time / N) / SNR.
///
/// Trial i draws from rng::derive_seed(master_seed, i) and trial results are
/// reduced in index order, so the outcome is bitwise identical for any
/// worker count.
SimOutcome simulate_protocol(const SimConfig& cfg, Protocol protocol, unsigned workers = 1,
                             bool keep_trials = false);

/// Swept-delay trace: mean signal rate flux*(1 - contrast_at_delay(t)), mean
/// reference rate flux, each averaged over `shots` 1-us count gates. Point j
/// draws from rng::derive_seed(seed, j).
CalibrationTrace simulate_calibration(const PhotophysicsModel& model, Intensity i,
                                      std::span<const double> sweep_grid, std::size_t shots,
                                      std::uint64_t seed, bool noiseless = false);

/// `points` delays spread evenly over [0, span_factor * init_time(i)].
std::vector<double> calibration_grid(const PhotophysicsModel& model, Intensity i, std::size_t points,
                                     double span_factor = 1.5);

struct PipelineResult {
  LogQuadraticCurve init_curve;
  LogQuadraticCurve readout_curve;
  std::vector<ExtractedTimes> per_intensity;
};

/// Simulated trace at each intensity, extraction of t_init and t_RO, then a
/// log-quadratic fit of each against intensity. grids[m] is the delay grid
/// for intensities[m]; trace m uses rng::derive_seed(seed, m).
PipelineResult end_to_end_pipeline(const PhotophysicsModel& model, std::span<const double> intensities,
                                   std::span<const std::vector<double>> grids, std::size_t shots,
                                   std::uint64_t seed, bool noiseless = false);

std::string format_sim_report(const SimConfig& cfg, Protocol protocol, const SimOutcome& outcome);

}  // namespace qdm
