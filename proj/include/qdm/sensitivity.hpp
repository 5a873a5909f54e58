#pragma once

// Per-voxel sensitivity eta = (1/SNR) * sqrt(t) for the three scanning
// protocols, and the (I_conf, t_MW) comparison sweep.
//
// eta is in sqrt(us) with the readout SNR normalized to 1 at the start of the
// T1 window.

#include "qdm/photophysics.hpp"
#include "qdm/sequence.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace qdm {

/// 2 / (1 + e^-1): inverse of the mean of the first (1) and last (e^-1)
/// readout SNR inside one T1 window.
double endpoint_snr_prefactor() noexcept;

double eta_lcqdm(const ProtocolParams& p);
double eta_leibold(const ProtocolParams& p);
double eta_conventional(const ProtocolParams& p);

/// Equal-SNR measurement-time ratio for an eta ratio: ratio^2.
double time_reduction_factor(double eta_ratio);

struct SensitivityResult {
  double eta_lcqdm = 0.0;
  double eta_leibold = 0.0;
  double eta_conventional = 0.0;
  double ratio_leibold_over_lc = 0.0;
  double ratio_conv_over_lc = 0.0;
};

SensitivityResult evaluate_all(const ProtocolParams& p);

/// Timing parameters at one operating point: t_ro_conf and t_init_conf from
/// the readout intensity, t_init_ls from the light-sheet intensity through the
/// same initialization curve.
ProtocolParams params_at(const PhotophysicsModel& model, Intensity i_conf, Intensity i_ls,
                         double t_mw, double t_d, double t1);

struct SweepSpec {
  std::vector<double> i_conf_grid;  // mW/um^2, strictly increasing
  std::vector<double> t_mw_grid;    // us, strictly increasing
  Intensity i_ls;
  PhotophysicsModel model;
  double t1 = 5000.0;
  double t_d = 0.1;

  void validate() const;
};

struct SweepCell {
  double i_conf = 0.0;
  double t_mw = 0.0;
  bool valid = false;
  SensitivityResult result;
  std::string error;  // set when !valid
};

struct SensitivityGrid {
  SweepSpec spec;
  std::vector<SweepCell> cells;  // row-major: row = t_mw index, column = i_conf index

  const SweepCell& at(std::size_t t_mw_index, std::size_t i_conf_index) const;
  std::size_t valid_count() const noexcept;
};

/// n log-spaced points from lo to hi inclusive (endpoints exact).
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

/// Default comparison grid: readout powers 2 uW..2 mW through a 0.53 um
/// focus, t_MW 1..1000 us, 61 points each, I_LS = 0.2 mW/um^2, T1 = 5 ms,
/// t_d = 100 ns.
SweepSpec default_sweep_spec(const PhotophysicsModel& model);

/// Every cell is a pure function of the spec, so the result is identical for
/// any worker count.
SensitivityGrid sweep(const SweepSpec& spec, unsigned workers = 1);

/// Header: i_conf_mw_per_um2,t_mw_us,eta_lc,eta_leibold,eta_conv,ratio_leibold_lc,ratio_conv_lc,valid
void write_sweep_csv(const SensitivityGrid& grid, std::ostream& out);

enum class RatioMap { LeiboldOverLc, ConvOverLc };

/// Plain PGM (P2) of log10(ratio); columns follow i_conf, the top row is the
/// largest t_MW. Invalid cells are black.
std::string ratio_heatmap_pgm(const SensitivityGrid& grid, RatioMap which);

}  // namespace qdm
