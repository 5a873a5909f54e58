#pragma once

// Flat `key = value unit` run configuration.
//
// Every dimensioned key requires a unit suffix; values are converted to the
// canonical units (us, um, mW, mW/um^2, counts/us, MHz, MHz/um) on load.
// `#` starts a comment. Unknown and duplicate keys are rejected.

#include "qdm/montecarlo.hpp"
#include "qdm/photophysics.hpp"
#include "qdm/scanplan.hpp"
#include "qdm/sensitivity.hpp"
#include "qdm/sequence.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qdm {

struct RunConfig {
  // Photophysics (synthetic defaults in configs/table1.conf).
  double init_a = 0.0, init_b = 0.0, init_c = 0.0;
  double ro_a = 0.0, ro_b = 0.0, ro_c = 0.0;
  double i_sat = 0.0;  // mW/um^2
  double r_max = 0.0;  // counts/us
  double c0 = 0.0;
  double i_valid_min = 1e-3;
  double i_valid_max = 10.0;

  // Light sheet.
  double l_y = 0.0;   // um
  double d_ls = 0.0;  // um
  double p_ls = 0.0;  // mW
  std::optional<double> i_ls;  // overrides p_ls / (l_y * d_ls)

  // Confocal readout.
  double delta_conf = 0.0;  // um
  double p_conf = 0.0;      // mW, operating point for eval/simulate/plan
  std::optional<double> i_conf;  // overrides p_conf / delta_conf^2
  double p_conf_min = 0.002;  // mW, sweep range
  double p_conf_max = 2.0;

  // Timing; the three optional durations override the curves.
  std::optional<double> t_init_ls, t_init_conf, t_ro_conf;
  double t_d = 0.0;
  double t_mw = 0.0;
  double t_mw_min = 1.0;
  double t_mw_max = 1000.0;
  double t1 = 0.0;
  std::size_t sweep_points_i = 61;
  std::size_t sweep_points_t_mw = 61;

  // Scan grid and AOM map.
  std::size_t grid_nx = 100, grid_ny = 100, grid_nz = 1;
  double pitch = 1.0;
  std::optional<double> t_z_step;
  AOMCalibration aom;

  // Run control.
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::size_t trials = 10000;
  std::size_t shots = 1000;
  std::size_t trace_points = 400;

  PhotophysicsModel model() const;
  Intensity light_sheet_intensity() const;
  Intensity confocal_readout_intensity() const;
  /// Operating-point timing: overrides where given, curves otherwise.
  ProtocolParams params() const;
  SweepSpec sweep_spec() const;
  VoxelGrid grid() const;
  PlanOptions plan_options() const;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace qdm
