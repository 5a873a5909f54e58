#pragma once

// Whole-grid acquisition schedules, total imaging time, and the affine voxel
// to AOM drive-frequency map for the scan and descan pairs.

#include "qdm/sequence.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qdm {

struct VoxelIndex {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;
  bool operator==(const VoxelIndex&) const = default;
};

/// Raster order: x fastest, then y, then z.
struct VoxelGrid {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;
  double pitch = 1.0;  // um, all axes

  void validate() const;
  std::size_t size() const noexcept { return nx * ny * nz; }
  std::size_t flatten(VoxelIndex v) const;
  VoxelIndex unflatten(std::size_t flat) const;
  bool contains(VoxelIndex v) const noexcept { return v.x < nx && v.y < ny && v.z < nz; }
};

/// f = f0 + slope * coordinate, MHz and MHz/um.
struct AxisMap {
  double f0 = 80.0;
  double slope = 0.1;
  bool operator==(const AxisMap&) const = default;
};

struct AOMCalibration {
  AxisMap scan_x;
  AxisMap scan_y;
  AxisMap descan_x{80.0, -0.1};
  AxisMap descan_y{80.0, -0.1};

  /// Slopes finite and non-zero; every channel positive over the grid.
  void validate(const VoxelGrid& grid) const;
  bool operator==(const AOMCalibration&) const = default;
};

struct RfQuad {
  double f_scan_x = 0.0;
  double f_scan_y = 0.0;
  double f_descan_x = 0.0;
  double f_descan_y = 0.0;
};

/// Throws IndexError when v is outside the grid.
RfQuad rf_for_voxel(VoxelIndex v, const VoxelGrid& grid, const AOMCalibration& cal);

/// Inverse of rf_for_voxel in the XY plane (the AOMs do not address z).
/// Throws DomainError when the scan and descan channels disagree and
/// IndexError when the frequencies point outside the grid.
VoxelIndex voxel_for_rf(const RfQuad& rf, const VoxelGrid& grid, const AOMCalibration& cal, std::size_t z);

struct PlanCycle {
  std::size_t voxel_begin = 0;  // flat raster index, half-open range
  std::size_t voxel_end = 0;
  double start = 0.0;     // us
  double duration = 0.0;  // us
};

struct RfEntry {
  VoxelIndex voxel;
  RfQuad rf;
};

struct ScanPlan {
  Protocol protocol = Protocol::LCQDM;
  std::vector<PlanCycle> cycles;
  double total_time = 0.0;  // us, end of the last cycle
  std::vector<RfEntry> rf_schedule;
};

struct PlanOptions {
  /// Without a calibration the RF schedule is left empty.
  std::optional<AOMCalibration> aom;
  /// Dead time when the next voxel lies in another z plane; defaults to t_d.
  std::optional<double> t_z_step;
};

/// Batches the raster into protocol cycles: up to recurrent_count_lcqdm
/// voxels per LCQDM cycle, recurrent_count_leibold per Leibold cycle, one per
/// Conventional cycle. The last cycle is costed with its true voxel count.
ScanPlan plan_acquisition(const VoxelGrid& grid, const ProtocolParams& p, Protocol protocol,
                          const PlanOptions& options = {});

/// Readout slots of one planned cycle (voxel ids and their dead times), for
/// rebuilding the cycle's pulse sequence.
std::vector<ReadoutSlot> cycle_slots(const PlanCycle& cycle, const VoxelGrid& grid, const ProtocolParams& p,
                                     const PlanOptions& options = {});

struct SpeedupReport {
  double total_lcqdm = 0.0;
  double total_leibold = 0.0;
  double total_conventional = 0.0;
  double conventional_over_lcqdm = 0.0;
  double leibold_over_lcqdm = 0.0;
};

SpeedupReport speedup_report(const VoxelGrid& grid, const ProtocolParams& p, const PlanOptions& options = {});

/// `cycle,voxel_start,voxel_end,start_us,duration_us`; voxel_end inclusive.
void write_plan_csv(const ScanPlan& plan, std::ostream& out);
/// `voxel_x,voxel_y,voxel_z,f_sx_mhz,f_sy_mhz,f_dx_mhz,f_dy_mhz`.
void write_rf_csv(const ScanPlan& plan, std::ostream& out);
std::string format_speedup_report(const VoxelGrid& grid, const SpeedupReport& r);

}  // namespace qdm
