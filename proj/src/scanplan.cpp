#include "qdm/scanplan.hpp"

#include "qdm/error.hpp"
#include "qdm/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace qdm {

namespace {

double axis_index(double f, const AxisMap& m, double pitch) { return (f - m.f0) / m.slope / pitch; }

double dead_time_after(std::size_t flat, const VoxelGrid& grid, const ProtocolParams& p,
                       const PlanOptions& options) {
  if (options.t_z_step && flat + 1 < grid.size() && grid.unflatten(flat + 1).z != grid.unflatten(flat).z) {
    return *options.t_z_step;
  }
  return p.t_d;
}

}  // namespace

void VoxelGrid::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) throw DomainError("voxel grid dimensions must be >= 1");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw DomainError("voxel pitch must be > 0");
}

std::size_t VoxelGrid::flatten(VoxelIndex v) const {
  if (!contains(v)) throw IndexError("voxel outside grid");
  return v.x + nx * (v.y + ny * v.z);
}

VoxelIndex VoxelGrid::unflatten(std::size_t flat) const {
  if (flat >= size()) throw IndexError("flat voxel index outside grid");
  return {flat % nx, (flat / nx) % ny, flat / (nx * ny)};
}

void AOMCalibration::validate(const VoxelGrid& grid) const {
  grid.validate();
  const double x_max = static_cast<double>(grid.nx - 1) * grid.pitch;
  const double y_max = static_cast<double>(grid.ny - 1) * grid.pitch;
  const std::array<std::pair<const AxisMap*, double>, 4> channels = {
      {{&scan_x, x_max}, {&scan_y, y_max}, {&descan_x, x_max}, {&descan_y, y_max}}};
  for (const auto& [m, extent] : channels) {
    if (!std::isfinite(m->f0) || !std::isfinite(m->slope) || m->slope == 0.0) {
      throw DomainError("AOM map needs finite f0 and a finite non-zero slope");
    }
    if (!(std::min(m->f0, m->f0 + m->slope * extent) > 0.0)) {
      throw DomainError("AOM drive frequency not positive over the grid");
    }
  }
}

RfQuad rf_for_voxel(VoxelIndex v, const VoxelGrid& grid, const AOMCalibration& cal) {
  if (!grid.contains(v)) throw IndexError("voxel outside grid");
  const double x = static_cast<double>(v.x) * grid.pitch;
  const double y = static_cast<double>(v.y) * grid.pitch;
  return {cal.scan_x.f0 + cal.scan_x.slope * x, cal.scan_y.f0 + cal.scan_y.slope * y,
          cal.descan_x.f0 + cal.descan_x.slope * x, cal.descan_y.f0 + cal.descan_y.slope * y};
}

VoxelIndex voxel_for_rf(const RfQuad& rf, const VoxelGrid& grid, const AOMCalibration& cal, std::size_t z) {
  const double sx = std::round(axis_index(rf.f_scan_x, cal.scan_x, grid.pitch));
  const double sy = std::round(axis_index(rf.f_scan_y, cal.scan_y, grid.pitch));
  const double dx = std::round(axis_index(rf.f_descan_x, cal.descan_x, grid.pitch));
  const double dy = std::round(axis_index(rf.f_descan_y, cal.descan_y, grid.pitch));
  if (sx != dx || sy != dy) throw DomainError("scan and descan frequencies address different voxels");
  if (sx < 0.0 || sy < 0.0) throw IndexError("frequencies point outside the grid");
  const VoxelIndex v{static_cast<std::size_t>(sx), static_cast<std::size_t>(sy), z};
  if (!grid.contains(v)) throw IndexError("frequencies point outside the grid");
  return v;
}

ScanPlan plan_acquisition(const VoxelGrid& grid, const ProtocolParams& p, Protocol protocol,
                          const PlanOptions& options) {
  grid.validate();
  p.validate();
  if (options.t_z_step && (!(*options.t_z_step >= 0.0) || !std::isfinite(*options.t_z_step))) {
    throw DomainError("t_z_step must be finite and >= 0");
  }
  if (options.aom) options.aom->validate(grid);

  std::size_t batch = 1;
  double overhead = 0.0;  // per cycle
  double per_voxel = 0.0;  // per voxel, excluding the dead time that follows it
  switch (protocol) {
    case Protocol::LCQDM:
      batch = recurrent_count_lcqdm(p);
      overhead = p.t_init_ls + p.t_mw;
      per_voxel = p.t_ro_conf;
      break;
    case Protocol::Leibold:
      batch = recurrent_count_leibold(p);
      overhead = p.t_mw;
      per_voxel = p.t_ro_conf + p.t_init_conf;
      break;
    case Protocol::Conventional:
      batch = 1;
      overhead = p.t_init_conf + p.t_mw;
      per_voxel = p.t_ro_conf;
      break;
    case Protocol::Calibration:
      throw DomainError("calibration is not an imaging protocol");
  }

  ScanPlan plan;
  plan.protocol = protocol;
  const std::size_t total = grid.size();
  plan.cycles.reserve((total + batch - 1) / batch);
  double clock = 0.0;
  for (std::size_t begin = 0; begin < total; begin += batch) {
    const std::size_t end = std::min(total, begin + batch);
    const auto n = static_cast<double>(end - begin);
    std::size_t z_steps = 0;
    if (options.t_z_step) {
      for (std::size_t v = begin; v < end; ++v) {
        if (v + 1 < total && grid.unflatten(v + 1).z != grid.unflatten(v).z) ++z_steps;
      }
    }
    const double dead = (n - static_cast<double>(z_steps)) * p.t_d +
                        static_cast<double>(z_steps) * options.t_z_step.value_or(p.t_d);
    const double duration = overhead + n * per_voxel + dead;
    plan.cycles.push_back({begin, end, clock, duration});
    clock += duration;
  }
  plan.total_time = clock;

  if (options.aom) {
    plan.rf_schedule.reserve(total);
    for (std::size_t v = 0; v < total; ++v) {
      const auto idx = grid.unflatten(v);
      plan.rf_schedule.push_back({idx, rf_for_voxel(idx, grid, *options.aom)});
    }
  }
  return plan;
}

std::vector<ReadoutSlot> cycle_slots(const PlanCycle& cycle, const VoxelGrid& grid, const ProtocolParams& p,
                                     const PlanOptions& options) {
  std::vector<ReadoutSlot> slots;
  slots.reserve(cycle.voxel_end - cycle.voxel_begin);
  for (std::size_t v = cycle.voxel_begin; v < cycle.voxel_end; ++v) {
    slots.push_back({v, dead_time_after(v, grid, p, options)});
  }
  return slots;
}

SpeedupReport speedup_report(const VoxelGrid& grid, const ProtocolParams& p, const PlanOptions& options) {
  PlanOptions timing = options;
  timing.aom.reset();
  SpeedupReport r;
  r.total_lcqdm = plan_acquisition(grid, p, Protocol::LCQDM, timing).total_time;
  r.total_leibold = plan_acquisition(grid, p, Protocol::Leibold, timing).total_time;
  r.total_conventional = plan_acquisition(grid, p, Protocol::Conventional, timing).total_time;
  r.conventional_over_lcqdm = r.total_conventional / r.total_lcqdm;
  r.leibold_over_lcqdm = r.total_leibold / r.total_lcqdm;
  return r;
}

void write_plan_csv(const ScanPlan& plan, std::ostream& out) {
  out << "cycle,voxel_start,voxel_end,start_us,duration_us\n";
  for (std::size_t c = 0; c < plan.cycles.size(); ++c) {
    const auto& cy = plan.cycles[c];
    out << c << ',' << cy.voxel_begin << ',' << cy.voxel_end - 1 << ',' << text::format_double(cy.start) << ','
        << text::format_double(cy.duration) << '\n';
  }
}

void write_rf_csv(const ScanPlan& plan, std::ostream& out) {
  out << "voxel_x,voxel_y,voxel_z,f_sx_mhz,f_sy_mhz,f_dx_mhz,f_dy_mhz\n";
  for (const auto& e : plan.rf_schedule) {
    out << e.voxel.x << ',' << e.voxel.y << ',' << e.voxel.z << ',' << text::format_double(e.rf.f_scan_x) << ','
        << text::format_double(e.rf.f_scan_y) << ',' << text::format_double(e.rf.f_descan_x) << ','
        << text::format_double(e.rf.f_descan_y) << '\n';
  }
}

std::string format_speedup_report(const VoxelGrid& grid, const SpeedupReport& r) {
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("grid", std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + "x" + std::to_string(grid.nz));
  kv("total_lcqdm_us", text::format_double(r.total_lcqdm));
  kv("total_leibold_us", text::format_double(r.total_leibold));
  kv("total_conventional_us", text::format_double(r.total_conventional));
  kv("conventional_over_lcqdm", text::format_double(r.conventional_over_lcqdm));
  kv("leibold_over_lcqdm", text::format_double(r.leibold_over_lcqdm));
  return out;
}

}  // namespace qdm
