#include "qdm/sensitivity.hpp"

#include "qdm/error.hpp"
#include "qdm/text.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

namespace qdm {

namespace {

void require_t1(const ProtocolParams& p) {
  if (!(p.t1 > 0.0)) throw DomainError("t1 must be > 0");
}

void require_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw DomainError(std::string(name) + " must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || !(v[i] > 0.0)) {
      throw DomainError(std::string(name) + " values must be finite and > 0");
    }
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw DomainError(std::string(name) + " must be strictly increasing");
    }
  }
}

SweepCell evaluate_cell(const SweepSpec& spec, double i_conf, double t_mw) {
  SweepCell cell;
  cell.i_conf = i_conf;
  cell.t_mw = t_mw;
  try {
    const auto p = params_at(spec.model, Intensity(i_conf), spec.i_ls, t_mw, spec.t_d, spec.t1);
    cell.result = evaluate_all(p);
    cell.valid = true;
  } catch (const Error& e) {
    cell.valid = false;
    cell.error = e.what();
    const double nan = std::nan("");
    cell.result = {nan, nan, nan, nan, nan};
  }
  return cell;
}

}  // namespace

double endpoint_snr_prefactor() noexcept {
  static const double value = 2.0 / (1.0 + std::exp(-1.0));
  return value;
}

double eta_lcqdm(const ProtocolParams& p) {
  require_t1(p);
  const double slot = p.t_ro_conf + p.t_d;
  if (!(slot > 0.0)) throw DomainError("t_ro_conf + t_d must be > 0");
  return endpoint_snr_prefactor() * std::sqrt((p.t_init_ls + p.t_mw + p.t1) * slot / p.t1);
}

double eta_leibold(const ProtocolParams& p) {
  require_t1(p);
  const double slot = p.t_ro_conf + p.t_init_conf + p.t_d;
  if (!(slot > 0.0)) throw DomainError("t_ro_conf + t_init_conf + t_d must be > 0");
  return endpoint_snr_prefactor() * std::sqrt((p.t_mw + p.t1) * slot / p.t1);
}

double eta_conventional(const ProtocolParams& p) {
  const double cycle = p.t_mw + p.t_ro_conf + p.t_init_conf + p.t_d;
  if (!(cycle > 0.0)) throw DomainError("conventional cycle time must be > 0");
  return std::sqrt(cycle);
}

double time_reduction_factor(double eta_ratio) {
  if (!std::isfinite(eta_ratio) || !(eta_ratio > 0.0)) {
    throw DomainError("eta ratio must be finite and > 0");
  }
  return eta_ratio * eta_ratio;
}

SensitivityResult evaluate_all(const ProtocolParams& p) {
  SensitivityResult r;
  r.eta_lcqdm = eta_lcqdm(p);
  r.eta_leibold = eta_leibold(p);
  r.eta_conventional = eta_conventional(p);
  r.ratio_leibold_over_lc = r.eta_leibold / r.eta_lcqdm;
  r.ratio_conv_over_lc = r.eta_conventional / r.eta_lcqdm;
  return r;
}

ProtocolParams params_at(const PhotophysicsModel& model, Intensity i_conf, Intensity i_ls,
                         double t_mw, double t_d, double t1) {
  ProtocolParams p;
  p.t_init_ls = init_time(model, i_ls);
  p.t_init_conf = init_time(model, i_conf);
  p.t_ro_conf = readout_time(model, i_conf);
  p.t_mw = t_mw;
  p.t_d = t_d;
  p.t1 = t1;
  p.validate();
  return p;
}

void SweepSpec::validate() const {
  require_increasing(i_conf_grid, "i_conf_grid");
  require_increasing(t_mw_grid, "t_mw_grid");
  model.validate();
  if (!model.validity.contains(i_ls.value()) || !(i_ls.value() > 0.0)) {
    throw OutOfRangeError("i_ls outside the model validity window");
  }
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw DomainError("t1 must be finite and > 0");
  if (!(t_d >= 0.0) || !std::isfinite(t_d)) throw DomainError("t_d must be finite and >= 0");
}

const SweepCell& SensitivityGrid::at(std::size_t t_mw_index, std::size_t i_conf_index) const {
  const std::size_t cols = spec.i_conf_grid.size();
  if (t_mw_index >= spec.t_mw_grid.size() || i_conf_index >= cols) {
    throw IndexError("sweep cell index out of range");
  }
  return cells[t_mw_index * cols + i_conf_index];
}

std::size_t SensitivityGrid::valid_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.valid; }));
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw DomainError("log_spaced needs 0 < lo <= hi, n >= 1");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double llo = std::log10(lo);
  const double step = (std::log10(hi) - llo) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::pow(10.0, llo + step * static_cast<double>(k));
  out.front() = lo;
  out.back() = hi;
  return out;
}

SweepSpec default_sweep_spec(const PhotophysicsModel& model) {
  constexpr double delta_conf = 0.53;
  SweepSpec spec;
  spec.i_conf_grid = log_spaced(confocal_intensity(0.002, delta_conf).value(),
                                confocal_intensity(2.0, delta_conf).value(), 61);
  spec.t_mw_grid = log_spaced(1.0, 1000.0, 61);
  spec.i_ls = Intensity(0.2);
  spec.model = model;
  spec.t1 = 5000.0;
  spec.t_d = 0.1;
  return spec;
}

SensitivityGrid sweep(const SweepSpec& spec, unsigned workers) {
  spec.validate();
  SensitivityGrid grid{spec, {}};
  const std::size_t cols = spec.i_conf_grid.size();
  const std::size_t total = cols * spec.t_mw_grid.size();
  grid.cells.resize(total);

  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < total; k += stride) {
      grid.cells[k] = evaluate_cell(spec, spec.i_conf_grid[k % cols], spec.t_mw_grid[k / cols]);
    }
  };
  const std::size_t n = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(total, 1));
  if (n == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(run, w, n);
  }
  return grid;
}

void write_sweep_csv(const SensitivityGrid& grid, std::ostream& out) {
  out << "i_conf_mw_per_um2,t_mw_us,eta_lc,eta_leibold,eta_conv,ratio_leibold_lc,ratio_conv_lc,valid\n";
  for (const auto& c : grid.cells) {
    out << text::format_double(c.i_conf) << ',' << text::format_double(c.t_mw) << ','
        << text::format_double(c.result.eta_lcqdm) << ',' << text::format_double(c.result.eta_leibold)
        << ',' << text::format_double(c.result.eta_conventional) << ','
        << text::format_double(c.result.ratio_leibold_over_lc) << ','
        << text::format_double(c.result.ratio_conv_over_lc) << ',' << (c.valid ? 1 : 0) << '\n';
  }
}

std::string ratio_heatmap_pgm(const SensitivityGrid& grid, RatioMap which) {
  const std::size_t cols = grid.spec.i_conf_grid.size();
  const std::size_t rows = grid.spec.t_mw_grid.size();
  auto value = [&](const SweepCell& c) {
    return std::log10(which == RatioMap::LeiboldOverLc ? c.result.ratio_leibold_over_lc
                                                       : c.result.ratio_conv_over_lc);
  };
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& c : grid.cells) {
    if (!c.valid) continue;
    lo = std::min(lo, value(c));
    hi = std::max(hi, value(c));
  }
  constexpr int kMaxGray = 255;
  std::string out = "P2\n# log10 ";
  out += which == RatioMap::LeiboldOverLc ? "eta_leibold/eta_lc" : "eta_conv/eta_lc";
  out += " range " + text::format_double(lo) + " " + text::format_double(hi) + "\n";
  out += std::to_string(cols) + " " + std::to_string(rows) + "\n" + std::to_string(kMaxGray) + "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t row = rows - 1 - r;
    for (std::size_t col = 0; col < cols; ++col) {
      const auto& c = grid.at(row, col);
      int gray = 0;
      if (c.valid) {
        gray = hi > lo ? static_cast<int>(std::lround((value(c) - lo) / (hi - lo) * (kMaxGray - 1))) + 1
                       : kMaxGray;
      }
      if (col) out += ' ';
      out += std::to_string(gray);
    }
    out += '\n';
  }
  return out;
}

}  // namespace qdm
