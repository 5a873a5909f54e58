#include "qdm/config.hpp"

#include "qdm/error.hpp"
#include "qdm/text.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <variant>

namespace qdm {

namespace {

enum class Dim { None, Duration, Length, Power, Intensity, Rate, Frequency, Slope, Count, Seed, Text };
enum class Rule { Any, NonNegative, Positive, AtLeastOne };

struct UnitFactor {
  std::string_view suffix;
  double num;
  double den;
};

constexpr std::array kDurationUnits = {UnitFactor{"ns", 1, 1000}, UnitFactor{"us", 1, 1},
                                       UnitFactor{"ms", 1000, 1}, UnitFactor{"s", 1e6, 1}};
constexpr std::array kLengthUnits = {UnitFactor{"nm", 1, 1000}, UnitFactor{"um", 1, 1},
                                     UnitFactor{"mm", 1000, 1}};
constexpr std::array kPowerUnits = {UnitFactor{"nW", 1, 1e6}, UnitFactor{"uW", 1, 1000},
                                    UnitFactor{"mW", 1, 1}, UnitFactor{"W", 1000, 1}};
constexpr std::array kIntensityUnits = {UnitFactor{"uW/um2", 1, 1000}, UnitFactor{"mW/um2", 1, 1},
                                        UnitFactor{"W/um2", 1000, 1}, UnitFactor{"W/cm2", 1, 1e5}};
constexpr std::array kRateUnits = {UnitFactor{"counts/us", 1, 1}, UnitFactor{"counts/ms", 1, 1000},
                                   UnitFactor{"counts/s", 1, 1e6}};
constexpr std::array kFrequencyUnits = {UnitFactor{"Hz", 1, 1e6}, UnitFactor{"kHz", 1, 1000},
                                        UnitFactor{"MHz", 1, 1}, UnitFactor{"GHz", 1000, 1}};
constexpr std::array kSlopeUnits = {UnitFactor{"kHz/um", 1, 1000}, UnitFactor{"MHz/um", 1, 1},
                                    UnitFactor{"MHz/mm", 1, 1000}};

std::span<const UnitFactor> units_for(Dim d) {
  switch (d) {
    case Dim::Duration: return kDurationUnits;
    case Dim::Length: return kLengthUnits;
    case Dim::Power: return kPowerUnits;
    case Dim::Intensity: return kIntensityUnits;
    case Dim::Rate: return kRateUnits;
    case Dim::Frequency: return kFrequencyUnits;
    case Dim::Slope: return kSlopeUnits;
    default: return {};
  }
}

std::string_view canonical_unit(Dim d) {
  switch (d) {
    case Dim::Duration: return "us";
    case Dim::Length: return "um";
    case Dim::Power: return "mW";
    case Dim::Intensity: return "mW/um2";
    case Dim::Rate: return "counts/us";
    case Dim::Frequency: return "MHz";
    case Dim::Slope: return "MHz/um";
    default: return "";
  }
}

// Folds the micro sign spellings and "^2" into the ASCII table form.
std::string normalize_unit(std::string_view unit) {
  std::string out;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const auto c = static_cast<unsigned char>(unit[i]);
    if (i + 1 < unit.size()) {
      const auto n = static_cast<unsigned char>(unit[i + 1]);
      if ((c == 0xCE && n == 0xBC) || (c == 0xC2 && n == 0xB5)) {
        out += 'u';
        ++i;
        continue;
      }
    }
    if (c == '^') continue;
    out += static_cast<char>(c);
  }
  return out;
}

using DoubleRef = double& (*)(RunConfig&);
using OptionalRef = std::optional<double>& (*)(RunConfig&);
using CountRef = std::size_t& (*)(RunConfig&);
struct SeedRef {
  std::uint64_t& (*get)(RunConfig&);
};
using TextRef = std::string& (*)(RunConfig&);
using Target = std::variant<DoubleRef, OptionalRef, CountRef, SeedRef, TextRef>;

struct KeySpec {
  std::string_view name;
  Dim dim;
  Rule rule;
  bool required;
  Target target;
};

#define QDM_FIELD(T, expr) Target(+[](RunConfig& c) -> T& { return c.expr; })
#define QDM_DBL(expr) QDM_FIELD(double, expr)
#define QDM_OPT(expr) QDM_FIELD(std::optional<double>, expr)
#define QDM_CNT(expr) QDM_FIELD(std::size_t, expr)

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"init_a", Dim::None, Rule::Any, true, QDM_DBL(init_a)},
      {"init_b", Dim::None, Rule::Any, true, QDM_DBL(init_b)},
      {"init_c", Dim::None, Rule::Any, true, QDM_DBL(init_c)},
      {"ro_a", Dim::None, Rule::Any, true, QDM_DBL(ro_a)},
      {"ro_b", Dim::None, Rule::Any, true, QDM_DBL(ro_b)},
      {"ro_c", Dim::None, Rule::Any, true, QDM_DBL(ro_c)},
      {"i_sat", Dim::Intensity, Rule::Positive, true, QDM_DBL(i_sat)},
      {"r_max", Dim::Rate, Rule::Positive, true, QDM_DBL(r_max)},
      {"c0", Dim::None, Rule::Positive, true, QDM_DBL(c0)},
      {"i_valid_min", Dim::Intensity, Rule::Positive, false, QDM_DBL(i_valid_min)},
      {"i_valid_max", Dim::Intensity, Rule::Positive, false, QDM_DBL(i_valid_max)},
      {"l_y", Dim::Length, Rule::Positive, true, QDM_DBL(l_y)},
      {"d_ls", Dim::Length, Rule::Positive, true, QDM_DBL(d_ls)},
      {"p_ls", Dim::Power, Rule::NonNegative, true, QDM_DBL(p_ls)},
      {"i_ls", Dim::Intensity, Rule::NonNegative, false, QDM_OPT(i_ls)},
      {"delta_conf", Dim::Length, Rule::Positive, true, QDM_DBL(delta_conf)},
      {"p_conf", Dim::Power, Rule::NonNegative, true, QDM_DBL(p_conf)},
      {"i_conf", Dim::Intensity, Rule::NonNegative, false, QDM_OPT(i_conf)},
      {"p_conf_min", Dim::Power, Rule::Positive, false, QDM_DBL(p_conf_min)},
      {"p_conf_max", Dim::Power, Rule::Positive, false, QDM_DBL(p_conf_max)},
      {"t_init_ls", Dim::Duration, Rule::NonNegative, false, QDM_OPT(t_init_ls)},
      {"t_init_conf", Dim::Duration, Rule::NonNegative, false, QDM_OPT(t_init_conf)},
      {"t_ro_conf", Dim::Duration, Rule::Positive, false, QDM_OPT(t_ro_conf)},
      {"t_d", Dim::Duration, Rule::NonNegative, true, QDM_DBL(t_d)},
      {"t_mw", Dim::Duration, Rule::NonNegative, true, QDM_DBL(t_mw)},
      {"t_mw_min", Dim::Duration, Rule::Positive, false, QDM_DBL(t_mw_min)},
      {"t_mw_max", Dim::Duration, Rule::Positive, false, QDM_DBL(t_mw_max)},
      {"t1", Dim::Duration, Rule::Positive, true, QDM_DBL(t1)},
      {"sweep_points_i", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(sweep_points_i)},
      {"sweep_points_t_mw", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(sweep_points_t_mw)},
      {"grid_nx", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(grid_nx)},
      {"grid_ny", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(grid_ny)},
      {"grid_nz", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(grid_nz)},
      {"pitch", Dim::Length, Rule::Positive, false, QDM_DBL(pitch)},
      {"t_z_step", Dim::Duration, Rule::NonNegative, false, QDM_OPT(t_z_step)},
      {"aom_sx_f0", Dim::Frequency, Rule::Any, false, QDM_DBL(aom.scan_x.f0)},
      {"aom_sx_slope", Dim::Slope, Rule::Any, false, QDM_DBL(aom.scan_x.slope)},
      {"aom_sy_f0", Dim::Frequency, Rule::Any, false, QDM_DBL(aom.scan_y.f0)},
      {"aom_sy_slope", Dim::Slope, Rule::Any, false, QDM_DBL(aom.scan_y.slope)},
      {"aom_dx_f0", Dim::Frequency, Rule::Any, false, QDM_DBL(aom.descan_x.f0)},
      {"aom_dx_slope", Dim::Slope, Rule::Any, false, QDM_DBL(aom.descan_x.slope)},
      {"aom_dy_f0", Dim::Frequency, Rule::Any, false, QDM_DBL(aom.descan_y.f0)},
      {"aom_dy_slope", Dim::Slope, Rule::Any, false, QDM_DBL(aom.descan_y.slope)},
      {"output_dir", Dim::Text, Rule::Any, false, QDM_FIELD(std::string, output_dir)},
      {"seed", Dim::Seed, Rule::Any, false, Target(SeedRef{+[](RunConfig& c) -> std::uint64_t& { return c.seed; }})},
      {"trials", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(trials)},
      {"shots", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(shots)},
      {"trace_points", Dim::Count, Rule::AtLeastOne, false, QDM_CNT(trace_points)},
  };
  return table;
}

#undef QDM_CNT
#undef QDM_OPT
#undef QDM_DBL
#undef QDM_FIELD

const KeySpec* find_key(std::string_view name) {
  const auto& table = key_table();
  const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& k) { return k.name == name; });
  return it == table.end() ? nullptr : &*it;
}

double parse_quantity(const KeySpec& key, std::string_view value, std::size_t line) {
  const auto space = value.find_first_of(" \t");
  const std::string_view number = space == std::string_view::npos ? value : value.substr(0, space);
  const std::string_view unit = space == std::string_view::npos ? std::string_view{} : text::trim(value.substr(space));

  double v = 0.0;
  try {
    v = text::parse_double(number);
  } catch (const DomainError&) {
    throw ConfigError(line, "'" + std::string(key.name) + "': malformed number '" + std::string(number) + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(line, "'" + std::string(key.name) + "' must be finite");

  if (key.dim == Dim::None) {
    if (!unit.empty()) {
      throw ConfigError(line, "'" + std::string(key.name) + "' is dimensionless; unexpected unit '" +
                                  std::string(unit) + "'");
    }
  } else {
    if (unit.empty()) {
      throw ConfigError(line, "'" + std::string(key.name) + "' needs a unit, e.g. " +
                                  std::string(canonical_unit(key.dim)));
    }
    const std::string norm = normalize_unit(unit);
    const auto units = units_for(key.dim);
    const auto it = std::find_if(units.begin(), units.end(), [&](const UnitFactor& u) { return u.suffix == norm; });
    if (it == units.end()) {
      throw ConfigError(line, "'" + std::string(key.name) + "': unit '" + std::string(unit) +
                                  "' is not a valid unit for this key");
    }
    v = v * it->num / it->den;
  }

  const bool ok = key.rule == Rule::Any || (key.rule == Rule::NonNegative && v >= 0.0) ||
                  (key.rule == Rule::Positive && v > 0.0);
  if (!ok) {
    throw ConfigError(line, "'" + std::string(key.name) + "' must be " +
                                (key.rule == Rule::Positive ? "> 0" : ">= 0"));
  }
  return v;
}

std::uint64_t parse_integer(const KeySpec& key, std::string_view value, std::size_t line) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError(line, "'" + std::string(key.name) + "' expects a non-negative integer without unit");
  }
  if (key.rule == Rule::AtLeastOne && v < 1) throw ConfigError(line, "'" + std::string(key.name) + "' must be >= 1");
  return v;
}

void assign(RunConfig& cfg, const KeySpec& key, std::string_view value, std::size_t line) {
  std::visit(
      [&](auto ref) {
        using Ref = decltype(ref);
        if constexpr (std::is_same_v<Ref, DoubleRef>) {
          ref(cfg) = parse_quantity(key, value, line);
        } else if constexpr (std::is_same_v<Ref, OptionalRef>) {
          ref(cfg) = parse_quantity(key, value, line);
        } else if constexpr (std::is_same_v<Ref, CountRef>) {
          ref(cfg) = static_cast<std::size_t>(parse_integer(key, value, line));
        } else if constexpr (std::is_same_v<Ref, SeedRef>) {
          ref.get(cfg) = parse_integer(key, value, line);
        } else {
          if (value.empty()) throw ConfigError(line, "'" + std::string(key.name) + "' must not be empty");
          ref(cfg) = std::string(value);
        }
      },
      key.target);
}

// Cross-key checks, reported against the line of the first listed key that
// appeared in the file.
void validate_whole(const RunConfig& c, const std::map<std::string_view, std::size_t>& lines) {
  auto line_of = [&](std::initializer_list<std::string_view> keys) -> std::size_t {
    for (auto k : keys) {
      if (auto it = lines.find(k); it != lines.end()) return it->second;
    }
    return 0;
  };
  auto check = [&](std::initializer_list<std::string_view> keys, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(line_of(keys), e.what());
    }
  };

  check({"c0", "i_sat", "r_max", "init_a", "ro_a", "i_valid_min", "i_valid_max"}, [&] { c.model().validate(); });
  check({"i_ls", "p_ls", "l_y", "d_ls"}, [&] {
    const auto i = c.light_sheet_intensity();
    const auto m = c.model();
    if (!c.t_init_ls && !m.validity.contains(i.value())) {
      throw OutOfRangeError("light-sheet intensity " + text::format_double(i.value()) +
                            " mW/um2 outside the photophysics validity window");
    }
  });
  check({"i_conf", "p_conf", "delta_conf"}, [&] { (void)c.confocal_readout_intensity(); });
  check({"p_conf_max", "p_conf_min"}, [&] {
    if (!(c.p_conf_max >= c.p_conf_min)) throw DomainError("p_conf_max must be >= p_conf_min");
  });
  check({"t_mw_max", "t_mw_min"}, [&] {
    if (!(c.t_mw_max >= c.t_mw_min)) throw DomainError("t_mw_max must be >= t_mw_min");
  });
  check({"grid_nx", "grid_ny", "grid_nz", "pitch"}, [&] { c.grid().validate(); });
  check({"aom_sx_f0", "aom_sx_slope", "aom_sy_f0", "aom_sy_slope",
         "aom_dx_f0", "aom_dx_slope", "aom_dy_f0", "aom_dy_slope"},
        [&] { c.aom.validate(c.grid()); });
}

}  // namespace

PhotophysicsModel RunConfig::model() const {
  PhotophysicsModel m;
  m.init_curve = {init_a, init_b, init_c};
  m.readout_curve = {ro_a, ro_b, ro_c};
  m.i_sat = Intensity(i_sat);
  m.r_max = r_max;
  m.c0 = c0;
  m.validity = {i_valid_min, i_valid_max};
  return m;
}

Intensity RunConfig::light_sheet_intensity() const {
  return i_ls ? Intensity(*i_ls) : lightsheet_intensity(p_ls, l_y, d_ls);
}

Intensity RunConfig::confocal_readout_intensity() const {
  return i_conf ? Intensity(*i_conf) : confocal_intensity(p_conf, delta_conf);
}

ProtocolParams RunConfig::params() const {
  const auto m = model();
  ProtocolParams p;
  p.t_init_ls = t_init_ls ? *t_init_ls : init_time(m, light_sheet_intensity());
  p.t_init_conf = t_init_conf ? *t_init_conf : init_time(m, confocal_readout_intensity());
  p.t_ro_conf = t_ro_conf ? *t_ro_conf : readout_time(m, confocal_readout_intensity());
  p.t_mw = t_mw;
  p.t_d = t_d;
  p.t1 = t1;
  p.validate();
  return p;
}

SweepSpec RunConfig::sweep_spec() const {
  SweepSpec s;
  s.i_conf_grid = log_spaced(confocal_intensity(p_conf_min, delta_conf).value(),
                             confocal_intensity(p_conf_max, delta_conf).value(), sweep_points_i);
  s.t_mw_grid = log_spaced(t_mw_min, t_mw_max, sweep_points_t_mw);
  s.i_ls = light_sheet_intensity();
  s.model = model();
  s.t1 = t1;
  s.t_d = t_d;
  return s;
}

VoxelGrid RunConfig::grid() const { return {grid_nx, grid_ny, grid_nz, pitch}; }

PlanOptions RunConfig::plan_options() const { return {aom, t_z_step}; }

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::map<std::string_view, std::size_t> seen;
  std::size_t line_no = 0;
  for (auto raw : text::split(text, '\n')) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError(line_no, "unknown key '" + std::string(key) + "'");
    if (seen.contains(spec->name)) {
      throw ConfigError(line_no, "duplicate key '" + std::string(key) + "' (first on line " +
                                     std::to_string(seen[spec->name]) + ")");
    }
    if (value.empty()) throw ConfigError(line_no, "missing value for '" + std::string(key) + "'");
    assign(cfg, *spec, value, line_no);
    seen[spec->name] = line_no;
  }
  for (const auto& k : key_table()) {
    if (k.required && !seen.contains(k.name)) {
      throw ConfigError(0, "missing required key '" + std::string(k.name) + "'");
    }
  }
  validate_whole(cfg, seen);
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(text::read_file(path)); }

std::string serialize_config(const RunConfig& config) {
  RunConfig c = config;
  std::string out;
  for (const auto& k : key_table()) {
    std::string value;
    std::visit(
        [&](auto ref) {
          using Ref = decltype(ref);
          if constexpr (std::is_same_v<Ref, DoubleRef>) {
            value = text::format_double(ref(c));
          } else if constexpr (std::is_same_v<Ref, OptionalRef>) {
            if (ref(c)) value = text::format_double(*ref(c));
          } else if constexpr (std::is_same_v<Ref, CountRef>) {
            value = std::to_string(ref(c));
          } else if constexpr (std::is_same_v<Ref, SeedRef>) {
            value = std::to_string(ref.get(c));
          } else {
            value = ref(c);
          }
        },
        k.target);
    if (value.empty()) continue;
    out += k.name;
    out += " = ";
    out += value;
    if (k.dim != Dim::None && k.dim != Dim::Count && k.dim != Dim::Seed && k.dim != Dim::Text) {
      out += ' ';
      out += canonical_unit(k.dim);
    }
    out += '\n';
  }
  return out;
}

}  // namespace qdm
