#include "qdm/sequence.hpp"

#include "qdm/error.hpp"
#include "qdm/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

namespace qdm {

namespace {

constexpr std::array<std::string_view, 4> kProtocolNames = {"LCQDM", "Leibold", "Conventional",
                                                            "Calibration"};
constexpr std::array<std::string_view, 5> kEventNames = {
    "LightSheetPulse", "ConfocalLaserPulse", "MWBlock", "ReadoutWindow", "DeadTime"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::size_t floor_count(double budget, double slot) {
  const double n = std::floor(budget / slot);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

std::vector<ReadoutSlot> uniform_slots(std::size_t n, double dead_time) {
  std::vector<ReadoutSlot> slots(n);
  for (std::size_t k = 0; k < n; ++k) slots[k] = {k, dead_time};
  return slots;
}

void check_slots(std::span<const ReadoutSlot> slots) {
  if (slots.empty()) throw DomainError("a recurrent cycle needs at least one readout slot");
  for (const auto& s : slots) {
    if (!(s.dead_time >= 0.0) || !std::isfinite(s.dead_time)) {
      throw DomainError("slot dead time must be finite and >= 0");
    }
  }
}

}  // namespace

void ProtocolParams::validate() const {
  const std::array<std::pair<const char*, double>, 6> fields = {{{"t_init_ls", t_init_ls},
                                                                 {"t_init_conf", t_init_conf},
                                                                 {"t_ro_conf", t_ro_conf},
                                                                 {"t_mw", t_mw},
                                                                 {"t_d", t_d},
                                                                 {"t1", t1}}};
  for (const auto& [name, v] : fields) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError(std::string(name) + " must be finite and >= 0");
    }
  }
  if (!(t1 > 0.0)) throw DomainError("t1 must be > 0");
  if (!(t_ro_conf > 0.0)) throw DomainError("t_ro_conf must be > 0");
}

std::string_view to_string(Protocol p) noexcept { return kProtocolNames[static_cast<int>(p)]; }
std::string_view to_string(EventKind k) noexcept { return kEventNames[static_cast<int>(k)]; }

Protocol parse_protocol(std::string_view name) {
  for (std::size_t i = 0; i < kProtocolNames.size(); ++i) {
    if (iequals(name, kProtocolNames[i])) return static_cast<Protocol>(i);
  }
  throw DomainError("unknown protocol '" + std::string(name) + "'");
}

EventKind parse_event_kind(std::string_view name) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (iequals(name, kEventNames[i])) return static_cast<EventKind>(i);
  }
  throw DomainError("unknown event kind '" + std::string(name) + "'");
}

double PulseSequence::span() const noexcept {
  double end = 0.0;
  for (const auto& e : events) end = std::max(end, e.end());
  return end;
}

std::size_t PulseSequence::count(EventKind kind) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const auto& e) { return e.kind == kind; }));
}

std::size_t recurrent_count_lcqdm(const ProtocolParams& p) {
  const double slot = p.t_ro_conf + p.t_d;
  if (!(slot > 0.0)) throw DomainError("t_ro_conf + t_d must be > 0");
  if (!(p.t1 > 0.0)) throw DomainError("t1 must be > 0");
  return floor_count(p.t1, slot);
}

std::size_t recurrent_count_leibold(const ProtocolParams& p) {
  const double slot = p.t_ro_conf + p.t_init_conf + p.t_d;
  if (!(slot > 0.0)) throw DomainError("t_ro_conf + t_init_conf + t_d must be > 0");
  if (!(p.t1 > 0.0)) throw DomainError("t1 must be > 0");
  return floor_count(p.t1, slot);
}

PulseSequence build_lcqdm_cycle(const ProtocolParams& p) {
  p.validate();
  const auto slots = uniform_slots(recurrent_count_lcqdm(p), p.t_d);
  return build_lcqdm_cycle(p, slots);
}

PulseSequence build_lcqdm_cycle(const ProtocolParams& p, std::span<const ReadoutSlot> slots) {
  p.validate();
  check_slots(slots);
  PulseSequence s{Protocol::LCQDM, {}};
  s.events.reserve(2 + 3 * slots.size());
  s.events.push_back({EventKind::LightSheetPulse, 0.0, p.t_init_ls, std::nullopt});
  s.events.push_back({EventKind::MWBlock, p.t_init_ls, p.t_mw, std::nullopt});
  double t = p.t_init_ls + p.t_mw;
  for (const auto& slot : slots) {
    s.events.push_back({EventKind::ConfocalLaserPulse, t, p.t_ro_conf, slot.voxel});
    s.events.push_back({EventKind::ReadoutWindow, t, p.t_ro_conf, slot.voxel});
    t += p.t_ro_conf;
    s.events.push_back({EventKind::DeadTime, t, slot.dead_time, std::nullopt});
    t += slot.dead_time;
  }
  return s;
}

PulseSequence build_leibold_cycle(const ProtocolParams& p) {
  p.validate();
  const auto slots = uniform_slots(recurrent_count_leibold(p), p.t_d);
  return build_leibold_cycle(p, slots);
}

PulseSequence build_leibold_cycle(const ProtocolParams& p, std::span<const ReadoutSlot> slots) {
  p.validate();
  check_slots(slots);
  PulseSequence s{Protocol::Leibold, {}};
  s.events.reserve(1 + 3 * slots.size());
  s.events.push_back({EventKind::MWBlock, 0.0, p.t_mw, std::nullopt});
  double t = p.t_mw;
  const double laser = p.t_ro_conf + p.t_init_conf;
  for (const auto& slot : slots) {
    s.events.push_back({EventKind::ConfocalLaserPulse, t, laser, slot.voxel});
    s.events.push_back({EventKind::ReadoutWindow, t, p.t_ro_conf, slot.voxel});
    t += laser;
    s.events.push_back({EventKind::DeadTime, t, slot.dead_time, std::nullopt});
    t += slot.dead_time;
  }
  return s;
}

PulseSequence build_conventional_cycle(const ProtocolParams& p) {
  return build_conventional_cycle(p, ReadoutSlot{0, p.t_d});
}

PulseSequence build_conventional_cycle(const ProtocolParams& p, ReadoutSlot slot) {
  p.validate();
  check_slots(std::span(&slot, 1));
  PulseSequence s{Protocol::Conventional, {}};
  const double ro_start = p.t_init_conf + p.t_mw;
  s.events = {
      {EventKind::ConfocalLaserPulse, 0.0, p.t_init_conf, slot.voxel},
      {EventKind::MWBlock, p.t_init_conf, p.t_mw, std::nullopt},
      {EventKind::ConfocalLaserPulse, ro_start, p.t_ro_conf, slot.voxel},
      {EventKind::ReadoutWindow, ro_start, p.t_ro_conf, slot.voxel},
      {EventKind::DeadTime, ro_start + p.t_ro_conf, slot.dead_time, std::nullopt},
  };
  return s;
}

PulseSequence build_calibration_sequence(const ProtocolParams& p, double t_sweep) {
  if (!(t_sweep >= 0.0) || !std::isfinite(t_sweep)) {
    throw DomainError("t_sweep must be finite and >= 0");
  }
  p.validate();
  PulseSequence s{Protocol::Calibration, {}};
  const double laser = std::max(p.t_init_conf, t_sweep);
  double t = 0.0;
  for (int half = 0; half < 2; ++half) {
    // The MW pi pulse of the signal half is modeled as instantaneous; the
    // reference half has no pulse, so both blocks are zero width.
    s.events.push_back({EventKind::ConfocalLaserPulse, t, p.t_init_conf, 0});
    t += p.t_init_conf;
    s.events.push_back({EventKind::MWBlock, t, 0.0, std::nullopt});
    s.events.push_back({EventKind::ConfocalLaserPulse, t, laser, 0});
    s.events.push_back({EventKind::ReadoutWindow, t + t_sweep, 0.0, 0});
    t += laser;
  }
  return s;
}

PulseSequence build_cycle(const ProtocolParams& p, Protocol protocol) {
  switch (protocol) {
    case Protocol::LCQDM:
      return build_lcqdm_cycle(p);
    case Protocol::Leibold:
      return build_leibold_cycle(p);
    case Protocol::Conventional:
      return build_conventional_cycle(p);
    case Protocol::Calibration:
      return build_calibration_sequence(p, 0.0);
  }
  throw DomainError("unknown protocol");
}

std::vector<double> readout_delays(const PulseSequence& s) {
  const auto mw = std::find_if(s.events.begin(), s.events.end(),
                               [](const auto& e) { return e.kind == EventKind::MWBlock; });
  if (mw == s.events.end()) throw DomainError("sequence has no MW block");
  const double origin = mw->end();
  std::vector<double> delays;
  for (const auto& e : s.events) {
    if (e.kind == EventKind::ReadoutWindow) delays.push_back(e.start - origin);
  }
  return delays;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  out << (valid() ? "valid" : "invalid");
  if (violation) {
    out << ": " << violation->message << " (events";
    for (auto i : violation->event_indices) out << ' ' << i;
    out << ')';
  }
  for (const auto& w : warnings) out << "\nwarning: " << w;
  return out.str();
}

ValidationReport validate_sequence(const PulseSequence& s, const ProtocolParams& p) {
  ValidationReport report;
  const auto& ev = s.events;
  auto fail = [&](ViolationKind kind, std::vector<std::size_t> idx, std::string msg) {
    report.violation = Violation{kind, std::move(idx), std::move(msg)};
    return report;
  };

  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (!std::isfinite(ev[i].start) || !std::isfinite(ev[i].duration) || ev[i].start < 0.0 ||
        ev[i].duration < 0.0) {
      return fail(ViolationKind::NegativeTime, {i}, "event has negative or non-finite timing");
    }
    if (i > 0 && ev[i].start < ev[i - 1].start) {
      return fail(ViolationKind::Ordering, {i - 1, i}, "events not sorted by start time");
    }
  }

  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i].kind != EventKind::ReadoutWindow) continue;
    const bool covered = std::any_of(ev.begin(), ev.end(), [&](const SequenceEvent& l) {
      return l.kind == EventKind::ConfocalLaserPulse && l.voxel == ev[i].voxel &&
             l.start <= ev[i].start && ev[i].end() <= l.end();
    });
    if (!covered) {
      return fail(ViolationKind::Containment, {i},
                  "readout window not inside a confocal laser pulse of the same voxel");
    }
  }

  if (s.protocol == Protocol::LCQDM || s.protocol == Protocol::Leibold) {
    const auto mw = std::find_if(ev.begin(), ev.end(),
                                 [](const auto& e) { return e.kind == EventKind::MWBlock; });
    if (mw == ev.end()) {
      return fail(ViolationKind::MissingMWBlock, {}, "recurrent protocol without an MW block");
    }
    const auto mw_index = static_cast<std::size_t>(mw - ev.begin());
    std::optional<std::size_t> last;
    std::size_t readouts = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (ev[i].kind != EventKind::ReadoutWindow) continue;
      ++readouts;
      if (!last || ev[i].end() >= ev[*last].end()) last = i;
    }
    if (last) {
      const double span = ev[*last].end() - mw->end();
      if (span > p.t1 * (1.0 + 1e-12)) {
        const std::string msg = "readouts span " + text::format_double(span) +
                                " us after the MW block, beyond t1 = " +
                                text::format_double(p.t1) + " us";
        if (readouts > 1) return fail(ViolationKind::T1Budget, {mw_index, *last}, msg);
        report.warnings.push_back(msg + " (single forced readout)");
      }
    } else {
      report.warnings.push_back("no readout windows");
    }
  }
  return report;
}

double duty_cycle(const PulseSequence& s) {
  const double span = s.span();
  if (!(span > 0.0)) return 0.0;
  double readout = 0.0;
  for (const auto& e : s.events) {
    if (e.kind == EventKind::ReadoutWindow) readout += e.duration;
  }
  return readout / span;
}

std::string to_timeline(const PulseSequence& s) {
  std::string out = "# protocol " + std::string(to_string(s.protocol)) + "\n";
  for (const auto& e : s.events) {
    out += to_string(e.kind);
    out += ' ';
    out += text::format_double(e.start);
    out += ' ';
    out += text::format_double(e.duration);
    if (e.voxel) {
      out += ' ';
      out += std::to_string(*e.voxel);
    }
    out += '\n';
  }
  return out;
}

PulseSequence parse_timeline(std::string_view input) {
  PulseSequence s;
  bool have_protocol = false;
  std::size_t line_no = 0;
  for (auto line : text::split(input, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view tag = "# protocol ";
      if (line.starts_with(tag)) {
        s.protocol = parse_protocol(text::trim(line.substr(tag.size())));
        have_protocol = true;
      }
      continue;
    }
    std::vector<std::string_view> tokens;
    for (auto tok : text::split(line, ' ')) {
      if (!tok.empty()) tokens.push_back(tok);
    }
    if (tokens.size() < 3 || tokens.size() > 4) {
      throw DomainError("timeline line " + std::to_string(line_no) + ": expected 3 or 4 fields");
    }
    SequenceEvent e;
    e.kind = parse_event_kind(tokens[0]);
    e.start = text::parse_double(tokens[1]);
    e.duration = text::parse_double(tokens[2]);
    if (tokens.size() == 4) {
      const double v = text::parse_double(tokens[3]);
      if (v < 0.0 || v != std::floor(v)) {
        throw DomainError("timeline line " + std::to_string(line_no) + ": bad voxel index");
      }
      e.voxel = static_cast<std::size_t>(v);
    }
    s.events.push_back(e);
  }
  if (!have_protocol) throw DomainError("timeline missing '# protocol' header");
  return s;
}

}  // namespace qdm
