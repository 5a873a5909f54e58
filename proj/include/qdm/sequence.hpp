#pragma once

// Pulse-sequence timelines for the three scanning protocols and the
// contrast-vs-delay calibration measurement.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qdm {

/// All durations in us.
struct ProtocolParams {
  double t_init_ls = 0.0;    // light-sheet initialization
  double t_init_conf = 0.0;  // confocal initialization
  double t_ro_conf = 0.0;    // confocal readout
  double t_mw = 0.0;         // MW sensing sequence
  double t_d = 0.0;          // beam-steering dead time
  double t1 = 0.0;           // NV spin-lattice relaxation

  /// Durations finite and >= 0, t1 > 0, t_ro_conf > 0.
  void validate() const;
  bool operator==(const ProtocolParams&) const = default;
};

enum class Protocol { LCQDM, Leibold, Conventional, Calibration };

enum class EventKind { LightSheetPulse, ConfocalLaserPulse, MWBlock, ReadoutWindow, DeadTime };

std::string_view to_string(Protocol p) noexcept;
std::string_view to_string(EventKind k) noexcept;
/// Accepts the canonical names case-insensitively. Throws DomainError.
Protocol parse_protocol(std::string_view name);
EventKind parse_event_kind(std::string_view name);

struct SequenceEvent {
  EventKind kind = EventKind::DeadTime;
  double start = 0.0;
  double duration = 0.0;
  std::optional<std::size_t> voxel;

  double end() const noexcept { return start + duration; }
  bool operator==(const SequenceEvent&) const = default;
};

struct PulseSequence {
  Protocol protocol = Protocol::LCQDM;
  std::vector<SequenceEvent> events;

  /// Latest event end (sequences start at t = 0).
  double span() const noexcept;
  std::size_t count(EventKind kind) const noexcept;
  bool operator==(const PulseSequence&) const = default;
};

/// One voxel visit inside a recurrent cycle, followed by `dead_time` us of
/// beam re-targeting.
struct ReadoutSlot {
  std::size_t voxel = 0;
  double dead_time = 0.0;
};

/// floor(t1 / (t_ro + t_d)), at least 1.
std::size_t recurrent_count_lcqdm(const ProtocolParams& p);
/// floor(t1 / (t_ro + t_init_conf + t_d)), at least 1.
std::size_t recurrent_count_leibold(const ProtocolParams& p);

/// [light sheet][MW] then per voxel k: laser + readout window (t_ro), dead time.
PulseSequence build_lcqdm_cycle(const ProtocolParams& p);
PulseSequence build_lcqdm_cycle(const ProtocolParams& p, std::span<const ReadoutSlot> slots);

/// [MW] then per voxel k: laser for t_ro + t_init_conf with the readout
/// window on its first t_ro, dead time.
PulseSequence build_leibold_cycle(const ProtocolParams& p);
PulseSequence build_leibold_cycle(const ProtocolParams& p, std::span<const ReadoutSlot> slots);

/// [init laser][MW][readout laser + window][dead time], one voxel.
PulseSequence build_conventional_cycle(const ProtocolParams& p);
PulseSequence build_conventional_cycle(const ProtocolParams& p, ReadoutSlot slot);

/// Signal half then reference half, each [init laser][zero-width MW block]
/// [laser on for max(t_init_conf, t_sweep)] with an instantaneous readout
/// window t_sweep after the laser rise.
PulseSequence build_calibration_sequence(const ProtocolParams& p, double t_sweep);

/// Single-cycle builder by tag; Calibration uses t_sweep = 0.
PulseSequence build_cycle(const ProtocolParams& p, Protocol protocol);

/// Elapsed time from the end of the MW block to the start of each readout
/// window, in event order.
std::vector<double> readout_delays(const PulseSequence& s);

enum class ViolationKind { NegativeTime, Ordering, Containment, MissingMWBlock, T1Budget };

struct Violation {
  ViolationKind kind = ViolationKind::Ordering;
  std::vector<std::size_t> event_indices;
  std::string message;
};

struct ValidationReport {
  std::optional<Violation> violation;  // first one found
  std::vector<std::string> warnings;

  bool valid() const noexcept { return !violation.has_value(); }
  std::string to_string() const;
};

ValidationReport validate_sequence(const PulseSequence& s, const ProtocolParams& p);

/// Readout-window time over total span; 0 for an empty timeline.
double duty_cycle(const PulseSequence& s);

/// One event per line: `kind start_us duration_us [voxel]`, preceded by a
/// `# protocol <tag>` comment.
std::string to_timeline(const PulseSequence& s);
PulseSequence parse_timeline(std::string_view text);

}  // namespace qdm
