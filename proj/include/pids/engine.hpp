#pragma once

#include "pids/artist.hpp"
#include "pids/pid.hpp"
#include "pids/resample.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pids {

/// Voices below this frequency are LFOs and skip anti-aliasing by default.
inline constexpr double lfo_threshold_hz = 20.0;

struct Voice {
  ArtistSpec artist;
  PidConfig pid;
  std::optional<OversampleFactor> oversample; // falls back to the patch factor
  double mix_weight = 1.0;
  double detune_cents = 0.0;
  bool lfo_antialias = false;

  bool operator==(Voice const&) const = default;
};

enum class ParamKind {
  kp,
  ki,
  kd,
  frequency_hz,
  breakpoint_x,
  breakpoint_y,
  sine_amplitude,
  sine_phase,
};

struct AutomationTarget {
  ParamKind kind = ParamKind::kp;
  std::size_t index = 0; // breakpoint index, breakpoint targets only

  bool operator==(AutomationTarget const&) const = default;
};

/// Accepts "kp", "ki", "kd", "frequency_hz", "breakpoint[k].x",
/// "breakpoint[k].y", "sine.amplitude", "sine.phase".
/// Throws Error{configuration} for anything else.
AutomationTarget parse_target(std::string_view name);
std::string to_string(AutomationTarget const& target);

struct EnvelopePoint {
  double time_s = 0.0;
  double value = 0.0;

  bool operator==(EnvelopePoint const&) const = default;
};

/// Time-anchored values, linearly interpolated and held beyond both ends.
struct Envelope {
  std::vector<EnvelopePoint> points;

  bool operator==(Envelope const&) const = default;
};

/// Routes another voice (the LFO, below 20 Hz) into a parameter:
/// value = base + depth * lfo(t), where base is `offset` when given and the
/// parameter's static value otherwise.
struct LfoRoute {
  std::size_t source_voice = 0;
  double depth = 1.0;
  std::optional<double> offset;

  bool operator==(LfoRoute const&) const = default;
};

struct Automation {
  std::size_t voice = 0;
  AutomationTarget target;
  std::variant<Envelope, LfoRoute> source;

  bool operator==(Automation const&) const = default;
};

struct Patch {
  double sample_rate = 44100.0;
  double duration_s = 1.0;
  OversampleFactor oversample{4};
  std::vector<Voice> voices;
  std::vector<Automation> automations;
  double master_gain = 1.0;

  OversampleFactor factor_for(Voice const& voice) const { return voice.oversample.value_or(oversample); }
  std::size_t output_length() const;

  bool operator==(Patch const&) const = default;
};

struct VoiceDiagnostics {
  double frequency_hz = 0.0; // after detune
  bool antialiased = false;
  bool unstable = false;
  std::size_t unstable_at_tick = 0;
  double max_abs_integral = 0.0;
  std::size_t automation_clamps = 0;
  std::size_t ticks = 0;
};

struct VoiceRender {
  std::vector<double> samples; // playback rate
  VoiceDiagnostics diagnostics;
};

struct RenderResult {
  std::vector<double> samples;
  double dc_offset = 0.0;
  std::size_t clip_count = 0;
  bool unstable = false;
  std::vector<VoiceDiagnostics> voices;
  std::vector<std::string> warnings;
};

double detune_hz(double frequency_hz, double cents);

/// Linear interpolation between the surrounding anchors; constant outside.
double envelope_value(Envelope const& envelope, double t);

struct ParamRange {
  double lo;
  double hi;
};

/// Legal range of `target` for `voice` rendered at `effective_rate`, given
/// the voice's current breakpoints (x targets stay strictly between their
/// neighbours).
ParamRange legal_range(Voice const& voice, AutomationTarget const& target, double effective_rate);

double current_value(Voice const& voice, AutomationTarget const& target);
void set_value(Voice& voice, AutomationTarget const& target, double value);

/// Rendered LFO sources by voice index, at `rate`.
struct LfoSignals {
  std::map<std::size_t, std::vector<double>> by_voice;
  double rate = 44100.0;
};

/// Value of `lfo` at time t: linear interpolation, held past the end.
double sample_at(std::span<double const> lfo, double rate, double t);

/// Instantaneous value of automation `index` of `patch` at time t, clamped
/// to the target's legal range. `clamped` (optional) reports whether the
/// clamp engaged. LFO routes need the source voice in `lfos`.
double resolve_automation(Patch const& patch, std::size_t index, double t,
                          LfoSignals const& lfos = {}, bool* clamped = nullptr);

/// Ticks the PID at m * sample_rate against the voice's artist, applying
/// `automations` (all assumed to target this voice) every tick, then brings
/// the result to the playback rate: anti-aliased when m >= 2 and the voice
/// is at least 20 Hz (or lfo_antialias is set), plainly decimated otherwise.
VoiceRender render_voice(Voice const& voice, OversampleFactor m, double duration_s,
                         double sample_rate, std::span<Automation const> automations = {},
                         LfoSignals const& lfos = {});

struct MixResult {
  std::vector<double> samples;
  std::size_t clip_count = 0;
};

/// Per-sample sum with weights normalized to 1, in signal order, unclamped.
/// Throws Error{length_mismatch} or Error{configuration}.
std::vector<double> weighted_sum(std::span<std::vector<double> const> signals,
                                 std::span<double const> weights);

/// weighted_sum scaled by `gain`, then clamped to [-1, 1] with every clamped
/// sample counted.
MixResult mix(std::span<std::vector<double> const> signals, std::span<double const> weights,
              double gain = 1.0);

/// Full semantic validation. Throws Error (with field path) on the first
/// violation; returns warnings.
std::vector<std::string> validate_patch(Patch const& patch);

/// Voice indices in an order where every LFO source precedes its users.
std::vector<std::size_t> render_order(Patch const& patch);

RenderResult render_patch(Patch const& patch);

} // namespace pids
