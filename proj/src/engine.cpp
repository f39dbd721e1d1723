#include "pids/engine.hpp"

#include "pids/analysis.hpp"
#include "pids/error.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace pids {

namespace {

constexpr double min_frequency_hz = 1e-3;
constexpr double min_breakpoint_gap = 1e-9;

bool is_breakpoint_target(ParamKind kind)
{
  return kind == ParamKind::breakpoint_x || kind == ParamKind::breakpoint_y;
}

bool is_sine_target(ParamKind kind)
{
  return kind == ParamKind::sine_amplitude || kind == ParamKind::sine_phase;
}

std::string voice_field(std::size_t v, std::string_view rest)
{
  return fmt::format("voices[{}].{}", v, rest);
}

} // namespace

std::size_t Patch::output_length() const
{
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

AutomationTarget parse_target(std::string_view name)
{
  if (name == "kp") return {ParamKind::kp};
  if (name == "ki") return {ParamKind::ki};
  if (name == "kd") return {ParamKind::kd};
  if (name == "frequency_hz") return {ParamKind::frequency_hz};
  if (name == "sine.amplitude") return {ParamKind::sine_amplitude};
  if (name == "sine.phase") return {ParamKind::sine_phase};

  constexpr std::string_view prefix = "breakpoint[";
  if (name.starts_with(prefix)) {
    auto const close = name.find(']');
    if (close != std::string_view::npos) {
      auto const digits = name.substr(prefix.size(), close - prefix.size());
      auto const suffix = name.substr(close + 1);
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty()) {
        if (suffix == ".x") return {ParamKind::breakpoint_x, index};
        if (suffix == ".y") return {ParamKind::breakpoint_y, index};
      }
    }
  }
  throw Error(ErrorCode::configuration, fmt::format("unknown automation target '{}'", name),
              "target");
}

std::string to_string(AutomationTarget const& target)
{
  switch (target.kind) {
  case ParamKind::kp: return "kp";
  case ParamKind::ki: return "ki";
  case ParamKind::kd: return "kd";
  case ParamKind::frequency_hz: return "frequency_hz";
  case ParamKind::breakpoint_x: return fmt::format("breakpoint[{}].x", target.index);
  case ParamKind::breakpoint_y: return fmt::format("breakpoint[{}].y", target.index);
  case ParamKind::sine_amplitude: return "sine.amplitude";
  case ParamKind::sine_phase: return "sine.phase";
  }
  return "unknown";
}

double detune_hz(double frequency_hz, double cents)
{
  return frequency_hz * std::exp2(cents / 1200.0);
}

double envelope_value(Envelope const& envelope, double t)
{
  auto const& pts = envelope.points;
  if (pts.empty())
    throw Error(ErrorCode::configuration, "envelope has no anchors", "envelope");
  if (t <= pts.front().time_s)
    return pts.front().value;
  if (t >= pts.back().time_s)
    return pts.back().value;

  auto upper = std::upper_bound(pts.begin(), pts.end(), t,
                                [](double v, EnvelopePoint const& p) { return v < p.time_s; });
  auto const& b = *upper;
  auto const& a = *(upper - 1);
  double const span = b.time_s - a.time_s;
  if (span <= 0.0)
    return b.value;
  return a.value + (b.value - a.value) * ((t - a.time_s) / span);
}

ParamRange legal_range(Voice const& voice, AutomationTarget const& target, double effective_rate)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto const& artist = voice.artist;
  switch (target.kind) {
  case ParamKind::kp:
  case ParamKind::ki:
  case ParamKind::kd:
    return {0.0, inf};
  case ParamKind::frequency_hz: {
    double limit = artist.skeleton == SkeletonKind::sine
                       ? std::nextafter(effective_rate / 2.0, 0.0)
                       : max_frequency(effective_rate, artist.breakpoints.size());
    // the limit applies to the detuned frequency
    limit /= std::exp2(voice.detune_cents / 1200.0);
    return {min_frequency_hz, limit};
  }
  case ParamKind::breakpoint_x: {
    auto const& bp = artist.breakpoints;
    auto const k = target.index;
    return {bp[k - 1].x + min_breakpoint_gap, bp[k + 1].x - min_breakpoint_gap};
  }
  case ParamKind::breakpoint_y:
    return {-1.0, 1.0};
  case ParamKind::sine_amplitude:
    return {0.0, 1.0};
  case ParamKind::sine_phase:
    return {0.0, 1.0}; // wrapped, not clamped
  }
  return {-inf, inf};
}

double current_value(Voice const& voice, AutomationTarget const& target)
{
  switch (target.kind) {
  case ParamKind::kp: return voice.pid.gains.kp;
  case ParamKind::ki: return voice.pid.gains.ki;
  case ParamKind::kd: return voice.pid.gains.kd;
  case ParamKind::frequency_hz: return voice.artist.frequency_hz;
  case ParamKind::breakpoint_x: return voice.artist.breakpoints.at(target.index).x;
  case ParamKind::breakpoint_y: return voice.artist.breakpoints.at(target.index).y;
  case ParamKind::sine_amplitude: return voice.artist.sine.amplitude;
  case ParamKind::sine_phase: return voice.artist.sine.phase;
  }
  return 0.0;
}

void set_value(Voice& voice, AutomationTarget const& target, double value)
{
  switch (target.kind) {
  case ParamKind::kp: voice.pid.gains.kp = value; break;
  case ParamKind::ki: voice.pid.gains.ki = value; break;
  case ParamKind::kd: voice.pid.gains.kd = value; break;
  case ParamKind::frequency_hz: voice.artist.frequency_hz = value; break;
  case ParamKind::breakpoint_x: voice.artist.breakpoints.at(target.index).x = value; break;
  case ParamKind::breakpoint_y: voice.artist.breakpoints.at(target.index).y = value; break;
  case ParamKind::sine_amplitude: voice.artist.sine.amplitude = value; break;
  case ParamKind::sine_phase: voice.artist.sine.phase = value; break;
  }
}

double sample_at(std::span<double const> lfo, double rate, double t)
{
  if (lfo.empty())
    return 0.0;
  double const pos = std::max(0.0, t * rate);
  auto const i = static_cast<std::size_t>(pos);
  if (i + 1 >= lfo.size())
    return lfo.back();
  double const frac = pos - static_cast<double>(i);
  return lfo[i] + (lfo[i + 1] - lfo[i]) * frac;
}

namespace {

// Clamps (or wraps, for sine phase) into the legal range.
double constrain(double value, ParamKind kind, ParamRange range, bool& clamped)
{
  if (kind == ParamKind::sine_phase) {
    clamped = false;
    return value - std::floor(value);
  }
  double const c = std::clamp(value, range.lo, range.hi);
  clamped = c != value;
  return c;
}

double raw_automation_value(Automation const& a, double base, double t, LfoSignals const& lfos)
{
  if (auto const* env = std::get_if<Envelope>(&a.source))
    return envelope_value(*env, t);

  auto const& route = std::get<LfoRoute>(a.source);
  auto const it = lfos.by_voice.find(route.source_voice);
  if (it == lfos.by_voice.end())
    throw Error(ErrorCode::configuration,
                fmt::format("LFO source voice {} has not been rendered", route.source_voice), "lfo");
  return route.offset.value_or(base) + route.depth * sample_at(it->second, lfos.rate, t);
}

// Envelope evaluation for monotonically increasing t, amortized O(1).
class EnvelopeCursor {
public:
  explicit EnvelopeCursor(Envelope const& env) : pts_(env.points) {}

  double at(double t)
  {
    if (t <= pts_.front().time_s)
      return pts_.front().value;
    while (pos_ + 1 < pts_.size() && pts_[pos_ + 1].time_s <= t)
      ++pos_;
    if (pos_ + 1 >= pts_.size())
      return pts_.back().value;
    auto const& a = pts_[pos_];
    auto const& b = pts_[pos_ + 1];
    double const span = b.time_s - a.time_s;
    if (span <= 0.0)
      return b.value;
    return a.value + (b.value - a.value) * ((t - a.time_s) / span);
  }

private:
  std::vector<EnvelopePoint> const& pts_;
  std::size_t pos_ = 0;
};

struct Lane {
  Automation const* automation;
  double base;
  std::optional<EnvelopeCursor> cursor;
  std::span<double const> lfo;
};

double route_value(Lane const& lane, double t, double rate)
{
  auto const& route = std::get<LfoRoute>(lane.automation->source);
  return route.offset.value_or(lane.base) + route.depth * sample_at(lane.lfo, rate, t);
}

void check_target(Voice const& voice, AutomationTarget const& target, std::string const& field)
{
  auto const kind = target.kind;
  auto const skeleton = voice.artist.skeleton;
  if (is_breakpoint_target(kind)) {
    if (skeleton == SkeletonKind::sine)
      throw Error(ErrorCode::configuration, "breakpoint targets need a linear or step artist", field);
    auto const n = voice.artist.breakpoints.size();
    if (target.index >= n)
      throw Error(ErrorCode::configuration,
                  fmt::format("breakpoint index {} out of range (voice has {})", target.index, n),
                  field);
    if (kind == ParamKind::breakpoint_x && (target.index == 0 || target.index + 1 == n))
      throw Error(ErrorCode::configuration, "the first and last breakpoint x are fixed at 0 and 1",
                  field);
  }
  if (is_sine_target(kind) && skeleton != SkeletonKind::sine)
    throw Error(ErrorCode::configuration, "sine targets need a sine artist", field);
}

} // namespace

double resolve_automation(Patch const& patch, std::size_t index, double t, LfoSignals const& lfos,
                          bool* clamped)
{
  auto const& a = patch.automations.at(index);
  auto const& voice = patch.voices.at(a.voice);
  check_target(voice, a.target, fmt::format("automations[{}].target", index));

  double const rate = patch.sample_rate * patch.factor_for(voice).value();
  double const raw = raw_automation_value(a, current_value(voice, a.target), t, lfos);
  bool hit = false;
  double const value = constrain(raw, a.target.kind, legal_range(voice, a.target, rate), hit);
  if (clamped)
    *clamped = hit;
  return value;
}

VoiceRender render_voice(Voice const& voice_in, OversampleFactor m, double duration_s,
                         double sample_rate, std::span<Automation const> automations,
                         LfoSignals const& lfos)
{
  if (!std::isfinite(sample_rate) || sample_rate <= 0.0)
    throw Error(ErrorCode::domain, "sample rate must be finite and > 0", "sample_rate");
  if (!std::isfinite(duration_s) || duration_s <= 0.0)
    throw Error(ErrorCode::domain, "duration must be finite and > 0", "duration_s");

  double const rate = sample_rate * m.value();
  auto const out_len = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  auto const ticks = out_len * static_cast<std::size_t>(m.value());

  Voice voice = voice_in;
  validate(voice.pid);
  double const base_frequency = voice.artist.frequency_hz;
  ArtistSpec artist = voice.artist;
  artist.frequency_hz = detune_hz(base_frequency, voice.detune_cents);
  validate_artist(artist, rate);

  std::vector<Lane> lanes;
  lanes.reserve(automations.size());
  bool retunes = false;
  for (auto const& a : automations) {
    check_target(voice, a.target, "target");
    Lane lane{&a, current_value(voice, a.target), std::nullopt, {}};
    if (auto const* env = std::get_if<Envelope>(&a.source)) {
      if (env->points.empty())
        throw Error(ErrorCode::configuration, "envelope has no anchors", "envelope");
      lane.cursor.emplace(*env);
    } else {
      auto const& route = std::get<LfoRoute>(a.source);
      auto const it = lfos.by_voice.find(route.source_voice);
      if (it == lfos.by_voice.end())
        throw Error(ErrorCode::configuration,
                    fmt::format("LFO source voice {} has not been rendered", route.source_voice),
                    "lfo");
      lane.lfo = it->second;
    }
    retunes = retunes || a.target.kind == ParamKind::frequency_hz;
    lanes.push_back(std::move(lane));
  }

  VoiceRender result;
  auto& diag = result.diagnostics;
  diag.frequency_hz = artist.frequency_hz;
  diag.ticks = ticks;

  PhaseAccumulator phase(artist.frequency_hz, rate);
  PidState state;
  InstabilityDetector detector;
  std::vector<double> raw(ticks);

  for (std::size_t i = 0; i < ticks; ++i) {
    if (!lanes.empty()) {
      double const t = static_cast<double>(i) / rate;
      for (auto& lane : lanes) {
        auto const& target = lane.automation->target;
        double const value = lane.cursor ? lane.cursor->at(t)
                                         : route_value(lane, t, lfos.rate);
        bool clamped = false;
        double const v = constrain(value, target.kind, legal_range(voice, target, rate), clamped);
        diag.automation_clamps += clamped;
        set_value(voice, target, v);
      }
      artist.breakpoints = voice.artist.breakpoints;
      artist.sine = voice.artist.sine;
      if (retunes) {
        artist.frequency_hz = detune_hz(voice.artist.frequency_hz, voice.detune_cents);
        phase.retune(artist.frequency_hz, rate);
      }
    }

    double const y = tick(state, voice.pid, evaluate(artist, phase.phase()));
    raw[i] = y;
    diag.max_abs_integral = std::max(diag.max_abs_integral, std::abs(state.integral));
    if (!diag.unstable && detector.push(y)) {
      diag.unstable = true;
      diag.unstable_at_tick = detector.fired_at();
    }
    phase.advance();
  }

  diag.antialiased = !m.bypass() && (diag.frequency_hz >= lfo_threshold_hz || voice.lfo_antialias);
  if (diag.antialiased)
    result.samples = antialias(raw, m, sample_rate);
  else
    result.samples = decimate(raw, m);
  return result;
}

std::vector<double> weighted_sum(std::span<std::vector<double> const> signals,
                                 std::span<double const> weights)
{
  if (signals.size() != weights.size())
    throw Error(ErrorCode::length_mismatch, "one weight per signal is required");
  if (signals.empty())
    throw Error(ErrorCode::configuration, "nothing to mix");

  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw Error(ErrorCode::configuration, "mix weights must be finite and non-negative", "mix");
    total += w;
  }
  if (total <= 0.0)
    throw Error(ErrorCode::configuration, "mix weights are all zero", "mix");

  auto const len = signals.front().size();
  for (auto const& s : signals)
    if (s.size() != len)
      throw Error(ErrorCode::length_mismatch, "signals to mix differ in length");

  std::vector<double> out(len, 0.0);
  for (std::size_t v = 0; v < signals.size(); ++v) {
    double const w = weights[v] / total;
    auto const& s = signals[v];
    for (std::size_t n = 0; n < len; ++n)
      out[n] += w * s[n];
  }
  return out;
}

MixResult mix(std::span<std::vector<double> const> signals, std::span<double const> weights,
              double gain)
{
  MixResult result{weighted_sum(signals, weights), 0};
  for (auto& s : result.samples) {
    double const scaled = s * gain;
    s = std::clamp(scaled, -1.0, 1.0);
    result.clip_count += s != scaled;
  }
  return result;
}

std::vector<std::size_t> render_order(Patch const& patch)
{
  auto const n = patch.voices.size();
  // dependency edges: source voice -> automated voice
  std::vector<std::vector<std::size_t>> sources(n);
  for (std::size_t i = 0; i < patch.automations.size(); ++i) {
    auto const& a = patch.automations[i];
    if (auto const* route = std::get_if<LfoRoute>(&a.source))
      sources.at(a.voice).push_back(route->source_voice);
  }

  enum class Mark { none, active, done };
  std::vector<Mark> mark(n, Mark::none);
  std::vector<std::size_t> order;
  order.reserve(n);

  auto visit = [&](auto&& self, std::size_t v) -> void {
    if (mark[v] == Mark::done)
      return;
    if (mark[v] == Mark::active)
      throw Error(ErrorCode::configuration, fmt::format("LFO routing cycle through voice {}", v),
                  "automations");
    mark[v] = Mark::active;
    for (auto s : sources[v])
      self(self, s);
    mark[v] = Mark::done;
    order.push_back(v);
  };
  for (std::size_t v = 0; v < n; ++v)
    visit(visit, v);
  return order;
}

std::vector<std::string> validate_patch(Patch const& patch)
{
  std::vector<std::string> warnings;

  if (!std::isfinite(patch.sample_rate) || patch.sample_rate <= 0.0)
    throw Error(ErrorCode::patch_semantic, "must be finite and > 0", "sample_rate");
  if (!std::isfinite(patch.duration_s) || patch.duration_s <= 0.0)
    throw Error(ErrorCode::patch_semantic, "must be finite and > 0", "duration_s");
  if (patch.output_length() == 0)
    throw Error(ErrorCode::patch_semantic, "shorter than one sample", "duration_s");
  if (!std::isfinite(patch.master_gain) || patch.master_gain < 0.0)
    throw Error(ErrorCode::patch_semantic, "must be finite and non-negative", "master_gain");
  if (patch.voices.empty())
    throw Error(ErrorCode::patch_semantic, "at least one voice is required", "voices");

  bool any_weight = false;
  for (std::size_t v = 0; v < patch.voices.size(); ++v) {
    auto const& voice = patch.voices[v];
    if (!std::isfinite(voice.mix_weight) || voice.mix_weight < 0.0)
      throw Error(ErrorCode::patch_semantic, "must be finite and non-negative", voice_field(v, "mix"));
    any_weight = any_weight || voice.mix_weight > 0.0;
    if (!std::isfinite(voice.detune_cents))
      throw Error(ErrorCode::patch_semantic, "must be finite", voice_field(v, "detune_cents"));

    try {
      validate(voice.pid);
    } catch (Error const& e) {
      auto const field = e.field() == "integral_limit" ? voice_field(v, "integral_limit")
                                                       : voice_field(v, "gains." + e.field());
      throw Error(ErrorCode::patch_semantic, "must be finite and non-negative (limit > 0)", field);
    }
    if (is_silent(voice.pid.gains))
      warnings.push_back(fmt::format("voice {}: all gains are zero, output is silent", v));

    ArtistSpec artist = voice.artist;
    artist.frequency_hz = detune_hz(artist.frequency_hz, voice.detune_cents);
    double const rate = patch.sample_rate * patch.factor_for(voice).value();
    try {
      for (auto& w : validate_artist(artist, rate))
        warnings.push_back(fmt::format("voice {}: {}", v, w));
    } catch (Error const& e) {
      std::string const what = e.what();
      auto const sep = what.find(": ");
      throw Error(e.code() == ErrorCode::domain ? ErrorCode::patch_semantic : e.code(),
                  sep == std::string::npos ? what : what.substr(sep + 2),
                  voice_field(v, "artist." + e.field()));
    }
  }
  if (!any_weight)
    throw Error(ErrorCode::patch_semantic, "mix weights are all zero", "voices");

  for (std::size_t i = 0; i < patch.automations.size(); ++i) {
    auto const& a = patch.automations[i];
    auto const field = fmt::format("automations[{}]", i);
    if (a.voice >= patch.voices.size())
      throw Error(ErrorCode::configuration, fmt::format("no voice {}", a.voice), field + ".voice");
    check_target(patch.voices[a.voice], a.target, field + ".target");

    if (auto const* env = std::get_if<Envelope>(&a.source)) {
      if (env->points.empty())
        throw Error(ErrorCode::configuration, "needs at least one anchor", field + ".envelope");
      double prev = 0.0;
      for (std::size_t k = 0; k < env->points.size(); ++k) {
        auto const& p = env->points[k];
        auto const pf = fmt::format("{}.envelope[{}]", field, k);
        if (!std::isfinite(p.time_s) || !std::isfinite(p.value))
          throw Error(ErrorCode::configuration, "must be finite", pf);
        if (p.time_s < prev)
          throw Error(ErrorCode::configuration, "times must be non-negative and non-decreasing", pf);
        prev = p.time_s;
      }
    } else {
      auto const& route = std::get<LfoRoute>(a.source);
      if (route.source_voice >= patch.voices.size() || route.source_voice == a.voice)
        throw Error(ErrorCode::configuration, "must name another voice", field + ".lfo.source");
      auto const& src = patch.voices[route.source_voice];
      if (detune_hz(src.artist.frequency_hz, src.detune_cents) >= lfo_threshold_hz)
        throw Error(ErrorCode::configuration, "LFO source voice must be below 20 Hz",
                    field + ".lfo.source");
      if (!std::isfinite(route.depth) || (route.offset && !std::isfinite(*route.offset)))
        throw Error(ErrorCode::configuration, "depth and offset must be finite", field + ".lfo");
    }
  }
  render_order(patch);
  return warnings;
}

RenderResult render_patch(Patch const& patch)
{
  RenderResult result;
  result.warnings = validate_patch(patch);

  auto const n = patch.voices.size();
  std::vector<std::vector<double>> outputs(n);
  result.voices.resize(n);
  LfoSignals lfos;
  lfos.rate = patch.sample_rate;

  for (auto v : render_order(patch)) {
    std::vector<Automation> own;
    bool is_source = false;
    for (auto const& a : patch.automations) {
      if (a.voice == v)
        own.push_back(a);
      if (auto const* route = std::get_if<LfoRoute>(&a.source))
        is_source = is_source || route->source_voice == v;
    }
    auto rendered = render_voice(patch.voices[v], patch.factor_for(patch.voices[v]),
                                 patch.duration_s, patch.sample_rate, own, lfos);
    if (rendered.diagnostics.automation_clamps > 0)
      result.warnings.push_back(fmt::format("voice {}: automation clamped to the legal range on {} ticks",
                                            v, rendered.diagnostics.automation_clamps));
    if (rendered.diagnostics.unstable)
      result.warnings.push_back(fmt::format("voice {}: unstable (Nyquist-rate oscillation from tick {})",
                                            v, rendered.diagnostics.unstable_at_tick));
    result.voices[v] = rendered.diagnostics;
    result.unstable = result.unstable || rendered.diagnostics.unstable;
    if (is_source)
      lfos.by_voice[v] = rendered.samples;
    outputs[v] = std::move(rendered.samples);
  }

  std::vector<double> weights(n);
  for (std::size_t v = 0; v < n; ++v)
    weights[v] = patch.voices[v].mix_weight;

  auto mixed = mix(outputs, weights, patch.master_gain);
  result.samples = std::move(mixed.samples);
  result.clip_count = mixed.clip_count;
  result.dc_offset = dc_offset(result.samples);
  return result;
}

} // namespace pids
