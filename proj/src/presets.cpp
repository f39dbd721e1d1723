#include "pids/presets.hpp"

#include <algorithm>

namespace pids {

namespace {

Voice step_voice(double frequency_hz, PidGains gains)
{
  Voice v;
  v.artist.skeleton = SkeletonKind::step;
  v.artist.breakpoints = reference_breakpoints();
  v.artist.frequency_hz = frequency_hz;
  v.pid.gains = gains;
  return v;
}

Patch single(Voice voice, OversampleFactor m = OversampleFactor{4})
{
  Patch p;
  p.oversample = m;
  p.voices.push_back(std::move(voice));
  return p;
}

Automation envelope(std::size_t voice, ParamKind kind, std::vector<EnvelopePoint> points,
                    std::size_t index = 0)
{
  return {voice, {kind, index}, Envelope{std::move(points)}};
}

std::vector<Preset> build()
{
  std::vector<Preset> list;

  list.push_back({"fig2-windup", "PI voice with the default integral limit of 5000",
                  single(step_voice(440.0, {0.6, 0.3, 0.0}))});

  {
    auto voice = step_voice(440.0, {0.6, 0.3, 0.0});
    voice.pid.integral_limit = 1.0;
    list.push_back({"fig2-early-limit", "same PI voice with the integral limited to +-1",
                    single(voice)});
  }

  list.push_back({"fig9-proportional", "P-only voice, kp = 0.5",
                  single(step_voice(440.0, {0.5, 0.0, 0.0}))});
  list.push_back({"fig11-integral", "I-only voice, ki = 0.3",
                  single(step_voice(440.0, {0.0, 0.3, 0.0}))});
  list.push_back({"fig13-derivative", "D-only voice, kd = 0.3",
                  single(step_voice(440.0, {0.0, 0.0, 0.3}))});
  list.push_back({"fig15-pi", "PI voice, kp = 0.6 and ki = 0.6",
                  single(step_voice(440.0, {0.6, 0.6, 0.0}))});
  list.push_back({"fig16", "PI voice, kp = 0.6 and ki = 0.3, at 440 Hz",
                  single(step_voice(440.0, {0.6, 0.3, 0.0}))});

  {
    auto p = single(step_voice(220.0, {0.6, 0.3, 0.0}));
    auto linear = step_voice(220.0, {0.8, 0.1, 0.0});
    linear.artist.skeleton = SkeletonKind::linear;
    linear.detune_cents = 5.0;
    p.voices.push_back(linear);
    list.push_back({"fig18-additive", "step and linear voices mixed 50/50, second detuned +5 cents", p});
  }

  {
    auto voice = step_voice(2.0, {0.05, 0.0001, 0.0});
    voice.artist.skeleton = SkeletonKind::linear;
    auto p = single(voice, OversampleFactor{1});
    p.duration_s = 2.0;
    list.push_back({"fig19-lfo", "2 Hz linear-artist LFO without anti-aliasing", p});
  }

  {
    auto p = single(step_voice(220.0, {0.0, 0.0, 0.0}));
    p.duration_s = 2.0;
    p.automations.push_back(envelope(0, ParamKind::kp, {{0.0, 0.0}, {2.0, 1.0}}));
    p.automations.push_back(envelope(0, ParamKind::ki, {{0.0, 0.0}, {2.0, 0.6}}));
    list.push_back({"fig20-wavetable", "kp and ki swept together for a morphing timbre", p});
  }

  {
    auto voice = step_voice(440.0, {1.0, 0.0, 0.0});
    voice.artist.breakpoints = {{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}};
    list.push_back({"fig21-dc", "asymmetric step artist with a large DC component", single(voice)});
  }

  {
    auto p = single(step_voice(440.0, {0.2, 0.0, 0.0}));
    p.automations.push_back(envelope(0, ParamKind::ki, {{0.0, 0.0}, {1.0, 0.6}}));
    list.push_back({"fig23-fm", "ki swept upward to grow sidebands around the fundamental", p});
  }

  {
    auto voice = step_voice(440.0, {0.8, 0.1, 0.0});
    voice.artist.skeleton = SkeletonKind::linear;
    auto p = single(voice);
    p.automations.push_back(envelope(0, ParamKind::breakpoint_x, {{0.0, 0.1}, {1.0, 0.6}}, 1));
    list.push_back({"fig24-breakpoint-sweep", "linear artist with its second breakpoint x swept", p});
  }

  list.push_back({"fig25-unstable", "very high gains driving a Nyquist-rate oscillation",
                  single(step_voice(440.0, {50.0, 10.0, 0.0}))});

  {
    auto p = single(step_voice(220.0, {0.6, 0.0, 0.0}));
    Voice lfo;
    lfo.artist.skeleton = SkeletonKind::sine;
    lfo.artist.frequency_hz = 3.0;
    lfo.pid.gains = {0.5, 0.01, 0.0};
    lfo.mix_weight = 0.0;
    p.voices.push_back(lfo);
    p.automations.push_back({0, {ParamKind::kp}, LfoRoute{1, 0.3, 0.5}});
    list.push_back({"lfo-routing", "3 Hz sine LFO voice modulating kp of an audio voice", p});
  }

  return list;
}

} // namespace

std::vector<Preset> const& presets()
{
  static auto const list = build();
  return list;
}

Preset const* find_preset(std::string_view name)
{
  auto const& list = presets();
  auto it = std::find_if(list.begin(), list.end(), [&](Preset const& p) { return p.name == name; });
  return it == list.end() ? nullptr : &*it;
}

} // namespace pids
