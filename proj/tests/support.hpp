#pragma once

// Patch builders shared by the unit and acceptance suites.

#include "pids/engine.hpp"

namespace support {

inline pids::Voice voice(pids::SkeletonKind kind, double f, double kp, double ki = 0.0, double kd = 0.0)
{
  pids::Voice v;
  v.artist.skeleton = kind;
  v.artist.frequency_hz = f;
  v.pid.gains = {kp, ki, kd};
  return v;
}

inline pids::Voice step_voice(double f, double kp, double ki = 0.0, double kd = 0.0)
{
  return voice(pids::SkeletonKind::step, f, kp, ki, kd);
}

inline pids::Patch patch(std::vector<pids::Voice> voices, int m = 4, double duration_s = 1.0)
{
  pids::Patch p;
  p.oversample = pids::OversampleFactor(m);
  p.duration_s = duration_s;
  p.voices = std::move(voices);
  return p;
}

inline pids::Automation envelope(std::size_t voice, char const* target,
                                 std::vector<pids::EnvelopePoint> points)
{
  pids::Automation a;
  a.voice = voice;
  a.target = pids::parse_target(target);
  a.source = pids::Envelope{std::move(points)};
  return a;
}

} // namespace support
