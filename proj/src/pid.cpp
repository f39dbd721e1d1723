#include "pids/pid.hpp"

#include "pids/error.hpp"

#include <algorithm>
#include <cmath>

namespace pids {

char const* to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::domain: return "domain";
  case ErrorCode::breakpoints: return "breakpoints";
  case ErrorCode::frequency: return "frequency";
  case ErrorCode::filter_design: return "filter_design";
  case ErrorCode::configuration: return "configuration";
  case ErrorCode::length_mismatch: return "length_mismatch";
  case ErrorCode::analysis: return "analysis";
  case ErrorCode::io: return "io";
  case ErrorCode::format: return "format";
  case ErrorCode::patch_syntax: return "patch_syntax";
  case ErrorCode::patch_semantic: return "patch_semantic";
  }
  return "unknown";
}

void validate(PidConfig const& config)
{
  auto check_gain = [](double g, char const* name) {
    if (!std::isfinite(g) || g < 0.0)
      throw Error(ErrorCode::configuration, "gain must be finite and non-negative", name);
  };
  check_gain(config.gains.kp, "kp");
  check_gain(config.gains.ki, "ki");
  check_gain(config.gains.kd, "kd");
  if (!std::isfinite(config.integral_limit) || config.integral_limit <= 0.0)
    throw Error(ErrorCode::configuration, "integral limit must be finite and > 0",
                "integral_limit");
}

bool is_silent(PidGains const& gains)
{
  return gains.kp == 0.0 && gains.ki == 0.0 && gains.kd == 0.0;
}

double tick(PidState& state, PidConfig const& config, double setpoint)
{
  if (!std::isfinite(setpoint))
    throw Error(ErrorCode::domain, "non-finite setpoint");

  double const limit = config.integral_limit;
  double const error = setpoint - state.prev_output;
  double const integral = std::clamp(state.integral + error, -limit, limit);
  double const derivative = error - state.prev_error;

  auto const& g = config.gains;
  double const y = std::clamp(g.kp * error + g.ki * integral + g.kd * derivative, -1.0, 1.0);

  state.prev_output = y;
  state.prev_error = error;
  state.integral = integral;
  return y;
}

PidState reset(PidState const&)
{
  return PidState{};
}

bool detect_instability(std::span<double const> samples, std::size_t window, double min_step)
{
  InstabilityDetector detector(window, min_step);
  for (double s : samples)
    if (detector.push(s))
      return true;
  return false;
}

InstabilityDetector::InstabilityDetector(std::size_t window, double min_step)
    : window_(window), min_step_(min_step)
{
  if (window < 2 || !(min_step > 0.0))
    throw Error(ErrorCode::configuration, "instability detector needs window >= 2 and min_step > 0");
}

bool InstabilityDetector::push(double sample)
{
  if (fired_)
    return true;

  if (count_++ == 0) {
    last_sample_ = sample;
    return false;
  }

  double const diff = sample - last_sample_;
  last_sample_ = sample;

  if (std::abs(diff) < min_step_) {
    run_ = 0;
  } else if (run_ > 0 && ((diff > 0.0) != (last_diff_ > 0.0))) {
    ++run_;
  } else {
    run_ = 1;
  }
  last_diff_ = diff;

  if (run_ >= window_) {
    fired_ = true;
    fired_at_ = count_ - 1;
  }
  return fired_;
}

} // namespace pids
