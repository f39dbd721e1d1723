#pragma once

#include <cstddef>
#include <span>

namespace pids {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;

  bool operator==(PidGains const&) const = default;
};

inline constexpr double default_integral_limit = 5000.0;

/// Output is always contained to [-1, 1]; that range is not configurable.
struct PidConfig {
  PidGains gains;
  double integral_limit = default_integral_limit;

  bool operator==(PidConfig const&) const = default;
};

struct PidState {
  double prev_output = 0.0;
  double prev_error = 0.0;
  double integral = 0.0;

  bool operator==(PidState const&) const = default;
};

/// Throws Error{configuration} when a gain is negative or non-finite or the
/// integral limit is not a finite positive number.
void validate(PidConfig const& config);

/// True when all three gains are zero (the voice can only produce silence).
bool is_silent(PidGains const& gains);

/// One sample of the positional PID loop. The process variable is the
/// previous output:
///
///   e  = setpoint - prev_output
///   I' = clamp(I + e, -L, L)
///   y  = clamp(kp*e + ki*I' + kd*(e - prev_error), -1, 1)
///
/// Throws Error{domain} for a non-finite setpoint.
double tick(PidState& state, PidConfig const& config, double setpoint);

PidState reset(PidState const& state);

inline constexpr std::size_t default_instability_window = 64;
inline constexpr double default_instability_step = 0.5;

/// Looks for `window` consecutive first differences that strictly alternate
/// in sign with magnitude >= min_step (a two-value Nyquist oscillation).
bool detect_instability(std::span<double const> samples,
                        std::size_t window = default_instability_window,
                        double min_step = default_instability_step);

/// Streaming form of detect_instability, fed one sample at a time.
class InstabilityDetector {
public:
  explicit InstabilityDetector(std::size_t window = default_instability_window,
                               double min_step = default_instability_step);

  /// Returns true once the condition has been met (and stays true).
  bool push(double sample);
  bool fired() const noexcept { return fired_; }
  /// Index of the sample that completed the first qualifying run.
  std::size_t fired_at() const noexcept { return fired_at_; }

private:
  std::size_t window_;
  double min_step_;
  std::size_t count_ = 0;
  double last_sample_ = 0.0;
  double last_diff_ = 0.0;
  std::size_t run_ = 0;
  bool fired_ = false;
  std::size_t fired_at_ = 0;
};

} // namespace pids
