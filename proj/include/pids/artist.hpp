#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pids {

/// x is the relative position inside one cycle, y the setpoint amplitude.
struct Breakpoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(Breakpoint const&) const = default;
};

using BreakpointSet = std::vector<Breakpoint>;

/// The breakpoint set used throughout the parameter studies: a three-level
/// step/ramp shape through (0,0), (0.33,1), (0.67,-1), (1,0).
BreakpointSet reference_breakpoints();

enum class SkeletonKind { linear, step, sine };

char const* to_string(SkeletonKind kind);

struct SineShape {
  double amplitude = 1.0;
  double phase = 0.0; // cycles, [0, 1)

  bool operator==(SineShape const&) const = default;
};

struct ArtistSpec {
  SkeletonKind skeleton = SkeletonKind::step;
  BreakpointSet breakpoints = reference_breakpoints(); // unused by sine
  SineShape sine;
  double frequency_hz = 440.0;

  bool operator==(ArtistSpec const&) const = default;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

ValidationReport validate_breakpoints(BreakpointSet const& set);

/// Checks the breakpoints (linear/step), the sine shape (sine) and the
/// frequency limits at `effective_rate`: the breakpoint-density limit
/// rate / #breakpoints for linear and step, Nyquist for sine.
/// Throws Error{breakpoints|frequency|domain}; returns non-fatal warnings.
std::vector<std::string> validate_artist(ArtistSpec const& spec, double effective_rate);

/// Setpoint at `phase` cycles. Phase is wrapped into [0, 1) first.
/// Assumes `spec` has been validated.
double evaluate(ArtistSpec const& spec, double phase);

/// Samples per cycle at `sample_rate` (not rounded).
/// Throws Error{frequency} at or above Nyquist.
double wavelength(double sample_rate, double frequency_hz);

/// Highest frequency at which every breakpoint can still be visited.
double max_frequency(double sample_rate, std::size_t breakpoint_count);

/// Cycle-domain phase accumulator. When the increment is the ratio of two
/// doubles that can be scaled to 64-bit integers the phase is tracked as an
/// exact fraction, so integer-period signals repeat sample-for-sample; other
/// increments fall back to floating-point accumulation.
class PhaseAccumulator {
public:
  struct Step {
    double phase;
    bool wrapped;
  };

  PhaseAccumulator() = default;
  /// increment = frequency_hz / sample_rate
  PhaseAccumulator(double frequency_hz, double sample_rate, double start_phase = 0.0);

  static PhaseAccumulator from_increment(double increment, double start_phase = 0.0);

  double phase() const noexcept;
  double increment() const noexcept { return increment_; }
  bool exact() const noexcept { return exact_; }

  /// Changes the rate of advance, keeping the current phase.
  void retune(double frequency_hz, double sample_rate);

  Step advance() noexcept;

private:
  void assign(double numerator, double denominator, double start_phase);

  double increment_ = 0.0;
  bool exact_ = false;
  // exact mode
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
  std::uint64_t step_ = 0;
  // floating mode
  double phase_ = 0.0;
  // last (numerator, denominator) pair, to skip redundant retunes
  double last_num_ = 0.0;
  double last_den_ = 0.0;
};

} // namespace pids
