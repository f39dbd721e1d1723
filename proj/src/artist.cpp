#include "pids/artist.hpp"

#include "pids/error.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pids {

BreakpointSet reference_breakpoints()
{
  return {{0.0, 0.0}, {0.33, 1.0}, {0.67, -1.0}, {1.0, 0.0}};
}

char const* to_string(SkeletonKind kind)
{
  switch (kind) {
  case SkeletonKind::linear: return "linear";
  case SkeletonKind::step: return "step";
  case SkeletonKind::sine: return "sine";
  }
  return "unknown";
}

ValidationReport validate_breakpoints(BreakpointSet const& set)
{
  ValidationReport report;
  if (set.size() < 2) {
    report.errors.push_back("at least two breakpoints are required");
    return report;
  }

  for (std::size_t k = 0; k < set.size(); ++k) {
    auto const& p = set[k];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      report.errors.push_back(fmt::format("breakpoint {} is not finite", k));
      continue;
    }
    if (p.x < 0.0 || p.x > 1.0)
      report.errors.push_back(fmt::format("breakpoint {}: x = {} outside [0, 1]", k, p.x));
    if (p.y < -1.0 || p.y > 1.0)
      report.errors.push_back(fmt::format("breakpoint {}: y = {} outside [-1, 1]", k, p.y));
    if (k > 0 && !(p.x > set[k - 1].x))
      report.errors.push_back(fmt::format("breakpoint {}: x not strictly increasing ({} after {})",
                                          k, p.x, set[k - 1].x));
  }
  if (set.front().x != 0.0)
    report.errors.push_back("first breakpoint must have x = 0");
  if (set.back().x != 1.0)
    report.errors.push_back("last breakpoint must have x = 1");

  if (report.ok() && set.front().y != set.back().y)
    report.warnings.push_back(fmt::format(
        "first and last y differ ({} vs {}); the setpoint jumps at every cycle boundary",
        set.front().y, set.back().y));
  return report;
}

std::vector<std::string> validate_artist(ArtistSpec const& spec, double effective_rate)
{
  if (!std::isfinite(spec.frequency_hz) || spec.frequency_hz <= 0.0)
    throw Error(ErrorCode::frequency, "frequency must be finite and > 0", "frequency_hz");
  if (!std::isfinite(effective_rate) || effective_rate <= 0.0)
    throw Error(ErrorCode::domain, "sample rate must be finite and > 0", "sample_rate");

  std::vector<std::string> warnings;
  if (spec.skeleton == SkeletonKind::sine) {
    auto const& s = spec.sine;
    if (!(s.amplitude >= 0.0 && s.amplitude <= 1.0))
      throw Error(ErrorCode::domain, "sine amplitude must be in [0, 1]", "sine.amplitude");
    if (!(s.phase >= 0.0 && s.phase < 1.0))
      throw Error(ErrorCode::domain, "sine phase must be in [0, 1) cycles", "sine.phase");
    wavelength(effective_rate, spec.frequency_hz);
    return warnings;
  }

  auto report = validate_breakpoints(spec.breakpoints);
  if (!report.ok())
    throw Error(ErrorCode::breakpoints, report.errors.front(), "breakpoints");

  double const limit = max_frequency(effective_rate, spec.breakpoints.size());
  if (spec.frequency_hz > limit)
    throw Error(ErrorCode::frequency,
                fmt::format("{} Hz exceeds the breakpoint limit of {} Hz ({} Hz / {} breakpoints)",
                            spec.frequency_hz, limit, effective_rate, spec.breakpoints.size()),
                "frequency_hz");
  return report.warnings;
}

double evaluate(ArtistSpec const& spec, double phase)
{
  phase -= std::floor(phase);

  if (spec.skeleton == SkeletonKind::sine) {
    double const arg = 2.0 * std::numbers::pi * (phase + spec.sine.phase);
    return std::clamp(spec.sine.amplitude * std::sin(arg), -1.0, 1.0);
  }

  auto const& bp = spec.breakpoints;
  // first breakpoint with x > phase; the one before it holds or starts the segment
  auto upper = std::upper_bound(bp.begin(), bp.end(), phase,
                                [](double p, Breakpoint const& b) { return p < b.x; });
  auto const k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(upper - bp.begin() - 1, 0));

  if (spec.skeleton == SkeletonKind::step || k + 1 >= bp.size())
    return bp[k].y;

  auto const& a = bp[k];
  auto const& b = bp[k + 1];
  double const t = (phase - a.x) / (b.x - a.x);
  return std::clamp(a.y + (b.y - a.y) * t, -1.0, 1.0);
}

double wavelength(double sample_rate, double frequency_hz)
{
  if (!std::isfinite(sample_rate) || sample_rate <= 0.0 || !std::isfinite(frequency_hz) ||
      frequency_hz <= 0.0)
    throw Error(ErrorCode::domain, "rate and frequency must be finite and > 0");
  if (frequency_hz >= sample_rate / 2.0)
    throw Error(ErrorCode::frequency,
                fmt::format("{} Hz is at or above the Nyquist frequency {} Hz", frequency_hz,
                            sample_rate / 2.0),
                "frequency_hz");
  return sample_rate / frequency_hz;
}

double max_frequency(double sample_rate, std::size_t breakpoint_count)
{
  return sample_rate / static_cast<double>(breakpoint_count);
}

namespace {

// Smallest power-of-two scale turning both values into integers below 2^62.
bool common_integer_scale(double a, double b, std::uint64_t& ia, std::uint64_t& ib)
{
  constexpr double limit = 4611686018427387904.0; // 2^62
  for (int k = 0; k <= 120; ++k) {
    double const sa = std::ldexp(a, k);
    double const sb = std::ldexp(b, k);
    if (sa >= limit || sb >= limit)
      return false;
    if (sa == std::floor(sa) && sb == std::floor(sb)) {
      ia = static_cast<std::uint64_t>(sa);
      ib = static_cast<std::uint64_t>(sb);
      return true;
    }
  }
  return false;
}

} // namespace

PhaseAccumulator::PhaseAccumulator(double frequency_hz, double sample_rate, double start_phase)
{
  assign(frequency_hz, sample_rate, start_phase);
}

PhaseAccumulator PhaseAccumulator::from_increment(double increment, double start_phase)
{
  PhaseAccumulator acc;
  acc.assign(increment, 1.0, start_phase);
  return acc;
}

void PhaseAccumulator::assign(double numerator, double denominator, double start_phase)
{
  last_num_ = numerator;
  last_den_ = denominator;
  increment_ = numerator / denominator;
  start_phase -= std::floor(start_phase);

  std::uint64_t step = 0;
  std::uint64_t den = 0;
  exact_ = numerator > 0.0 && numerator < denominator &&
           common_integer_scale(numerator, denominator, step, den);
  if (exact_) {
    auto const g = std::gcd(step, den);
    step_ = step / g;
    den_ = den / g;
    // exact when start_phase * den_ is an integer, nearest otherwise
    double const scaled = std::round(start_phase * static_cast<double>(den_));
    num_ = static_cast<std::uint64_t>(scaled) % den_;
  } else {
    phase_ = start_phase;
  }
}

double PhaseAccumulator::phase() const noexcept
{
  if (exact_)
    return static_cast<double>(num_) / static_cast<double>(den_);
  return phase_;
}

void PhaseAccumulator::retune(double frequency_hz, double sample_rate)
{
  if (frequency_hz == last_num_ && sample_rate == last_den_)
    return;
  bool const was_exact = exact_;
  std::uint64_t const old_num = num_;
  std::uint64_t const old_den = den_;
  double const ph = phase();
  assign(frequency_hz, sample_rate, ph);
  if (!was_exact || !exact_)
    return;
  // carry the old fraction over on a common denominator so no phase is lost
  auto const g = std::gcd(old_den, den_);
  auto const scale_new = old_den / g;
  if (den_ > (std::uint64_t{1} << 62) / scale_new) {
    exact_ = false;
    phase_ = ph;
    return;
  }
  auto const common = den_ * scale_new;
  num_ = old_num * (common / old_den);
  step_ *= scale_new;
  den_ = common;
}

PhaseAccumulator::Step PhaseAccumulator::advance() noexcept
{
  bool wrapped = false;
  if (exact_) {
    num_ += step_;
    if (num_ >= den_) {
      num_ -= den_;
      wrapped = true;
    }
  } else {
    phase_ += increment_;
    if (phase_ >= 1.0) {
      phase_ -= std::floor(phase_);
      wrapped = true;
    }
  }
  return {phase(), wrapped};
}

} // namespace pids
