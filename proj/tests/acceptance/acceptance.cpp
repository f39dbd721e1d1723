// One line per acceptance criterion; exit status is the number of failures.

#include "oracles.hpp"
#include "support.hpp"
#include "pids/analysis.hpp"
#include "pids/engine.hpp"
#include "pids/io.hpp"
#include "pids/pid.hpp"
#include "pids/presets.hpp"
#include "pids/resample.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace pids;
using support::step_voice;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

bool bit_equal(std::span<double const> a, std::span<double const> b)
{
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool finite_and_bounded(RenderResult const& r, double limit)
{
  for (double v : r.samples)
    if (!std::isfinite(v) || v < -1.0 || v > 1.0)
      return false;
  for (auto const& d : r.voices)
    if (!(d.max_abs_integral <= limit))
      return false;
  return true;
}

double bin_width(std::size_t n) { return 44100.0 / double(n); }

BreakpointSet random_breakpoints(std::mt19937_64& rng)
{
  std::uniform_int_distribution<int> count(2, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double> xs{0.0, 1.0};
  int const n = count(rng);
  while (static_cast<int>(xs.size()) < n)
    xs.push_back(unit(rng));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  BreakpointSet bp;
  for (double x : xs)
    bp.push_back({x, amp(rng)});
  return bp;
}

Outcome bounds_suite()
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> gain(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> skeleton(0, 2);
  std::uniform_int_distribution<int> factor(0, 3);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    int const m = 1 << factor(rng);
    auto v = step_voice(0, gain(rng), gain(rng), gain(rng));
    v.artist.skeleton = static_cast<SkeletonKind>(skeleton(rng));
    v.artist.breakpoints = random_breakpoints(rng);
    v.artist.sine = {unit(rng), unit(rng)};
    double const limit = v.artist.skeleton == SkeletonKind::sine
                             ? 0.45 * 44100.0 * m
                             : max_frequency(44100.0 * m, v.artist.breakpoints.size());
    // log-uniform between 1 Hz and the highest legal frequency
    v.artist.frequency_hz = std::exp(std::log(1.0) + unit(rng) * (std::log(0.99 * limit) - std::log(1.0)));
    v.pid.integral_limit = unit(rng) < 0.5 ? default_integral_limit : 1.0 + 10.0 * unit(rng);
    auto const p = support::patch({v}, m, 0.1);
    if (!finite_and_bounded(render_patch(p), v.pid.integral_limit))
      ++failures;
  }
  return {failures == 0, fmt::format("{} of 1000 random patches out of bounds", failures)};
}

Outcome p_fixed_point()
{
  std::string detail;
  bool pass = true;
  for (double kp : {0.1, 0.5, 1.0}) {
    PidState s;
    PidConfig const cfg{{kp, 0, 0}};
    double y = 0.0;
    for (int i = 0; i < 1000; ++i)
      y = tick(s, cfg, 0.8);
    double const target = 0.8 * kp / (1.0 + kp);
    double const err = std::abs(y - target);
    double const oracle_err = std::abs(y - oracle::p_only_recurrence(kp, 0.8, 1000));
    bool const ok = err <= 1e-6 && oracle_err == 0.0;
    pass = pass && ok;
    detail += fmt::format("kp={}: y={:.6g} target={:.6g}{}; ", kp, y, target, ok ? "" : " FAIL");
  }
  return {pass, detail};
}

Outcome p_monotonicity()
{
  std::vector<double> values;
  for (int i = 1; i <= 10; ++i)
    values.push_back(rms(render_patch(support::patch({step_voice(440, i / 10.0)})).samples));
  bool pass = true;
  for (std::size_t i = 1; i < values.size(); ++i)
    pass = pass && values[i] > values[i - 1];
  return {pass, fmt::format("rms kp=0.1 {:.4f} .. kp=1.0 {:.4f}", values.front(), values.back())};
}

Outcome i_peak_monotonicity()
{
  std::vector<double> peaks;
  std::string detail = "peaks";
  for (int i = 1; i <= 6; ++i) {
    auto const r = render_patch(support::patch({step_voice(440, 0, i / 10.0, 0)}));
    peaks.push_back(peak_frequency(magnitude_spectrum(r.samples, 44100, 4096)));
    detail += fmt::format(" {:.1f}", peaks.back());
  }
  bool pass = true;
  for (std::size_t i = 1; i < peaks.size(); ++i)
    pass = pass && peaks[i] >= peaks[i - 1] - bin_width(4096);
  return {pass, detail + " Hz"};
}

Outcome windup_limiting()
{
  auto p = support::patch({step_voice(440, 0.6, 0.3)});
  auto const wide = render_patch(p);
  p.voices[0].pid.integral_limit = 1.0;
  auto const narrow = render_patch(p);
  double diff = 0.0;
  for (std::size_t i = 0; i < wide.samples.size(); ++i)
    diff = std::max(diff, std::abs(wide.samples[i] - narrow.samples[i]));
  bool const bounded = finite_and_bounded(wide, 5000.0) && finite_and_bounded(narrow, 1.0);
  return {diff > 0.1 && bounded, fmt::format("max |L=5000 - L=1| = {:.4f}, bounded={}", diff, bounded)};
}

Outcome antialiasing()
{
  bool pass = true;
  std::string detail;
  for (int m : {2, 4, 8}) {
    auto const& k = antialias_kernel(44100, OversampleFactor(m));
    double const atten = measured_stopband_attenuation_db(k, 22050.0, 44100.0 * m);
    auto const r = render_patch(support::patch({step_voice(440, 1.0)}, m));
    auto const s = magnitude_spectrum(r.samples, 44100, 8192);
    double const above = band_energy_db(s, 20000.0, 22050.0);
    bool const ok = atten >= 80.0 && above <= -60.0;
    pass = pass && ok;
    detail += fmt::format("m={}: stopband {:.1f} dB, >20 kHz {:.1f} dB; ", m, atten, above);
  }
  return {pass, detail};
}

Outcome polyphase_equivalence()
{
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> length(1, 4000);
  int mismatches = 0;
  for (int m : {2, 4, 8}) {
    auto const& k = antialias_kernel(44100, OversampleFactor(m));
    for (int i = 0; i < 100; ++i) {
      auto const x = oracle::random_signal(rng, length(rng));
      auto const fast = decimate_filtered(x, k, OversampleFactor(m));
      auto const naive = oracle::naive_filter_then_drop(x, k.coefficients, std::size_t(m));
      if (!bit_equal(fast, naive))
        ++mismatches;
    }
  }
  return {mismatches == 0, fmt::format("{} of 300 signals differ", mismatches)};
}

Outcome frequency_tracking()
{
  bool pass = true;
  std::string detail;
  for (double f : {110.0, 220.0, 440.0}) {
    auto const r = render_patch(support::patch({step_voice(f, 1.0)}));
    double const peak = peak_frequency(magnitude_spectrum(r.samples, 44100, 4096));
    bool const ok = std::abs(peak - f) <= bin_width(4096);
    pass = pass && ok;
    detail += fmt::format("{} Hz -> {:.2f} Hz; ", f, peak);
  }
  return {pass, detail};
}

Outcome additive_linearity()
{
  auto const& p = find_preset("fig18-additive")->patch;
  auto const r = render_patch(p);
  std::vector<std::vector<double>> solo;
  std::vector<double> weights;
  for (auto const& v : p.voices) {
    solo.push_back(render_voice(v, p.factor_for(v), p.duration_s, p.sample_rate).samples);
    weights.push_back(v.mix_weight);
  }
  double const total = weights[0] + weights[1];
  std::vector<double> expected(solo[0].size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < solo.size(); ++k)
      acc += weights[k] / total * solo[k][i];
    expected[i] = std::clamp(acc * p.master_gain, -1.0, 1.0);
  }
  auto const unclamped = weighted_sum(solo, weights);
  bool const pre_clamp = bit_equal(unclamped, [&] {
    std::vector<double> e(solo[0].size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < solo.size(); ++k)
        acc += weights[k] / total * solo[k][i];
      e[i] = acc;
    }
    return e;
  }());
  bool const mixed = bit_equal(r.samples, expected);
  return {pre_clamp && mixed, fmt::format("pre-clamp sum exact={}, patch render exact={}", pre_clamp, mixed)};
}

Outcome lfo_periodicity()
{
  struct Case {
    SkeletonKind kind;
    PidGains gains;
  };
  std::vector<Case> const cases{
      {SkeletonKind::linear, {0.5, 0.0, 0.0}}, {SkeletonKind::step, {1.0, 0.0, 0.0}},
      {SkeletonKind::sine, {0.6, 0.3, 0.0}},   {SkeletonKind::linear, {0.2, 0.05, 0.1}},
  };
  double worst = 0.0;
  for (auto const& c : cases) {
    auto v = support::voice(c.kind, 2.0, c.gains.kp, c.gains.ki, c.gains.kd);
    auto const r = render_patch(support::patch({v}, 1, 1.5));
    for (std::size_t i = 22050; i < 44100; ++i)
      worst = std::max(worst, std::abs(r.samples[i] - r.samples[i + 22050]));
  }
  return {worst <= 1e-6, fmt::format("max |period 2 - period 3| = {:.3g} over {} gain sets", worst, cases.size())};
}

Outcome instability()
{
  // the flagged oscillation lives at the tick rate, so the loop is re-run
  // independently here to inspect the raw PID stream around the flag
  auto const& preset = find_preset("fig25-unstable")->patch;
  auto const wild = render_patch(preset);
  auto const& d = wild.voices[0];
  bool const early = d.unstable && d.unstable_at_tick < 4096;

  auto const& voice = preset.voices[0];
  auto const m = preset.factor_for(voice).value();
  auto const rate = static_cast<std::int64_t>(preset.sample_rate) * m;
  auto const f = static_cast<std::int64_t>(voice.artist.frequency_hz);
  PidState state;
  std::vector<double> raw;
  for (std::int64_t i = 0; i < 4096; ++i)
    raw.push_back(tick(state, voice.pid, evaluate(voice.artist, oracle::rational_phase(f, rate, i))));
  bool alternates = false;
  std::size_t first_run_end = 0;
  for (std::size_t end = 64; end < raw.size() && !alternates; ++end) {
    bool ok = true;
    for (std::size_t k = end - 63; k <= end && ok; ++k) {
      double const a = raw[k] - raw[k - 1];
      double const b = k >= 2 ? raw[k - 1] - raw[k - 2] : 0.0;
      ok = std::abs(a) >= 0.5 && (k == end - 63 || a * b < 0.0);
    }
    if (ok) {
      alternates = true;
      first_run_end = end;
    }
  }
  bool const agrees = alternates && first_run_end == d.unstable_at_tick;

  auto const calm1 = render_patch(support::patch({step_voice(440, 0.5)}, 1, 1.0));
  auto const calm4 = render_patch(support::patch({step_voice(440, 0.5)}, 4, 1.0));
  bool const calm = !calm1.unstable && !calm4.unstable;
  return {early && agrees && calm,
          fmt::format("(50,10,0) at m={} fires at tick {}, raw stream alternates from tick {}; (0.5,0,0) quiet={}",
                      m, d.unstable_at_tick, first_run_end, calm)};
}

Outcome wavetable_sweep()
{
  auto p = support::patch({step_voice(440, 0.0)});
  p.automations.push_back(support::envelope(0, "kp", {{0.0, 0.0}, {1.0, 1.0}}));
  auto const r = render_patch(p);
  std::span<double const> all(r.samples);
  auto const first = magnitude_spectrum(all.first(4410), 44100, 4096);
  auto const last = magnitude_spectrum(all.last(4410), 44100, 4096);
  double const distance = spectral_distance(first, last);
  double const p1 = peak_frequency(first);
  double const p2 = peak_frequency(last);
  bool const peaks = std::abs(p1 - 440) <= bin_width(4096) && std::abs(p2 - 440) <= bin_width(4096);
  bool finite = true;
  for (double v : r.samples)
    finite = finite && std::isfinite(v) && std::abs(v) <= 1.0;
  return {distance > 0.1 && peaks && finite,
          fmt::format("distance {:.4f} (need > 0.1), peaks {:.1f} / {:.1f} Hz", distance, p1, p2)};
}

Outcome pi_sidebands()
{
  std::vector<double> outside;
  std::string detail = "outside-bin energy";
  for (double ki : {0.0, 0.2, 0.4, 0.6}) {
    auto const r = render_patch(support::patch({step_voice(440, 0.6, ki)}));
    // steady-state frame, after the integrator transient
    std::span<double const> tail(r.samples.data() + 22050, 8192);
    auto const s = magnitude_spectrum(tail, 44100, 8192);
    outside.push_back(energy_outside_bin(s, 440));
    detail += fmt::format(" {:.2f}", outside.back());
  }
  bool pass = true;
  for (std::size_t i = 1; i < outside.size(); ++i)
    pass = pass && outside[i] >= outside[i - 1];
  return {pass, detail};
}

Outcome dc_reporting()
{
  auto asym = step_voice(440, 1.0);
  asym.artist.breakpoints = {{0, 0}, {0.5, 1}, {1, 0}};
  double const a = render_patch(support::patch({asym})).dc_offset;
  double const s = render_patch(support::patch({step_voice(440, 1.0)})).dc_offset;
  return {std::abs(a) > 0.1 && std::abs(s) < 0.05, fmt::format("asymmetric {:.4f}, reference set {:.4f}", a, s)};
}

Outcome round_trips()
{
  auto const& p = find_preset("fig16")->patch;
  auto const r = render_patch(p);
  std::vector<double> as_float(r.samples.size());
  for (std::size_t i = 0; i < as_float.size(); ++i)
    as_float[i] = static_cast<float>(r.samples[i]);
  auto const wav = decode_wav(encode_wav(r.samples, {44100, BitDepth::float32}));
  bool const wav_ok = bit_equal(wav.samples, as_float) &&
                      bit_equal(decode_wav(encode_wav(wav.samples, wav.format)).samples, wav.samples);
  bool patch_ok = true;
  for (auto const& preset : presets())
    patch_ok = patch_ok && parse_patch(serialize_patch(preset.patch)) == preset.patch;
  bool const render_ok = bit_equal(render_patch(p).samples, r.samples);
  return {wav_ok && patch_ok && render_ok,
          fmt::format("wav={}, patch={}, render={}", wav_ok, patch_ok, render_ok)};
}

Outcome performance()
{
  auto const p = support::patch({step_voice(440, 0.6, 0.3)}, 8, 1.0);
  auto const t0 = std::chrono::steady_clock::now();
  auto const r = render_patch(p);
  auto const t1 = std::chrono::steady_clock::now();
  double const seconds = std::chrono::duration<double>(t1 - t0).count();
  return {seconds < 1.0 && r.samples.size() == 44100, fmt::format("{:.3f} s (cold kernel cache)", seconds)};
}

} // namespace

int main()
{
  struct Criterion {
    char const* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> const criteria{
      {"bounds suite", bounds_suite},
      {"P fixed point", p_fixed_point},
      {"P monotonicity", p_monotonicity},
      {"I peak-frequency monotonicity", i_peak_monotonicity},
      {"windup limiting", windup_limiting},
      {"anti-aliasing", antialiasing},
      {"polyphase equivalence", polyphase_equivalence},
      {"frequency tracking", frequency_tracking},
      {"additive linearity", additive_linearity},
      {"LFO periodicity", lfo_periodicity},
      {"instability", instability},
      {"wavetable sweep", wavetable_sweep},
      {"PI sidebands", pi_sidebands},
      {"DC reporting", dc_reporting},
      {"round-trips", round_trips},
      {"performance", performance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (std::exception const& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    fmt::print("[{}] C{:02} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
