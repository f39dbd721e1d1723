#include "pids/resample.hpp"

#include "fft.hpp"
#include "pids/error.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

namespace pids {

OversampleFactor::OversampleFactor(int m) : m_(m)
{
  if (m != 1 && m != 2 && m != 4 && m != 8)
    throw Error(ErrorCode::configuration, fmt::format("oversampling factor {} not in {{1, 2, 4, 8}}", m),
                "oversample");
}

FirSpec FirSpec::for_playback(double playback_rate)
{
  FirSpec spec;
  spec.stopband_edge_hz = playback_rate / 2.0;
  // low playback rates leave no room above 20 kHz; keep a 10% transition band
  if (spec.cutoff_hz >= spec.stopband_edge_hz)
    spec.cutoff_hz = 0.9 * spec.stopband_edge_hz;
  return spec;
}

double kaiser_beta(double attenuation_db)
{
  double const a = attenuation_db;
  if (a > 50.0)
    return 0.1102 * (a - 8.7);
  if (a >= 21.0)
    return 0.5842 * std::pow(a - 21.0, 0.4) + 0.07886 * (a - 21.0);
  return 0.0;
}

std::size_t estimate_taps(double attenuation_db, double transition_hz, double rate)
{
  double const df = transition_hz / rate;
  auto n = static_cast<std::size_t>(std::ceil((attenuation_db - 7.95) / (14.36 * df)));
  n = std::max<std::size_t>(n, 1);
  return n % 2 == 0 ? n + 1 : n;
}

namespace {

std::vector<double> windowed_sinc(std::size_t taps, double centre_norm, double beta)
{
  std::vector<double> h(taps);
  double const mid = static_cast<double>(taps - 1) / 2.0;
  double const i0_beta = std::cyl_bessel_i(0.0, beta);
  for (std::size_t k = 0; k < taps; ++k) {
    double const n = static_cast<double>(k) - mid;
    double const arg = 2.0 * centre_norm * n;
    double const sinc = n == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    double const r = mid > 0.0 ? n / mid : 0.0;
    double const window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[k] = 2.0 * centre_norm * sinc * window;
  }
  for (std::size_t k = 0; k < taps / 2; ++k)
    h[taps - 1 - k] = h[k];
  double sum = 0.0;
  for (double c : h)
    sum += c;
  for (auto& c : h)
    c /= sum;
  return h;
}

constexpr std::size_t max_taps = 1 << 15;

} // namespace

FirKernel design_lowpass(FirSpec const& spec, double oversampled_rate)
{
  double const nyquist = oversampled_rate / 2.0;
  double const transition = spec.stopband_edge_hz - spec.cutoff_hz;
  if (!(spec.cutoff_hz > 0.0) || !(transition > 0.0))
    throw Error(ErrorCode::filter_design, "transition band must have positive width");
  if (!(spec.stopband_edge_hz < nyquist))
    throw Error(ErrorCode::filter_design,
                fmt::format("stopband edge {} Hz must lie below the oversampled Nyquist {} Hz",
                            spec.stopband_edge_hz, nyquist));
  if (!(spec.stopband_attenuation_db >= 40.0))
    throw Error(ErrorCode::filter_design, "stopband attenuation must be at least 40 dB");

  FirKernel kernel;
  kernel.beta = kaiser_beta(spec.stopband_attenuation_db);
  double const centre = (spec.cutoff_hz + spec.stopband_edge_hz) / 2.0 / oversampled_rate;

  for (auto taps = estimate_taps(spec.stopband_attenuation_db, transition, oversampled_rate);
       taps <= max_taps; taps += 2) {
    kernel.coefficients = windowed_sinc(taps, centre, kernel.beta);
    if (measured_stopband_attenuation_db(kernel, spec.stopband_edge_hz, oversampled_rate) >=
        spec.stopband_attenuation_db)
      return kernel;
  }
  throw Error(ErrorCode::filter_design,
              fmt::format("no kernel up to {} taps reaches {} dB", max_taps,
                          spec.stopband_attenuation_db));
}

double measured_stopband_attenuation_db(FirKernel const& kernel, double stopband_hz, double rate,
                                        std::size_t grid_points)
{
  auto size = std::max<std::size_t>(grid_points, 1);
  while (size < kernel.taps())
    size *= 2;
  auto const response = detail::real_dft(kernel.coefficients, size);

  double const dc = std::abs(response.front());
  double worst = 0.0;
  for (std::size_t k = 0; k < response.size(); ++k) {
    double const f = static_cast<double>(k) * rate / static_cast<double>(size);
    if (f >= stopband_hz)
      worst = std::max(worst, std::abs(response[k]));
  }
  if (worst == 0.0)
    return 300.0;
  return -20.0 * std::log10(worst / dc);
}

std::vector<double> convolve(std::span<double const> signal, FirKernel const& kernel)
{
  auto const& h = kernel.coefficients;
  auto const len = static_cast<std::ptrdiff_t>(signal.size());
  auto const taps = static_cast<std::ptrdiff_t>(h.size());
  auto const delay = static_cast<std::ptrdiff_t>(kernel.group_delay());

  std::vector<double> out(signal.size());
  for (std::ptrdiff_t n = 0; n < len; ++n) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < taps; ++k) {
      auto const i = n + delay - k;
      if (i >= 0 && i < len)
        acc += h[static_cast<std::size_t>(k)] * signal[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

std::vector<double> decimate(std::span<double const> signal, OversampleFactor m)
{
  auto const step = static_cast<std::size_t>(m.value());
  std::vector<double> out;
  out.reserve((signal.size() + step - 1) / step);
  for (std::size_t i = 0; i < signal.size(); i += step)
    out.push_back(signal[i]);
  return out;
}

std::vector<double> decimate_filtered(std::span<double const> signal, FirKernel const& kernel,
                                      OversampleFactor m)
{
  auto const step = static_cast<std::ptrdiff_t>(m.value());
  auto const len = static_cast<std::ptrdiff_t>(signal.size());
  auto const taps = static_cast<std::ptrdiff_t>(kernel.taps());
  auto const delay = static_cast<std::ptrdiff_t>(kernel.group_delay());
  double const* h = kernel.coefficients.data();
  double const* x = signal.data();

  std::vector<double> out(static_cast<std::size_t>((len + step - 1) / step));
  for (std::size_t j = 0; j < out.size(); ++j) {
    auto const centre = static_cast<std::ptrdiff_t>(j) * step + delay;
    // taps whose input index centre - k falls inside [0, len)
    auto const k_first = std::max<std::ptrdiff_t>(0, centre - (len - 1));
    auto const k_last = std::min<std::ptrdiff_t>(taps - 1, centre);
    double acc = 0.0;
    double const* xp = x + (centre - k_first);
    for (auto k = k_first; k <= k_last; ++k, --xp)
      acc += h[k] * *xp;
    out[j] = acc;
  }
  return out;
}

FirKernel const& antialias_kernel(double playback_rate, OversampleFactor m)
{
  static std::mutex mutex;
  static std::map<std::pair<double, int>, std::unique_ptr<FirKernel const>> cache;

  std::lock_guard lock(mutex);
  auto& slot = cache[{playback_rate, m.value()}];
  if (!slot)
    slot = std::make_unique<FirKernel const>(
        design_lowpass(FirSpec::for_playback(playback_rate), playback_rate * m.value()));
  return *slot;
}

std::vector<double> antialias(std::span<double const> signal, OversampleFactor m,
                              double playback_rate)
{
  if (m.bypass())
    return {signal.begin(), signal.end()};
  return decimate_filtered(signal, antialias_kernel(playback_rate, m), m);
}

} // namespace pids
