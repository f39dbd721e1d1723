#include "pids/analysis.hpp"

#include "fft.hpp"
#include "pids/error.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pids {

namespace {

double to_db(double ratio)
{
  if (!(ratio > 0.0))
    return db_floor;
  return std::max(db_floor, 10.0 * std::log10(ratio));
}

void require_samples(std::span<double const> samples)
{
  if (samples.empty())
    throw Error(ErrorCode::analysis, "no samples");
}

} // namespace

std::size_t Spectrum::bin_of(double hz) const
{
  auto const k = static_cast<long long>(std::llround(hz * static_cast<double>(fft_size) / rate));
  return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(bins()) - 1));
}

Spectrum magnitude_spectrum(std::span<double const> samples, double rate, std::size_t fft_size,
                            Window window)
{
  require_samples(samples);
  if (fft_size < 2 || !std::has_single_bit(fft_size))
    throw Error(ErrorCode::analysis, fmt::format("fft size {} is not a power of two >= 2", fft_size));
  if (!(rate > 0.0))
    throw Error(ErrorCode::analysis, "sample rate must be > 0");

  auto const n = fft_size;
  std::vector<double> frame(n, 0.0);
  std::copy_n(samples.begin(), std::min(n, samples.size()), frame.begin());
  if (window == Window::hann) {
    for (std::size_t i = 0; i < n; ++i)
      frame[i] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                       static_cast<double>(n));
  }

  auto const bins = detail::real_dft(frame, n);

  Spectrum s;
  s.rate = rate;
  s.fft_size = n;
  s.bin_hz.resize(bins.size());
  s.linear_power.resize(bins.size());
  s.magnitude_db.resize(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    bool const edge = k == 0 || k == n / 2;
    s.bin_hz[k] = static_cast<double>(k) * rate / static_cast<double>(n);
    s.linear_power[k] = (edge ? 1.0 : 2.0) * std::norm(bins[k]) / static_cast<double>(n);
  }
  double const peak = *std::max_element(s.linear_power.begin(), s.linear_power.end());
  for (std::size_t k = 0; k < bins.size(); ++k)
    s.magnitude_db[k] = peak > 0.0 ? to_db(s.linear_power[k] / peak) : db_floor;
  return s;
}

std::size_t peak_bin(Spectrum const& spectrum)
{
  auto const& p = spectrum.linear_power;
  if (p.size() < 2)
    throw Error(ErrorCode::analysis, "spectrum has no bins above DC");
  std::size_t best = 1;
  for (std::size_t k = 2; k < p.size(); ++k)
    if (p[k] > p[best])
      best = k;
  if (!(p[best] > 0.0))
    throw Error(ErrorCode::analysis, "spectrum is silent above DC");
  return best;
}

double peak_frequency(Spectrum const& spectrum)
{
  auto const k = peak_bin(spectrum);
  double offset = 0.0;
  if (k + 1 < spectrum.bins()) {
    double const a = spectrum.magnitude_db[k - 1];
    double const b = spectrum.magnitude_db[k];
    double const c = spectrum.magnitude_db[k + 1];
    double const denom = a - 2.0 * b + c;
    if (denom < 0.0)
      offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  return (static_cast<double>(k) + offset) * spectrum.rate / static_cast<double>(spectrum.fft_size);
}

double dc_offset(std::span<double const> samples)
{
  require_samples(samples);
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double rms(std::span<double const> samples)
{
  require_samples(samples);
  double const sq = std::inner_product(samples.begin(), samples.end(), samples.begin(), 0.0);
  return std::sqrt(sq / static_cast<double>(samples.size()));
}

double band_energy_db(Spectrum const& spectrum, double lo_hz, double hi_hz)
{
  double const nyquist = spectrum.rate / 2.0;
  if (!(lo_hz >= 0.0) || !(hi_hz <= nyquist) || !(lo_hz < hi_hz))
    throw Error(ErrorCode::analysis,
                fmt::format("band [{}, {}] Hz must satisfy 0 <= lo < hi <= {}", lo_hz, hi_hz, nyquist));

  double in_band = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < spectrum.bins(); ++k) {
    total += spectrum.linear_power[k];
    if (spectrum.bin_hz[k] >= lo_hz && spectrum.bin_hz[k] <= hi_hz)
      in_band += spectrum.linear_power[k];
  }
  return total > 0.0 ? to_db(in_band / total) : db_floor;
}

double energy_outside_bin(Spectrum const& spectrum, double fundamental_hz)
{
  double const total = std::accumulate(spectrum.linear_power.begin(), spectrum.linear_power.end(), 0.0);
  return total - spectrum.linear_power[spectrum.bin_of(fundamental_hz)];
}

double spectral_distance(Spectrum const& a, Spectrum const& b)
{
  if (a.fft_size != b.fft_size || a.rate != b.rate || a.bins() != b.bins())
    throw Error(ErrorCode::analysis, "spectra are on different bin grids");

  auto norm = [](std::vector<double> const& p) {
    return std::sqrt(std::inner_product(p.begin(), p.end(), p.begin(), 0.0));
  };
  double const na = norm(a.linear_power);
  double const nb = norm(b.linear_power);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.bins(); ++k) {
    double const ua = na > 0.0 ? a.linear_power[k] / na : 0.0;
    double const ub = nb > 0.0 ? b.linear_power[k] / nb : 0.0;
    sum += (ua - ub) * (ua - ub);
  }
  return std::sqrt(sum);
}

AnalysisReport analyze(std::span<double const> samples, double rate, std::size_t fft_size)
{
  AnalysisReport report;
  report.dc_offset = dc_offset(samples);
  report.rms = rms(samples);

  auto const spectrum = magnitude_spectrum(samples, rate, fft_size);
  try {
    report.peak_hz = peak_frequency(spectrum);
  } catch (Error const&) {
    report.peak_hz = 0.0; // silent above DC
  }

  double const nyquist = rate / 2.0;
  struct Edge {
    char const* name;
    double lo;
    double hi;
  };
  constexpr Edge edges[] = {
      {"sub", 0.0, 20.0},         {"low", 20.0, 250.0},           {"mid", 250.0, 4000.0},
      {"high", 4000.0, 20000.0},  {"above_20k", 20000.0, 1e300},
  };
  for (auto const& e : edges) {
    double const hi = std::min(e.hi, nyquist);
    if (e.lo >= hi)
      continue;
    report.band_energies.push_back({e.name, e.lo, hi, band_energy_db(spectrum, e.lo, hi)});
  }
  return report;
}

} // namespace pids
