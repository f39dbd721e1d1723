#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pids {

enum class Window { hann, rectangular };

inline constexpr std::size_t default_fft_size = 4096;
/// Lower bound for every reported dB figure.
inline constexpr double db_floor = -300.0;

/// One-sided spectrum of N/2 + 1 bins. linear_power is scaled so that its
/// sum equals the energy of the windowed frame (Parseval); magnitude_db is
/// relative to the strongest bin.
struct Spectrum {
  double rate = 0.0;
  std::size_t fft_size = 0;
  std::vector<double> bin_hz;
  std::vector<double> magnitude_db;
  std::vector<double> linear_power;

  std::size_t bins() const noexcept { return linear_power.size(); }
  /// Index of the bin whose centre is nearest `hz`.
  std::size_t bin_of(double hz) const;
};

/// Throws Error{analysis} for empty input or an fft_size that is not a
/// power of two. Uses the first fft_size samples, zero-padded if shorter.
Spectrum magnitude_spectrum(std::span<double const> samples, double rate,
                            std::size_t fft_size = default_fft_size, Window window = Window::hann);

/// Strongest bin above DC (ties go to the lower bin), refined by a parabola
/// through the log magnitudes of it and its neighbours.
/// Throws Error{analysis} if every bin above DC is zero.
double peak_frequency(Spectrum const& spectrum);

/// Strongest bin above DC, unrefined.
std::size_t peak_bin(Spectrum const& spectrum);

double dc_offset(std::span<double const> samples);
double rms(std::span<double const> samples);

/// 10*log10(power in [lo, hi] / total power), floored at db_floor.
double band_energy_db(Spectrum const& spectrum, double lo_hz, double hi_hz);

/// Power outside the single bin nearest `fundamental_hz`, in linear units.
double energy_outside_bin(Spectrum const& spectrum, double fundamental_hz);

/// Euclidean distance between the two power spectra after scaling each to
/// unit length. Throws Error{analysis} when the bin grids differ.
double spectral_distance(Spectrum const& a, Spectrum const& b);

struct BandEnergy {
  std::string name;
  double lo_hz;
  double hi_hz;
  double db;
};

struct AnalysisReport {
  double peak_hz = 0.0;
  double dc_offset = 0.0;
  double rms = 0.0;
  std::vector<BandEnergy> band_energies;
};

AnalysisReport analyze(std::span<double const> samples, double rate,
                       std::size_t fft_size = default_fft_size);

} // namespace pids
