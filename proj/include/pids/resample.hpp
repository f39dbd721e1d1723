#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pids {

/// Oversampling factor m in {1, 2, 4, 8}; 1 bypasses anti-aliasing.
class OversampleFactor {
public:
  constexpr OversampleFactor() = default;
  /// Throws Error{configuration} for anything other than 1, 2, 4 or 8.
  explicit OversampleFactor(int m);

  constexpr int value() const noexcept { return m_; }
  constexpr bool bypass() const noexcept { return m_ == 1; }

  bool operator==(OversampleFactor const&) const = default;

private:
  int m_ = 1;
};

inline constexpr double default_cutoff_hz = 20000.0;
inline constexpr double default_attenuation_db = 80.0;

struct FirSpec {
  double cutoff_hz = default_cutoff_hz;
  double stopband_edge_hz = 22050.0;
  double stopband_attenuation_db = default_attenuation_db;

  /// Default spec with the stopband starting at the playback Nyquist.
  static FirSpec for_playback(double playback_rate);

  bool operator==(FirSpec const&) const = default;
};

struct FirKernel {
  std::vector<double> coefficients;
  double beta = 0.0;

  std::size_t taps() const noexcept { return coefficients.size(); }
  std::size_t group_delay() const noexcept { return (coefficients.size() - 1) / 2; }
};

/// Kaiser window shape parameter for a stopband attenuation in dB.
double kaiser_beta(double attenuation_db);

/// Kaiser's tap-count estimate (A - 7.95) / (14.36 * df), rounded up to odd.
std::size_t estimate_taps(double attenuation_db, double transition_hz, double rate);

/// Kaiser-windowed sinc low-pass centred between cutoff and stopband edge,
/// normalized to unity DC gain. Starts from the tap estimate and adds taps
/// in pairs until the measured stopband attenuation meets the spec.
/// Throws Error{filter_design} for an empty or inverted transition band.
FirKernel design_lowpass(FirSpec const& spec, double oversampled_rate);

/// Worst-case attenuation (positive dB) of the kernel over
/// [stopband_hz, rate/2], evaluated on a zero-padded DFT of `grid_points`
/// bins across the full rate.
double measured_stopband_attenuation_db(FirKernel const& kernel, double stopband_hz, double rate,
                                        std::size_t grid_points = 1 << 16);

/// Linear convolution with the group delay removed: same length as the
/// input, zero-padded at both edges, no net delay.
std::vector<double> convolve(std::span<double const> signal, FirKernel const& kernel);

/// Keeps samples 0, m, 2m, ...
std::vector<double> decimate(std::span<double const> signal, OversampleFactor m);

/// decimate(convolve(signal, kernel), m) computed directly, evaluating the
/// filter only at the retained output positions. Bit-identical to the
/// two-step path.
std::vector<double> decimate_filtered(std::span<double const> signal, FirKernel const& kernel,
                                      OversampleFactor m);

/// Kernel for the default spec at (playback_rate, m), designed once per
/// pair and shared afterwards.
FirKernel const& antialias_kernel(double playback_rate, OversampleFactor m);

/// Filters a signal rendered at m * playback_rate and returns it at the
/// playback rate. m = 1 returns the input unchanged.
std::vector<double> antialias(std::span<double const> signal, OversampleFactor m,
                              double playback_rate);

} // namespace pids
