#include <doctest.h>

#include "oracles.hpp"
#include "pids/analysis.hpp"
#include "pids/error.hpp"

#include <cmath>
#include <random>

using namespace pids;

TEST_CASE("magnitude_spectrum: DC lands in bin 0")
{
  std::vector<double> ones(4096, 1.0);
  auto const s = magnitude_spectrum(ones, 44100, 4096, Window::rectangular);
  CHECK(s.bins() == 2049);
  CHECK(s.linear_power[0] == doctest::Approx(4096.0));
  for (std::size_t k = 1; k < s.bins(); ++k)
    REQUIRE(s.linear_power[k] < 1e-18);
  CHECK(s.magnitude_db[0] == 0.0);
  CHECK(s.magnitude_db[1] == db_floor);
}

TEST_CASE("magnitude_spectrum: agrees with the direct DFT")
{
  auto const tone = oracle::sine(440, 44100, 4096);
  auto const s = magnitude_spectrum(tone, 44100, 4096);
  auto const ref = oracle::dft_power(tone, 4096, true);
  std::size_t best = 1;
  for (std::size_t k = 1; k < ref.size(); ++k) {
    REQUIRE(std::abs(s.linear_power[k] - ref[k]) <= 1e-9 * (1.0 + ref[k]));
    if (ref[k] > ref[best])
      best = k;
  }
  CHECK(best == 41);
  CHECK(peak_bin(s) == 41);
  CHECK(s.bin_hz[41] == doctest::Approx(441.43).epsilon(1e-4));
}

TEST_CASE("property: Parseval on random signals")
{
  std::mt19937_64 rng(17);
  for (std::size_t n : {std::size_t{64}, std::size_t{1024}, std::size_t{4096}}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto const x = oracle::random_signal(rng, n);
      for (auto w : {Window::hann, Window::rectangular}) {
        auto const s = magnitude_spectrum(x, 44100, n, w);
        double time_energy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double const win =
              w == Window::hann ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(n)) : 1.0;
          time_energy += (x[i] * win) * (x[i] * win);
        }
        double freq_energy = 0.0;
        for (double p : s.linear_power)
          freq_energy += p;
        CHECK(std::abs(freq_energy - time_energy) <= 1e-6 * time_energy);
      }
    }
  }
}

TEST_CASE("magnitude_spectrum: errors and zero padding")
{
  std::vector<double> empty;
  CHECK_THROWS_AS(magnitude_spectrum(empty, 44100), Error);
  std::vector<double> x(100, 0.5);
  CHECK_THROWS_AS(magnitude_spectrum(x, 44100, 1000), Error);
  CHECK(magnitude_spectrum(x, 44100, 256).bins() == 129);
}

TEST_CASE("peak_frequency")
{
  auto const tone = oracle::sine(440, 44100, 4096);
  CHECK(std::abs(peak_frequency(magnitude_spectrum(tone, 44100)) - 440.0) <= 2.0);

  Spectrum single;
  single.rate = 44100;
  single.fft_size = 4096;
  single.linear_power.assign(2049, 0.0);
  single.bin_hz.resize(2049);
  for (std::size_t k = 0; k < 2049; ++k)
    single.bin_hz[k] = k * 44100.0 / 4096.0;
  single.linear_power[41] = 1.0;
  single.magnitude_db.assign(2049, db_floor);
  single.magnitude_db[41] = 0.0;
  CHECK(peak_frequency(single) == doctest::Approx(441.43).epsilon(1e-4));

  auto tie = single;
  tie.linear_power[100] = 1.0;
  tie.magnitude_db[100] = 0.0;
  CHECK(peak_bin(tie) == 41);

  auto zero = single;
  zero.linear_power.assign(2049, 0.0);
  zero.linear_power[0] = 5.0;
  CHECK_THROWS_AS(peak_frequency(zero), Error);
}

TEST_CASE("dc_offset and rms")
{
  std::vector<double> x{0.5, 0.5, -0.5, 0.5};
  CHECK(dc_offset(x) == 0.25);
  auto const tone = oracle::sine(441, 44100, 44100);
  CHECK(std::abs(dc_offset(tone)) < 1e-9);
  CHECK(std::abs(rms(tone) - std::sqrt(0.5)) < 1e-4);
  CHECK(rms(std::vector<double>(10, 0.0)) == 0.0);
  CHECK(rms(std::vector<double>(10, -0.3)) == doctest::Approx(0.3));
}

TEST_CASE("band_energy_db")
{
  std::vector<double> ones(4096, 1.0);
  auto const dc = magnitude_spectrum(ones, 44100, 4096, Window::rectangular);
  CHECK(band_energy_db(dc, 0, 100) == doctest::Approx(0.0));
  CHECK(band_energy_db(dc, 1000, 2000) <= db_floor);
  CHECK_THROWS_AS(band_energy_db(dc, 2000, 1000), Error);

  Spectrum half = dc;
  half.linear_power.assign(half.bins(), 0.0);
  half.linear_power[10] = 1.0;
  half.linear_power[1000] = 1.0;
  CHECK(band_energy_db(half, 0, 500) == doctest::Approx(-3.0103).epsilon(1e-4));
}

TEST_CASE("spectral_distance")
{
  auto const a = magnitude_spectrum(oracle::sine(440, 44100, 4096), 44100);
  auto const b = magnitude_spectrum(oracle::sine(3000, 44100, 4096), 44100);
  CHECK(spectral_distance(a, a) == 0.0);
  CHECK(spectral_distance(a, b) == doctest::Approx(spectral_distance(b, a)));

  Spectrum x = a;
  Spectrum y = a;
  x.linear_power.assign(x.bins(), 0.0);
  y.linear_power.assign(y.bins(), 0.0);
  x.linear_power[5] = 3.0;
  y.linear_power[9] = 0.2;
  CHECK(spectral_distance(x, y) == doctest::Approx(std::sqrt(2.0)));

  auto const c = magnitude_spectrum(oracle::sine(440, 44100, 1024), 44100, 1024);
  CHECK_THROWS_AS(spectral_distance(a, c), Error);
}

TEST_CASE("energy_outside_bin and analyze")
{
  auto const tone = oracle::sine(440, 44100, 8192);
  auto const s = magnitude_spectrum(tone, 44100, 8192);
  double total = 0.0;
  for (double p : s.linear_power)
    total += p;
  CHECK(energy_outside_bin(s, 440) == doctest::Approx(total - s.linear_power[s.bin_of(440)]));

  auto const report = analyze(tone, 44100);
  CHECK(std::abs(report.peak_hz - 440) <= 2.0);
  CHECK(report.band_energies.size() == 5);
  CHECK(report.band_energies[2].name == "mid");
  CHECK(report.band_energies[2].db > -0.1);

  auto const silent = analyze(std::vector<double>(4096, 0.0), 44100);
  CHECK(silent.peak_hz == 0.0);
  CHECK(silent.rms == 0.0);
}
