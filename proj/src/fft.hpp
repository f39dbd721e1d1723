#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pids::detail {

/// Real-input DFT of `input` zero-padded (or truncated) to `size` points.
/// Returns bins 0..size/2.
std::vector<std::complex<double>> real_dft(std::span<double const> input, std::size_t size);

} // namespace pids::detail
