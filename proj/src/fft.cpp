#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace pids::detail {

namespace {

// fftw planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex()
{
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

} // namespace

std::vector<std::complex<double>> real_dft(std::span<double const> input, std::size_t size)
{
  std::unique_ptr<double[], FftwFree> in(fftw_alloc_real(size));
  std::unique_ptr<fftw_complex[], FftwFree> out(fftw_alloc_complex(size / 2 + 1));

  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(size), in.get(), out.get(), FFTW_ESTIMATE);
  }

  auto const n = std::min(size, input.size());
  std::copy_n(input.begin(), n, in.get());
  std::fill(in.get() + n, in.get() + size, 0.0);
  fftw_execute(plan);

  std::vector<std::complex<double>> result(size / 2 + 1);
  for (std::size_t k = 0; k < result.size(); ++k)
    result[k] = {out[k][0], out[k][1]};

  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return result;
}

} // namespace pids::detail
