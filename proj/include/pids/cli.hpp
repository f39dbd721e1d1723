#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace pids::cli {

/// Stable scripting contract.
enum ExitCode : int {
  exit_ok = 0,
  exit_io = 1,
  exit_invalid = 2,
  exit_unstable = 3,
};

struct RenderOptions {
  std::filesystem::path patch;
  std::filesystem::path output;
  std::optional<int> oversample;
  std::optional<double> duration_s;
  int bit_depth = 16;
  bool fail_on_unstable = false;
};

struct AnalyzeOptions {
  std::filesystem::path wav;
  std::size_t fft_size = 4096;
  std::optional<std::filesystem::path> csv;
};

struct SweepOptions {
  std::filesystem::path patch;
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  std::filesystem::path out_dir;
  int bit_depth = 16;
};

int run_render(RenderOptions const& options, std::ostream& out, std::ostream& err);
int run_analyze(AnalyzeOptions const& options, std::ostream& out, std::ostream& err);
int run_sweep(SweepOptions const& options, std::ostream& out, std::ostream& err);
int run_validate(std::filesystem::path const& patch, std::ostream& out, std::ostream& err);
/// Writes <name>.json and <name>.wav into `dir`.
int run_demo(std::string const& name, std::filesystem::path const& dir, std::ostream& out,
             std::ostream& err);

/// Parses argv and dispatches to one of the commands above.
int main(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

} // namespace pids::cli
