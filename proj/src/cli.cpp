#include "pids/cli.hpp"

#include "pids/analysis.hpp"
#include "pids/error.hpp"
#include "pids/io.hpp"
#include "pids/presets.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cmath>
#include <functional>
#include <sstream>

namespace pids::cli {

namespace {

int exit_code_for(ErrorCode code)
{
  return code == ErrorCode::io ? exit_io : exit_invalid;
}

// Runs `body`, turning library errors into exit codes and messages.
int guarded(std::ostream& err, std::function<int()> const& body)
{
  try {
    return body();
  } catch (Error const& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (std::exception const& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  }
}

WavFormat wav_format(double sample_rate, int bit_depth)
{
  if (bit_depth != 16 && bit_depth != 32)
    throw Error(ErrorCode::configuration, "bit depth must be 16 or 32", "--bit-depth");
  if (sample_rate != std::floor(sample_rate) || sample_rate < 1.0 || sample_rate > 4294967295.0)
    throw Error(ErrorCode::patch_semantic, "WAV output needs an integer sample rate", "sample_rate");
  return {static_cast<std::uint32_t>(sample_rate),
          bit_depth == 16 ? BitDepth::pcm16 : BitDepth::float32};
}

void print_render_summary(std::ostream& out, Patch const& patch, RenderResult const& result)
{
  auto const report = analyze(result.samples, patch.sample_rate);
  out << fmt::format("duration={:.3f}s rms={:.6f} dc={:.6f} peak={:.2f}Hz clips={} unstable={}\n",
                     static_cast<double>(result.samples.size()) / patch.sample_rate, report.rms,
                     result.dc_offset, report.peak_hz, result.clip_count,
                     result.unstable ? "yes" : "no");
}

void set_swept(Patch& patch, std::string const& param, double value)
{
  for (auto& voice : patch.voices) {
    if (param == "kp")
      voice.pid.gains.kp = value;
    else if (param == "ki")
      voice.pid.gains.ki = value;
    else if (param == "kd")
      voice.pid.gains.kd = value;
    else
      voice.artist.frequency_hz = value;
  }
}

} // namespace

int run_render(RenderOptions const& options, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    Patch patch = load_patch(options.patch);
    if (options.oversample) {
      patch.oversample = OversampleFactor(*options.oversample);
      for (auto& v : patch.voices)
        v.oversample.reset();
    }
    if (options.duration_s)
      patch.duration_s = *options.duration_s;
    auto const format = wav_format(patch.sample_rate, options.bit_depth);

    auto const result = render_patch(patch);
    for (auto const& w : result.warnings)
      err << "warning: " << w << '\n';
    write_wav(options.output, result.samples, format);
    print_render_summary(out, patch, result);

    if (result.unstable && options.fail_on_unstable) {
      err << "error: render is unstable\n";
      return static_cast<int>(exit_unstable);
    }
    return static_cast<int>(exit_ok);
  });
}

int run_analyze(AnalyzeOptions const& options, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    auto const wav = read_wav(options.wav);
    if (wav.samples.empty())
      throw Error(ErrorCode::format, "file has no samples");
    double const rate = wav.format.sample_rate;
    auto const report = analyze(wav.samples, rate, options.fft_size);

    out << fmt::format("samples={} rate={} peak={:.2f}Hz dc={:.6f} rms={:.6f}\n", wav.samples.size(),
                       wav.format.sample_rate, report.peak_hz, report.dc_offset, report.rms);
    for (auto const& band : report.band_energies)
      out << fmt::format("  {:<10} {:>8.0f}-{:<8.0f} Hz {:8.2f} dB\n", band.name, band.lo_hz,
                         band.hi_hz, band.db);

    if (options.csv) {
      auto const spectrum = magnitude_spectrum(wav.samples, rate, options.fft_size);
      CsvTable table{{"bin", "frequency_hz", "magnitude_db", "linear_power"}, {}};
      for (std::size_t k = 0; k < spectrum.bins(); ++k)
        table.rows.push_back({std::to_string(k),
                              {spectrum.bin_hz[k], spectrum.magnitude_db[k], spectrum.linear_power[k]}});
      write_csv(*options.csv, table);
    }
    return static_cast<int>(exit_ok);
  });
}

int run_sweep(SweepOptions const& options, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    auto const& param = options.param;
    if (param != "kp" && param != "ki" && param != "kd" && param != "frequency_hz")
      throw Error(ErrorCode::configuration, "must be one of kp, ki, kd, frequency_hz", "--param");
    if (options.steps < 1)
      throw Error(ErrorCode::configuration, "must be at least 1", "--steps");
    if (!std::isfinite(options.from) || !std::isfinite(options.to))
      throw Error(ErrorCode::configuration, "range must be finite", "--from/--to");

    Patch const base = load_patch(options.patch);
    auto const format = wav_format(base.sample_rate, options.bit_depth);

    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec)
      throw Error(ErrorCode::io, fmt::format("cannot create {}: {}", options.out_dir.string(), ec.message()));

    CsvTable table{{"file", param, "rms", "peak_hz", "dc_offset", "out_of_band_db", "unstable"}, {}};
    for (int i = 0; i < options.steps; ++i) {
      double const value = options.steps == 1
                               ? options.from
                               : options.from + (options.to - options.from) * i / (options.steps - 1);
      Patch patch = base;
      set_swept(patch, param, value);
      auto const result = render_patch(patch);

      auto const name = fmt::format("sweep_{}_{:03}.wav", param, i);
      write_wav(options.out_dir / name, result.samples, format);

      auto const report = analyze(result.samples, patch.sample_rate);
      auto const wide = magnitude_spectrum(result.samples, patch.sample_rate, 8192);
      double const nyquist = patch.sample_rate / 2.0;
      double const out_of_band =
          nyquist > default_cutoff_hz ? band_energy_db(wide, default_cutoff_hz, nyquist) : db_floor;
      table.rows.push_back({name,
                            {value, report.rms, report.peak_hz, result.dc_offset, out_of_band,
                             result.unstable ? 1.0 : 0.0}});
      out << fmt::format("{} = {}: rms={:.6f} peak={:.2f}Hz{}\n", param, format_number(value),
                         report.rms, report.peak_hz, result.unstable ? " (unstable)" : "");
    }
    write_csv(options.out_dir / "summary.csv", table);
    return static_cast<int>(exit_ok);
  });
}

int run_validate(std::filesystem::path const& patch_path, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    auto const patch = load_patch(patch_path);
    auto const warnings = validate_patch(patch);
    for (auto const& w : warnings)
      out << "warning: " << w << '\n';
    out << fmt::format("ok: {} voice(s), {} automation(s), {} samples at {} Hz\n", patch.voices.size(),
                       patch.automations.size(), patch.output_length(), patch.sample_rate);
    return static_cast<int>(exit_ok);
  });
}

int run_demo(std::string const& name, std::filesystem::path const& dir, std::ostream& out,
             std::ostream& err)
{
  auto const* preset = find_preset(name);
  if (!preset) {
    err << fmt::format("error: unknown demo '{}'. Available:\n", name);
    for (auto const& p : presets())
      err << fmt::format("  {:<24} {}\n", p.name, p.description);
    return exit_invalid;
  }
  return guarded(err, [&] {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw Error(ErrorCode::io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    auto const patch_path = dir / (name + ".json");
    auto const wav_path = dir / (name + ".wav");
    save_patch(patch_path, preset->patch);
    auto const result = render_patch(preset->patch);
    write_wav(wav_path, result.samples, wav_format(preset->patch.sample_rate, 16));
    out << fmt::format("{}: {}\n  wrote {} and {}\n  ", name, preset->description,
                       patch_path.string(), wav_path.string());
    print_render_summary(out, preset->patch, result);
    return static_cast<int>(exit_ok);
  });
}

int main(int argc, char const* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Offline PID-feedback synthesizer: render, analyze, sweep, validate, demo"};
  app.require_subcommand(1);

  RenderOptions render;
  auto* render_cmd = app.add_subcommand("render", "render a patch to WAV");
  render_cmd->add_option("patch", render.patch, "patch file (JSON)")->required();
  render_cmd->add_option("-o,--output", render.output, "output WAV")->required();
  render_cmd->add_option("--oversample", render.oversample, "override oversampling factor (1|2|4|8)");
  render_cmd->add_option("--duration", render.duration_s, "override duration in seconds");
  render_cmd->add_option("--bit-depth", render.bit_depth, "16 (PCM) or 32 (float)");
  render_cmd->add_flag("--fail-on-unstable", render.fail_on_unstable, "exit 3 if instability is detected");

  AnalyzeOptions analyze_opts;
  auto* analyze_cmd = app.add_subcommand("analyze", "spectral report for a WAV file");
  analyze_cmd->add_option("wav", analyze_opts.wav, "input WAV")->required();
  analyze_cmd->add_option("--fft-size", analyze_opts.fft_size, "FFT size (power of two)");
  analyze_cmd->add_option("--csv", analyze_opts.csv, "write the spectrum as CSV");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "render one WAV per parameter value plus summary.csv");
  sweep_cmd->add_option("patch", sweep.patch, "patch file (JSON)")->required();
  sweep_cmd->add_option("--param", sweep.param, "kp | ki | kd | frequency_hz")->required();
  sweep_cmd->add_option("--from", sweep.from, "first value")->required();
  sweep_cmd->add_option("--to", sweep.to, "last value")->required();
  sweep_cmd->add_option("--steps", sweep.steps, "number of values")->required();
  sweep_cmd->add_option("-o,--output", sweep.out_dir, "output directory")->required();
  sweep_cmd->add_option("--bit-depth", sweep.bit_depth, "16 (PCM) or 32 (float)");

  std::filesystem::path validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a patch file");
  validate_cmd->add_option("patch", validate_path, "patch file (JSON)")->required();

  std::string demo_name;
  std::filesystem::path demo_dir = ".";
  auto* demo_cmd = app.add_subcommand("demo", "write a named preset patch and its rendering");
  demo_cmd->add_option("name", demo_name, "preset name")->required();
  demo_cmd->add_option("-d,--dir", demo_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_invalid;
  }

  if (render_cmd->parsed())
    return run_render(render, out, err);
  if (analyze_cmd->parsed())
    return run_analyze(analyze_opts, out, err);
  if (sweep_cmd->parsed())
    return run_sweep(sweep, out, err);
  if (validate_cmd->parsed())
    return run_validate(validate_path, out, err);
  return run_demo(demo_name, demo_dir, out, err);
}

} // namespace pids::cli
