#pragma once

#include "pids/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pids {

enum class BitDepth { pcm16, float32 };

/// Mono only.
struct WavFormat {
  std::uint32_t sample_rate = 44100;
  BitDepth bit_depth = BitDepth::pcm16;

  bool operator==(WavFormat const&) const = default;
};

struct WavData {
  std::vector<double> samples;
  WavFormat format;
};

inline constexpr double pcm16_scale = 32767.0;

/// Canonical 44-byte-header RIFF/WAVE image. 16-bit samples are scaled by
/// 32767 and rounded half away from zero (never -32768); 32-bit samples are
/// stored as IEEE floats. Throws Error{domain} for non-finite samples.
std::vector<std::uint8_t> encode_wav(std::span<double const> samples, WavFormat format);

/// Accepts PCM16 (format 1) and float32 (format 3) mono files, skipping
/// unknown chunks. Throws Error{format} for anything else.
WavData decode_wav(std::span<std::uint8_t const> bytes);

void write_wav(std::filesystem::path const& path, std::span<double const> samples, WavFormat format);
WavData read_wav(std::filesystem::path const& path);

/// Parses and fully validates a patch document (JSON; `//` comments are
/// allowed). Throws Error{patch_syntax} with a "line N, column M" field for
/// malformed JSON, and Error with the failing field path otherwise.
Patch parse_patch(std::string_view text);
Patch load_patch(std::filesystem::path const& path);

/// Canonical form; parse_patch(serialize_patch(p)) == p for valid patches.
std::string serialize_patch(Patch const& patch);
void save_patch(std::filesystem::path const& path, Patch const& patch);

struct CsvRow {
  std::string label;
  std::vector<double> values;
};

struct CsvTable {
  std::vector<std::string> header; // label column first
  std::vector<CsvRow> rows;
};

/// Numbers use 9 significant digits and '.' as the decimal separator.
std::string format_number(double value);

/// RFC 4180 quoting, LF line endings, header first. Throws
/// Error{length_mismatch} when a row does not match the header width.
std::string to_csv(CsvTable const& table);
void write_csv(std::filesystem::path const& path, CsvTable const& table);

std::string read_text(std::filesystem::path const& path);
void write_bytes(std::filesystem::path const& path, std::span<std::uint8_t const> bytes);

} // namespace pids
