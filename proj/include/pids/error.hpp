#pragma once

#include <stdexcept>
#include <string>

namespace pids {

enum class ErrorCode {
  domain,            // non-finite or out-of-range numeric input
  breakpoints,       // malformed breakpoint set
  frequency,         // Nyquist or breakpoint-density limit exceeded
  filter_design,
  configuration,     // unknown automation target, bad routing, bad gains
  length_mismatch,
  analysis,
  io,
  format,            // malformed or unsupported WAV
  patch_syntax,
  patch_semantic,
};

char const* to_string(ErrorCode code);

/// Every failure raised by the library carries a code and, where one exists,
/// the dotted path of the offending field (e.g. "voices[0].artist.breakpoints").
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string const& message, std::string field = {})
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        code_(code),
        field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  std::string const& field() const noexcept { return field_; }

private:
  ErrorCode code_;
  std::string field_;
};

} // namespace pids
