#include "pids/io.hpp"

#include "pids/error.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace pids {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------- WAV

namespace {

constexpr std::uint16_t format_pcm = 1;
constexpr std::uint16_t format_float = 3;

class ByteWriter {
public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void tag(char const (&id)[5]) { out_.insert(out_.end(), id, id + 4); }
  void u16(std::uint16_t v)
  {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v)
  {
    for (int i = 0; i < 4; ++i)
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

private:
  std::vector<std::uint8_t>& out_;
};

std::uint16_t get_u16(std::uint8_t const* p)
{
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(std::uint8_t const* p)
{
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

bool has_tag(std::uint8_t const* p, char const (&id)[5])
{
  return std::memcmp(p, id, 4) == 0;
}

} // namespace

std::vector<std::uint8_t> encode_wav(std::span<double const> samples, WavFormat format)
{
  if (format.sample_rate == 0)
    throw Error(ErrorCode::domain, "sample rate must be > 0", "sample_rate");

  bool const pcm = format.bit_depth == BitDepth::pcm16;
  std::uint16_t const bytes_per_sample = pcm ? 2 : 4;
  auto const data_size = static_cast<std::uint32_t>(samples.size() * bytes_per_sample);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  ByteWriter w(out);
  w.tag("RIFF");
  w.u32(36 + data_size);
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(16);
  w.u16(pcm ? format_pcm : format_float);
  w.u16(1);
  w.u32(format.sample_rate);
  w.u32(format.sample_rate * bytes_per_sample);
  w.u16(bytes_per_sample);
  w.u16(static_cast<std::uint16_t>(bytes_per_sample * 8));
  w.tag("data");
  w.u32(data_size);

  for (double s : samples) {
    if (!std::isfinite(s))
      throw Error(ErrorCode::domain, "cannot encode a non-finite sample");
    if (pcm) {
      auto const v = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * pcm16_scale));
      w.u16(static_cast<std::uint16_t>(v));
    } else {
      w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  return out;
}

WavData decode_wav(std::span<std::uint8_t const> bytes)
{
  auto fail = [](std::string const& why) { return Error(ErrorCode::format, why); };

  if (bytes.size() < 12 || !has_tag(bytes.data(), "RIFF") || !has_tag(bytes.data() + 8, "WAVE"))
    throw fail("not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    auto const* chunk = bytes.data() + pos;
    std::uint32_t const size = get_u32(chunk + 4);
    std::size_t const body = pos + 8;
    if (size > bytes.size() - body)
      throw fail("truncated chunk");

    if (has_tag(chunk, "fmt ")) {
      if (size < 16)
        throw fail("fmt chunk too short");
      tag = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      have_fmt = true;
    } else if (has_tag(chunk, "data")) {
      if (!have_fmt)
        throw fail("data chunk before fmt chunk");
      if (channels != 1)
        throw fail(fmt::format("unsupported channel count {} (mono only)", channels));
      if (rate == 0)
        throw fail("sample rate is zero");

      WavData wav;
      wav.format.sample_rate = rate;
      auto const* p = chunk + 8;
      if (tag == format_pcm && bits == 16) {
        wav.format.bit_depth = BitDepth::pcm16;
        wav.samples.resize(size / 2);
        for (std::size_t i = 0; i < wav.samples.size(); ++i)
          wav.samples[i] = static_cast<std::int16_t>(get_u16(p + 2 * i)) / pcm16_scale;
      } else if (tag == format_float && bits == 32) {
        wav.format.bit_depth = BitDepth::float32;
        wav.samples.resize(size / 4);
        for (std::size_t i = 0; i < wav.samples.size(); ++i)
          wav.samples[i] = std::bit_cast<float>(get_u32(p + 4 * i));
      } else {
        throw fail(fmt::format("unsupported encoding (format {}, {} bits)", tag, bits));
      }
      return wav;
    }
    pos = body + size + (size & 1);
  }
  throw fail(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

void write_bytes(std::filesystem::path const& path, std::span<std::uint8_t const> bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::io, fmt::format("cannot open {} for writing", path.string()));
  out.write(reinterpret_cast<char const*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(ErrorCode::io, fmt::format("write to {} failed", path.string()));
}

void write_wav(std::filesystem::path const& path, std::span<double const> samples, WavFormat format)
{
  write_bytes(path, encode_wav(samples, format));
}

WavData read_wav(std::filesystem::path const& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::string read_text(std::filesystem::path const& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- patch

namespace {

// Typed access to a JSON node that remembers its path for error messages.
class Node {
public:
  Node(ordered_json const& value, std::string path) : value_(value), path_(std::move(path)) {}

  std::string const& path() const { return path_; }
  ordered_json const& json() const { return value_; }

  [[noreturn]] void fail(std::string const& why) const
  {
    throw Error(ErrorCode::patch_semantic, why, path_);
  }

  void expect_object(std::initializer_list<std::string_view> allowed) const
  {
    if (!value_.is_object())
      fail("expected an object");
    for (auto const& [key, _] : value_.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw Error(ErrorCode::patch_semantic, "unknown field", child_path(key));
  }

  bool has(std::string const& key) const { return value_.contains(key); }

  Node operator[](std::string const& key) const
  {
    if (!value_.contains(key))
      throw Error(ErrorCode::patch_semantic, "required field missing", child_path(key));
    return {value_.at(key), child_path(key)};
  }

  Node at(std::size_t i) const { return {value_.at(i), fmt::format("{}[{}]", path_, i)}; }

  std::size_t array_size() const
  {
    if (!value_.is_array())
      fail("expected an array");
    return value_.size();
  }

  double number() const
  {
    if (!value_.is_number())
      fail("expected a number");
    return value_.get<double>();
  }

  double number_or(std::string const& key, double fallback) const
  {
    return has(key) ? (*this)[key].number() : fallback;
  }

  std::size_t index() const
  {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0))
      fail("expected a non-negative integer");
    return value_.get<std::size_t>();
  }

  int integer() const
  {
    if (!value_.is_number_integer())
      fail("expected an integer");
    return value_.get<int>();
  }

  bool boolean() const
  {
    if (!value_.is_boolean())
      fail("expected true or false");
    return value_.get<bool>();
  }

  std::string string() const
  {
    if (!value_.is_string())
      fail("expected a string");
    return value_.get<std::string>();
  }

  std::pair<double, double> pair() const
  {
    if (array_size() != 2)
      fail("expected a two-element array");
    return {at(0).number(), at(1).number()};
  }

private:
  std::string child_path(std::string const& key) const
  {
    return path_.empty() ? key : path_ + "." + key;
  }

  ordered_json const& value_;
  std::string path_;
};

OversampleFactor read_factor(Node const& node)
{
  try {
    return OversampleFactor(node.integer());
  } catch (Error const& e) {
    if (e.code() == ErrorCode::configuration)
      node.fail("must be one of 1, 2, 4, 8");
    throw;
  }
}

SkeletonKind read_skeleton(Node const& node)
{
  auto const s = node.string();
  if (s == "linear") return SkeletonKind::linear;
  if (s == "step") return SkeletonKind::step;
  if (s == "sine") return SkeletonKind::sine;
  node.fail(fmt::format("unknown skeleton '{}' (expected linear, step or sine)", s));
}

ArtistSpec read_artist(Node const& node)
{
  node.expect_object({"skeleton", "frequency_hz", "breakpoints", "sine"});
  ArtistSpec artist;
  artist.skeleton = read_skeleton(node["skeleton"]);
  artist.frequency_hz = node["frequency_hz"].number();

  if (node.has("breakpoints")) {
    auto const list = node["breakpoints"];
    artist.breakpoints.clear();
    for (std::size_t k = 0; k < list.array_size(); ++k) {
      auto const [x, y] = list.at(k).pair();
      artist.breakpoints.push_back({x, y});
    }
  } else if (artist.skeleton != SkeletonKind::sine) {
    node["breakpoints"]; // reports the missing field
  }

  if (node.has("sine")) {
    auto const sine = node["sine"];
    sine.expect_object({"amplitude", "phase"});
    artist.sine.amplitude = sine.number_or("amplitude", 1.0);
    artist.sine.phase = sine.number_or("phase", 0.0);
  }
  return artist;
}

Voice read_voice(Node const& node)
{
  node.expect_object({"artist", "gains", "integral_limit", "mix", "detune_cents", "lfo_antialias",
                      "oversample"});
  Voice voice;
  voice.artist = read_artist(node["artist"]);

  auto const gains = node["gains"];
  gains.expect_object({"kp", "ki", "kd"});
  voice.pid.gains = {gains.number_or("kp", 0.0), gains.number_or("ki", 0.0), gains.number_or("kd", 0.0)};
  voice.pid.integral_limit = node.number_or("integral_limit", default_integral_limit);
  voice.mix_weight = node.number_or("mix", 1.0);
  voice.detune_cents = node.number_or("detune_cents", 0.0);
  if (node.has("lfo_antialias"))
    voice.lfo_antialias = node["lfo_antialias"].boolean();
  if (node.has("oversample"))
    voice.oversample = read_factor(node["oversample"]);
  return voice;
}

Automation read_automation(Node const& node)
{
  node.expect_object({"voice", "target", "envelope", "lfo"});
  Automation a;
  a.voice = node["voice"].index();
  auto const target = node["target"];
  try {
    a.target = parse_target(target.string());
  } catch (Error const& e) {
    target.fail(e.what());
  }

  bool const env = node.has("envelope");
  bool const lfo = node.has("lfo");
  if (env == lfo)
    node.fail("exactly one of 'envelope' or 'lfo' is required");

  if (env) {
    auto const list = node["envelope"];
    Envelope envelope;
    for (std::size_t k = 0; k < list.array_size(); ++k) {
      auto const [t, v] = list.at(k).pair();
      envelope.points.push_back({t, v});
    }
    a.source = std::move(envelope);
  } else {
    auto const l = node["lfo"];
    l.expect_object({"source", "depth", "offset"});
    LfoRoute route;
    route.source_voice = l["source"].index();
    route.depth = l.number_or("depth", 1.0);
    if (l.has("offset"))
      route.offset = l["offset"].number();
    a.source = route;
  }
  return a;
}

std::string line_and_column(std::string_view text, std::size_t byte)
{
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("line {}, column {}", line, column);
}

} // namespace

Patch parse_patch(std::string_view text)
{
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (nlohmann::json::parse_error const& e) {
    auto const pos = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorCode::patch_syntax, "malformed JSON", line_and_column(text, pos));
  }

  Node const root(doc, "");
  root.expect_object({"sample_rate", "duration_s", "oversample", "voices", "automations", "master_gain"});

  Patch patch;
  patch.sample_rate = root.number_or("sample_rate", 44100.0);
  patch.duration_s = root["duration_s"].number();
  if (root.has("oversample"))
    patch.oversample = read_factor(root["oversample"]);
  patch.master_gain = root.number_or("master_gain", 1.0);

  auto const voices = root["voices"];
  for (std::size_t v = 0; v < voices.array_size(); ++v)
    patch.voices.push_back(read_voice(voices.at(v)));

  if (root.has("automations")) {
    auto const list = root["automations"];
    for (std::size_t i = 0; i < list.array_size(); ++i)
      patch.automations.push_back(read_automation(list.at(i)));
  }

  validate_patch(patch);
  return patch;
}

Patch load_patch(std::filesystem::path const& path)
{
  return parse_patch(read_text(path));
}

std::string serialize_patch(Patch const& patch)
{
  ordered_json doc;
  doc["sample_rate"] = patch.sample_rate;
  doc["duration_s"] = patch.duration_s;
  doc["oversample"] = patch.oversample.value();

  doc["voices"] = ordered_json::array();
  for (auto const& voice : patch.voices) {
    ordered_json v;
    ordered_json artist;
    artist["skeleton"] = to_string(voice.artist.skeleton);
    artist["frequency_hz"] = voice.artist.frequency_hz;
    artist["breakpoints"] = ordered_json::array();
    for (auto const& b : voice.artist.breakpoints)
      artist["breakpoints"].push_back({b.x, b.y});
    artist["sine"] = {{"amplitude", voice.artist.sine.amplitude}, {"phase", voice.artist.sine.phase}};
    v["artist"] = std::move(artist);
    auto const& g = voice.pid.gains;
    v["gains"] = {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}};
    v["integral_limit"] = voice.pid.integral_limit;
    v["mix"] = voice.mix_weight;
    v["detune_cents"] = voice.detune_cents;
    v["lfo_antialias"] = voice.lfo_antialias;
    if (voice.oversample)
      v["oversample"] = voice.oversample->value();
    doc["voices"].push_back(std::move(v));
  }

  doc["automations"] = ordered_json::array();
  for (auto const& a : patch.automations) {
    ordered_json j;
    j["voice"] = a.voice;
    j["target"] = to_string(a.target);
    if (auto const* env = std::get_if<Envelope>(&a.source)) {
      j["envelope"] = ordered_json::array();
      for (auto const& p : env->points)
        j["envelope"].push_back({p.time_s, p.value});
    } else {
      auto const& route = std::get<LfoRoute>(a.source);
      ordered_json lfo;
      lfo["source"] = route.source_voice;
      lfo["depth"] = route.depth;
      if (route.offset)
        lfo["offset"] = *route.offset;
      j["lfo"] = std::move(lfo);
    }
    doc["automations"].push_back(std::move(j));
  }
  doc["master_gain"] = patch.master_gain;
  return doc.dump(2) + "\n";
}

void save_patch(std::filesystem::path const& path, Patch const& patch)
{
  auto const text = serialize_patch(patch);
  write_bytes(path, std::span(reinterpret_cast<std::uint8_t const*>(text.data()), text.size()));
}

// ---------------------------------------------------------------- CSV

std::string format_number(double value)
{
  return fmt::format("{:.9g}", value);
}

namespace {

std::string csv_field(std::string const& s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"')
      quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

} // namespace

std::string to_csv(CsvTable const& table)
{
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0)
      out += ',';
    out += csv_field(table.header[i]);
  }
  out += '\n';

  for (auto const& row : table.rows) {
    if (row.values.size() + 1 != table.header.size())
      throw Error(ErrorCode::length_mismatch,
                  fmt::format("row '{}' has {} values, header expects {}", row.label, row.values.size(),
                              table.header.size() - 1));
    out += csv_field(row.label);
    for (double v : row.values) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

void write_csv(std::filesystem::path const& path, CsvTable const& table)
{
  auto const text = to_csv(table);
  write_bytes(path, std::span(reinterpret_cast<std::uint8_t const*>(text.data()), text.size()));
}

} // namespace pids
