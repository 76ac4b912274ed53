#include "psi/trial.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "psi/error.hpp"

namespace psi {
namespace {

constexpr std::array<std::string_view, 5> kConditionNames = {
    "intact_complex", "intact_repetition", "intact_noisy", "damaged_heads", "damaged_noise"};

constexpr std::array<char, 4> kMagic = {'P', 'S', 'I', 'A'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4 + 4;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | in[at + static_cast<std::size_t>(i)];
  return v;
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

nlohmann::json metadata_json(const ActivationTrial& trial) {
  return {
      {"trial_id", trial.trial_id},
      {"condition", trial.condition.name()},
      {"block_ids", trial.block_ids},
      {"channel_indices", trial.channel_indices},
      {"seed", trial.seed},
      {"generation_params",
       {{"temperature", trial.generation_params.temperature}, {"top_k", trial.generation_params.top_k}}},
  };
}

void apply_metadata(const nlohmann::json& meta, ActivationTrial& trial) {
  trial.trial_id = meta.at("trial_id").get<std::string>();
  trial.condition = Condition::parse(meta.at("condition").get<std::string>());
  trial.block_ids = meta.at("block_ids").get<std::vector<int>>();
  trial.channel_indices = meta.at("channel_indices").get<std::vector<int>>();
  trial.seed = meta.at("seed").get<std::uint64_t>();
  if (auto it = meta.find("generation_params"); it != meta.end()) {
    trial.generation_params.temperature = it->value("temperature", 1.0);
    trial.generation_params.top_k = it->value("top_k", 50);
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no) {
  while (!field.empty() && (field.front() == ' ')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw Error(ErrorKind::format, fmt::format("line {}: cannot parse number '{}'", line_no, field));
  return v;
}

ActivationTrial load_csv(const std::filesystem::path& path, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::format, "empty CSV trial file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "t")
    throw Error(ErrorKind::format, "CSV trial header must be 't,ch0,ch1,...'");
  const std::size_t cols = header.size() - 1;
  for (std::size_t c = 0; c < cols; ++c)
    if (header[c + 1] != fmt::format("ch{}", c))
      throw Error(ErrorKind::format, fmt::format("unexpected CSV column name '{}'", header[c + 1]));

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != cols + 1)
      throw Error(ErrorKind::format, fmt::format("line {}: expected {} fields, found {}", line_no, cols + 1, fields.size()));
    for (std::size_t c = 0; c < cols; ++c)
      values.push_back(static_cast<double>(static_cast<float>(parse_double(fields[c + 1], line_no))));
    ++rows;
  }

  ActivationTrial trial;
  trial.trial_id = path.stem().string();
  trial.condition = Condition::custom("unlabelled");
  trial.data = Matrix(rows, cols, std::move(values));
  trial.channel_indices.resize(cols);
  for (std::size_t c = 0; c < cols; ++c) trial.channel_indices[c] = static_cast<int>(c);
  trial.validate();
  return trial;
}

}  // namespace

Condition::Condition(ConditionKind kind) : kind_(kind) {
  if (kind == ConditionKind::custom) throw Error(ErrorKind::config, "custom condition requires a label");
  name_ = std::string(kConditionNames[static_cast<std::size_t>(kind)]);
}

Condition Condition::parse(std::string_view label) {
  std::string normalised(label);
  std::replace(normalised.begin(), normalised.end(), '-', '_');
  for (std::size_t i = 0; i < kConditionNames.size(); ++i)
    if (normalised == kConditionNames[i]) return Condition(static_cast<ConditionKind>(i));
  return custom(std::string(label));
}

Condition Condition::custom(std::string label) {
  if (label.empty()) throw Error(ErrorKind::format, "empty condition label");
  Condition c;
  c.kind_ = ConditionKind::custom;
  c.name_ = std::move(label);
  return c;
}

const std::vector<Condition>& standard_conditions() {
  static const std::vector<Condition> all = {
      ConditionKind::intact_complex, ConditionKind::intact_repetition, ConditionKind::intact_noisy,
      ConditionKind::damaged_heads, ConditionKind::damaged_noise};
  return all;
}

void ActivationTrial::validate() const {
  if (steps() < 2 || channels() < 2)
    throw Error(ErrorKind::data, fmt::format("trial '{}' is {}x{}; need T >= 2 and C >= 2", trial_id, steps(), channels()));
  if (channel_indices.size() != channels())
    throw Error(ErrorKind::data, fmt::format("trial '{}' has {} channel indices for {} channels", trial_id,
                                             channel_indices.size(), channels()));
  if (!block_ids.empty() && channels() % block_ids.size() == 0) {
    const auto per_block = channels() / block_ids.size();
    for (std::size_t b = 0; b < block_ids.size(); ++b) {
      std::set<int> seen(channel_indices.begin() + static_cast<std::ptrdiff_t>(b * per_block),
                         channel_indices.begin() + static_cast<std::ptrdiff_t>((b + 1) * per_block));
      if (seen.size() != per_block)
        throw Error(ErrorKind::data, fmt::format("trial '{}': duplicate channel index in block {}", trial_id, block_ids[b]));
    }
  }
  for (std::size_t r = 0; r < steps(); ++r)
    for (std::size_t c = 0; c < channels(); ++c)
      if (!std::isfinite(data(r, c)))
        throw Error(ErrorKind::data, fmt::format("trial '{}': non-finite value at t={}, channel {}", trial_id, r, c), c);
}

std::vector<int> ActivationTrial::channel_blocks() const {
  if (block_ids.empty() || channels() % block_ids.size() != 0) return {};
  const auto per_block = channels() / block_ids.size();
  std::vector<int> out(channels());
  for (std::size_t c = 0; c < channels(); ++c) out[c] = block_ids[c / per_block];
  return out;
}

ActivationTrial ActivationTrial::select_channels(std::span<const std::size_t> columns) const {
  ActivationTrial out;
  out.trial_id = trial_id;
  out.condition = condition;
  out.seed = seed;
  out.generation_params = generation_params;
  out.data = data.select_columns(columns);
  out.channel_indices.reserve(columns.size());
  for (auto c : columns) out.channel_indices.push_back(channel_indices.at(c));

  // Keep block attribution when the selection is whole segments in order.
  const auto blocks = channel_blocks();
  if (!blocks.empty()) {
    const auto per_block = channels() / block_ids.size();
    std::vector<int> kept;
    bool whole = columns.size() % per_block == 0;
    for (std::size_t start = 0; whole && start < columns.size(); start += per_block) {
      const auto first = columns[start];
      if (first % per_block != 0) whole = false;
      for (std::size_t k = 0; whole && k < per_block; ++k)
        if (columns[start + k] != first + k) whole = false;
      if (whole) kept.push_back(blocks[first]);
    }
    if (whole) out.block_ids = std::move(kept);
  }
  return out;
}

PreprocessedTrial preprocess(const ActivationTrial& trial) {
  trial.validate();
  ActivationTrial out = trial;
  const auto t = static_cast<double>(trial.steps());
  for (std::size_t c = 0; c < trial.channels(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < trial.steps(); ++r) sum += trial.data(r, c);
    const double mean = sum / t;
    double ss = 0.0;
    for (std::size_t r = 0; r < trial.steps(); ++r) {
      const double d = trial.data(r, c) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / t);
    if (!(sd > kDegenerateChannelSd))
      throw Error(ErrorKind::degenerate,
                  fmt::format("trial '{}': channel {} is near-constant (sd = {:.3g})", trial.trial_id, c, sd), c);
    for (std::size_t r = 0; r < trial.steps(); ++r) out.data(r, c) = (trial.data(r, c) - mean) / sd;
  }
  return PreprocessedTrial(std::move(out));
}

std::vector<std::uint8_t> encode_trial(const ActivationTrial& trial) {
  trial.validate();
  const auto meta = metadata_json(trial).dump();

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + meta.size() + trial.data.values().size() * 4);
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u16(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(trial.steps()));
  put_u32(out, static_cast<std::uint32_t>(trial.channels()));
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  for (double v : trial.data.values()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) throw Error(ErrorKind::data, fmt::format("trial '{}': value {} overflows float32", trial.trial_id, v));
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

ActivationTrial decode_trial(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw Error(ErrorKind::format, "missing PSIA magic");
  if (auto v = get_u16(bytes, 4); v != kVersion)
    throw Error(ErrorKind::format, fmt::format("unsupported trial format version {}", v));
  const std::size_t rows = get_u32(bytes, 6);
  const std::size_t cols = get_u32(bytes, 10);
  const std::size_t meta_len = get_u32(bytes, 14);
  if (bytes.size() < kHeaderSize + meta_len)
    throw Error(ErrorKind::corruption, "metadata block truncated");

  ActivationTrial trial;
  try {
    const auto* meta_begin = reinterpret_cast<const char*>(bytes.data() + kHeaderSize);
    apply_metadata(nlohmann::json::parse(meta_begin, meta_begin + meta_len), trial);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, fmt::format("bad trial metadata: {}", e.what()));
  }

  const std::size_t payload = bytes.size() - kHeaderSize - meta_len;
  if (payload != rows * cols * 4)
    throw Error(ErrorKind::corruption, fmt::format("header declares {}x{} values ({} bytes) but payload has {} bytes",
                                                   rows, cols, rows * cols * 4, payload));
  if (trial.channel_indices.size() != cols)
    throw Error(ErrorKind::corruption, fmt::format("metadata lists {} channel indices but header declares C = {}",
                                                   trial.channel_indices.size(), cols));

  std::vector<double> values(rows * cols);
  std::size_t at = kHeaderSize + meta_len;
  for (auto& v : values) {
    v = static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)));
    at += 4;
  }
  trial.data = Matrix(rows, cols, std::move(values));
  trial.validate();
  return trial;
}

ActivationTrial load_trial(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) return decode_trial(bytes);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (text.starts_with("t,")) return load_csv(path, text);
  throw Error(ErrorKind::format, fmt::format("{}: neither a PSIA binary trial nor a CSV trial", path.string()));
}

void save_trial(const ActivationTrial& trial, const std::filesystem::path& path, TrialFormat format) {
  std::string body;
  if (format == TrialFormat::binary) {
    const auto bytes = encode_trial(trial);
    body.assign(bytes.begin(), bytes.end());
  } else {
    trial.validate();
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "t");
    for (std::size_t c = 0; c < trial.channels(); ++c) fmt::format_to(std::back_inserter(buf), ",ch{}", c);
    buf.push_back('\n');
    for (std::size_t r = 0; r < trial.steps(); ++r) {
      fmt::format_to(std::back_inserter(buf), "{}", r);
      for (std::size_t c = 0; c < trial.channels(); ++c) {
        const auto f = static_cast<float>(trial.data(r, c));
        if (!std::isfinite(f)) throw Error(ErrorKind::data, "value overflows float32");
        fmt::format_to(std::back_inserter(buf), ",{}", f);
      }
      buf.push_back('\n');
    }
    body = fmt::to_string(buf);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot write {}", path.string()));
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error(ErrorKind::io, fmt::format("write failed for {}", path.string()));
}

}  // namespace psi
