#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "psi/matrix.hpp"

namespace psi {

enum class ConditionKind : std::uint8_t {
  intact_complex,
  intact_repetition,
  intact_noisy,
  damaged_heads,
  damaged_noise,
  custom,
};

// Experimental condition label. The five named regimes sort first in their
// canonical order; custom labels follow alphabetically.
class Condition {
 public:
  Condition() = default;
  Condition(ConditionKind kind);  // NOLINT(google-explicit-constructor)

  static Condition parse(std::string_view label);
  static Condition custom(std::string label);

  ConditionKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  bool is_custom() const noexcept { return kind_ == ConditionKind::custom; }

  friend bool operator==(const Condition&, const Condition&) = default;
  friend std::strong_ordering operator<=>(const Condition& a, const Condition& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    return a.name_ <=> b.name_;
  }

 private:
  ConditionKind kind_ = ConditionKind::intact_complex;
  std::string name_ = "intact_complex";
};

// The five named regimes in canonical order.
const std::vector<Condition>& standard_conditions();

struct GenerationParams {
  double temperature = 1.0;
  int top_k = 50;
  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

// One T x C recording with provenance.
struct ActivationTrial {
  std::string trial_id;
  Condition condition;
  Matrix data;                        // T rows (token steps) x C columns (channels)
  std::vector<int> block_ids;         // source blocks, channels split evenly in this order
  std::vector<int> channel_indices;   // original hidden-state index per column
  std::uint64_t seed = 0;
  GenerationParams generation_params;

  std::size_t steps() const noexcept { return data.rows(); }
  std::size_t channels() const noexcept { return data.cols(); }

  // Throws psi::Error on any violated invariant.
  void validate() const;

  // Block id of every column, or empty when attribution is unavailable.
  std::vector<int> channel_blocks() const;

  // Copy restricted to the given columns. Block attribution is kept only when
  // the selection is a union of whole block segments.
  ActivationTrial select_channels(std::span<const std::size_t> columns) const;

  friend bool operator==(const ActivationTrial&, const ActivationTrial&) = default;
};

// An ActivationTrial whose columns have been demeaned and scaled to unit
// population standard deviation. Only preprocess() constructs one.
class PreprocessedTrial {
 public:
  const ActivationTrial& trial() const noexcept { return trial_; }
  const Matrix& data() const noexcept { return trial_.data; }
  std::size_t steps() const noexcept { return trial_.steps(); }
  std::size_t channels() const noexcept { return trial_.channels(); }

 private:
  friend PreprocessedTrial preprocess(const ActivationTrial& trial);
  explicit PreprocessedTrial(ActivationTrial trial) : trial_(std::move(trial)) {}
  ActivationTrial trial_;
};

inline constexpr double kDegenerateChannelSd = 1e-12;

// Per-channel demean and z-score (population convention). Throws a
// degenerate error naming the channel when its sd is <= 1e-12.
PreprocessedTrial preprocess(const ActivationTrial& trial);

enum class TrialFormat { binary, csv };

ActivationTrial load_trial(const std::filesystem::path& path);
void save_trial(const ActivationTrial& trial, const std::filesystem::path& path,
                TrialFormat format = TrialFormat::binary);

// In-memory encoding of the binary format, as written by save_trial.
std::vector<std::uint8_t> encode_trial(const ActivationTrial& trial);
ActivationTrial decode_trial(std::span<const std::uint8_t> bytes);

}  // namespace psi
