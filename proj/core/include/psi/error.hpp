#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psi {

enum class ErrorKind {
  format,      // bad magic, version, malformed CSV/JSON
  corruption,  // payload length disagrees with header
  data,        // non-finite values, invalid trial contents
  degenerate,  // zero-variance channel, pool, or sample
  io,          // unreadable or unwritable path
  config,      // invalid parameters
  arity,       // too few groups, trials, or channels
  length,      // signal too short for the requested operation
  numeric,     // iteration failed to converge
  metadata,    // missing or inconsistent provenance
  design,      // filter cannot be designed for the requested band
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  Error(ErrorKind kind, const std::string& message, std::size_t channel);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> channel() const noexcept { return channel_; }

  // Same error with channel attribution prepended.
  Error with_channel(std::size_t channel) const;

 private:
  ErrorKind kind_;
  std::optional<std::size_t> channel_;
};

}  // namespace psi
