#include "psi/error.hpp"

#include <fmt/format.h>

namespace psi {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::format: return "format";
    case ErrorKind::corruption: return "corruption";
    case ErrorKind::data: return "data";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
    case ErrorKind::arity: return "arity";
    case ErrorKind::length: return "length";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::metadata: return "metadata";
    case ErrorKind::design: return "design";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& message, std::size_t channel)
    : std::runtime_error(message), kind_(kind), channel_(channel) {}

Error Error::with_channel(std::size_t channel) const {
  if (channel_) return *this;
  return Error(kind_, fmt::format("channel {}: {}", channel, what()), channel);
}

}  // namespace psi
