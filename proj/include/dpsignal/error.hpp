#pragma once

#include <stdexcept>
#include <string>

namespace dpsignal {

// Error classes map one-to-one onto the C API status codes and CLI exit codes.
enum class ErrorKind {
  usage = 2,
  validation = 3,
  io = 4,
  numeric = 5,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string &msg) {
  return Error(ErrorKind::usage, msg);
}
inline Error validation_error(const std::string &msg) {
  return Error(ErrorKind::validation, msg);
}
inline Error io_error(const std::string &msg) {
  return Error(ErrorKind::io, msg);
}
// Sampler domain violations (nonpositive shape, non-finite density, ...).
inline Error numeric_error(const std::string &msg) {
  return Error(ErrorKind::numeric, msg);
}

} // namespace dpsignal
