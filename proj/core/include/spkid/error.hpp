#pragma once

#include <stdexcept>
#include <string>

namespace spkid {

/// Failure categories; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  invalid_argument,
  config,
  io,
  format,
  insufficient_data,
  missing_model,
  numeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

/// Process exit code for a failure of this kind (never 0).
int exit_code(ErrorKind kind) noexcept;

}  // namespace spkid
