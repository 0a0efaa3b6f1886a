#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmsep {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  not_unitary,
  unknown_register,
  numeric_failure,
  invalid_database,
  budget_exceeded,
  wrong_mode,
  invalid_params,
  empty_spectrum,
  parse_error,
  io_error,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::not_unitary: return "not-unitary";
    case ErrorKind::unknown_register: return "unknown-register";
    case ErrorKind::numeric_failure: return "numeric-failure";
    case ErrorKind::invalid_database: return "invalid-database";
    case ErrorKind::budget_exceeded: return "budget-exceeded";
    case ErrorKind::wrong_mode: return "wrong-mode";
    case ErrorKind::invalid_params: return "invalid-params";
    case ErrorKind::empty_spectrum: return "empty-spectrum";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qmsep
