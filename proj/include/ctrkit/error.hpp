#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctrkit {

enum class ErrorCode {
  invalid_input,
  invalid_configuration,
  degenerate_plane,
  config_error,
  unsupported_command,
  parse_error,
  limit_error,
  not_homed,
  degenerate_geometry,
  missing_registration,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::invalid_configuration: return "invalid-configuration";
    case ErrorCode::degenerate_plane: return "degenerate-plane";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::unsupported_command: return "unsupported-command";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::limit_error: return "limit-error";
    case ErrorCode::not_homed: return "not-homed";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::missing_registration: return "missing-registration";
  }
  return "unknown";
}

// Base exception for every failure reported by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when the tube contributions of a link cancel (chi = gamma = 0).
class DegeneratePlaneError : public Error {
 public:
  explicit DegeneratePlaneError(double resultant_curvature)
      : Error(ErrorCode::degenerate_plane,
              "equilibrium bending plane is undefined (chi = gamma = 0)"),
        resultant_curvature_(resultant_curvature) {}

  double resultant_curvature() const noexcept { return resultant_curvature_; }

 private:
  double resultant_curvature_;
};

// Malformed text input. `column` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t column, ErrorCode code = ErrorCode::parse_error)
      : Error(code, message), column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

}  // namespace ctrkit
