#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridfault {

// Error classes double as the machine-parsable tag the CLI prints on failure.
enum class ErrorKind {
  InvalidArgument,
  Integration,
  Stability,
  Convergence,
  Divergence,
  Io,
  MissingInput,
  Format,
  LabelAccess,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Integration: return "integration_error";
    case ErrorKind::Stability: return "stability_error";
    case ErrorKind::Convergence: return "convergence_error";
    case ErrorKind::Divergence: return "divergence_error";
    case ErrorKind::Io: return "io_error";
    case ErrorKind::MissingInput: return "missing_input";
    case ErrorKind::Format: return "format_error";
    case ErrorKind::LabelAccess: return "label_access_error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what,
                    ErrorKind kind = ErrorKind::InvalidArgument) {
  if (!cond) fail(kind, what);
}

}  // namespace gridfault
