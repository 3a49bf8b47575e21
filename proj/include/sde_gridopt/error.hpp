#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sde_gridopt {

enum class ErrorKind {
  invalid_input,
  domain,
  dimension_mismatch,
  regularity,
  parse,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::domain: return "domain";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::regularity: return "regularity";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Library error with a machine-readable category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace detail
}  // namespace sde_gridopt
