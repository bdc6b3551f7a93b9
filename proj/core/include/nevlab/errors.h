#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nevlab {

enum class Errc {
  invalid_profile,
  invalid_configuration,
  domain,
  pole,
  integrability,
  non_exit,
  reliability,
  root_finding,
  monotonicity,
  degenerate_input,
  range,
  io,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the Errc categories so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace nevlab
