#include "nevlab/errors.h"

namespace nevlab {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_profile: return "invalid-profile";
    case Errc::invalid_configuration: return "invalid-configuration";
    case Errc::domain: return "domain";
    case Errc::pole: return "pole";
    case Errc::integrability: return "integrability";
    case Errc::non_exit: return "non-exit";
    case Errc::reliability: return "reliability";
    case Errc::root_finding: return "root-finding";
    case Errc::monotonicity: return "monotonicity";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::range: return "range";
    case Errc::io: return "io";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace nevlab
