#include "nevlab/version.h"

#include <boost/version.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#ifndef NEVLAB_VERSION
#define NEVLAB_VERSION "0.0.0"
#endif

namespace nevlab {

std::string version() { return NEVLAB_VERSION; }

std::vector<std::pair<std::string, std::string>> build_versions() {
  auto dotted = [](int a, int b, int c) {
    return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(c);
  };
  return {
      {"nevlab", version()},
      {"compiler", __VERSION__},
      {"eigen", dotted(EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"boost", dotted(BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000, BOOST_VERSION % 100)},
      {"nlohmann_json", dotted(NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                               NLOHMANN_JSON_VERSION_PATCH)},
  };
}

}  // namespace nevlab
