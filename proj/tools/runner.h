#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nevlab/audit.h"
#include "nevlab/surface.h"

namespace nevlab::cli {

struct SurfaceSection {
  SurfaceKind kind = SurfaceKind::euclidean_plane;
  /// Radial surfaces: either a constant curvature or a profile file ("t,kappa" rows).
  std::optional<double> curvature;
  std::string profile_file;
  double chart_radius = 40.0;  // geodesic extent of the radial chart

  friend bool operator==(const SurfaceSection&, const SurfaceSection&) = default;
};

struct MapSection {
  std::string name = "exp";
  double shift_re = 0.0;
  double shift_im = 0.0;

  friend bool operator==(const MapSection&, const MapSection&) = default;
};

struct SimSection {
  std::optional<std::uint64_t> seed;
  std::uint64_t paths = 10000;
  double step = 1e-4;
  bool step_scales_with_r2 = true;  // dt = step * r^2
  std::uint64_t max_steps = 100'000'000;
  unsigned workers = 0;  // 0: NEVLAB_WORKERS, then hardware concurrency

  friend bool operator==(const SimSection&, const SimSection&) = default;
};

struct ParamSection {
  int derivative_order = 1;
  double delta = 0.1;
  double eta = 0.5;
  int bins = 16;
  std::string calibration_map = "z2m1";
  std::vector<double> euclidean_radii{0.3, 0.6, 0.9};
  int green_samples = 100;
  double budget = kInfinity;
  /// Leading fraction of the grid on which the singular-form constant is frozen.
  double freeze_fraction = 0.25;

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();
  friend bool operator==(const ParamSection&, const ParamSection&) = default;
};

struct ToleranceSection {
  double sigma = 3.0;
  double green_abs = 1e-6;
  double metric_rel = 1e-4;
  double fmt_window = 0.5;
  double fmt_slope = 0.05;
  double chi_square_alpha = 1e-3;

  friend bool operator==(const ToleranceSection&, const ToleranceSection&) = default;
};

struct ExperimentConfig {
  SurfaceSection surface;
  MapSection map;
  GridSpec grid{2.0, 30.0, 40, Spacing::log};
  SimSection sim;
  std::vector<std::string> audits;
  std::vector<std::string> targets{"0", "inf"};
  std::string output_dir = "nevlab-out";
  ParamSection params;
  ToleranceSection tolerances;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

/// Configuration problem, with the JSON path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct AuditInfo {
  std::string name;
  bool stochastic;
  std::string description;
};

/// Sorted by name.
const std::vector<AuditInfo>& audit_catalog();

/// Unknown keys and ill-typed values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);
/// Throws ConfigError naming the field.
void validate(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical JSON serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::string fnv1a_hex(const std::string& bytes);

struct RunOptions {
  bool dump_paths = false;
  int verbosity = 0;
  std::ostream* log = nullptr;
};

struct AuditStatus {
  std::string name;
  std::string status;  // pass, fail or error
  std::string message;
};

struct RunResult {
  std::vector<AuditStatus> audits;
  bool all_pass() const;
};

/// Runs the selected audits and writes one CSV per audit, summary.json and
/// manifest.json into config.output_dir.
RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

/// Human-readable catalog of maps, surfaces and audits.
void list_catalog(std::ostream& out);

}  // namespace nevlab::cli
