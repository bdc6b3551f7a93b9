#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nevlab/tabular.h"

namespace nevlab {

enum class Spacing { linear, log };

/// Radius grid: `count` points from min to max inclusive.
struct GridSpec {
  double min = 1.0;
  double max = 10.0;
  int count = 10;
  Spacing spacing = Spacing::linear;

  void validate() const;
  std::vector<double> points() const;
  /// Same spacing, twice the extent: max' = 2 max - min (linear) or
  /// min (max / min)^2 (log), with 2 count - 1 points.
  GridSpec extended() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// lhs <= rhs checked on a radius grid. Each grid point owns the Voronoi cell
/// between the midpoints to its neighbours; the exceptional set is the union of
/// the cells whose margin rhs - lhs is negative.
struct AuditOutcome {
  std::string name;
  std::vector<double> radii, lhs, rhs, margin;
  std::vector<Column> extra;  // additional per-radius columns
  std::vector<Interval> exceptional;
  double exceptional_measure = 0.0;
  double budget = std::numeric_limits<double>::infinity();
  double min_margin = 0.0;
  bool margins_finite = true;
  /// Exceptional measure on the extended grid, when the extension check ran.
  std::optional<double> extended_measure;
  std::optional<bool> extension_stable;
  nlohmann::json details = nlohmann::json::object();  // scalar results
  bool verdict = false;

  void write_csv(std::ostream& out) const;
  nlohmann::json summary() const;
};

AuditOutcome make_outcome(std::string name, std::vector<double> radii, std::vector<double> lhs,
                          std::vector<double> rhs, double budget = std::numeric_limits<double>::infinity());

/// Largest Voronoi cell of the grid.
double max_cell(std::span<const double> radii);

/// Runs `audit` on the grid and on its 2x extension. The exceptional set counts
/// as finite when the extended measure exceeds the base measure by at most one
/// extended-grid cell; the verdict of the returned base outcome requires it.
AuditOutcome with_extension_check(const std::function<AuditOutcome(std::span<const double>)>& audit,
                                  const GridSpec& grid);

}  // namespace nevlab
