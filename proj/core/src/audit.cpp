#include "nevlab/audit.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nevlab/errors.h"

namespace nevlab {

void GridSpec::validate() const {
  if (!std::isfinite(min) || !std::isfinite(max) || !(max > min))
    throw Error(Errc::invalid_configuration, "grid must be strictly increasing (max > min)");
  if (count < 2) throw Error(Errc::invalid_configuration, "grid needs count >= 2");
  if (spacing == Spacing::log && !(min > 0.0))
    throw Error(Errc::invalid_configuration, "log grid needs min > 0");
}

std::vector<double> GridSpec::points() const {
  validate();
  std::vector<double> p(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) / (count - 1);
    p[static_cast<std::size_t>(i)] =
        spacing == Spacing::linear ? min + u * (max - min) : min * std::pow(max / min, u);
  }
  p.back() = max;
  return p;
}

GridSpec GridSpec::extended() const {
  GridSpec g = *this;
  g.max = spacing == Spacing::linear ? 2 * max - min : min * (max / min) * (max / min);
  g.count = 2 * count - 1;
  return g;
}

double max_cell(std::span<const double> radii) {
  double widest = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double lo = i == 0 ? radii[0] : 0.5 * (radii[i - 1] + radii[i]);
    const double hi = i + 1 == radii.size() ? radii[i] : 0.5 * (radii[i] + radii[i + 1]);
    widest = std::max(widest, hi - lo);
  }
  return widest;
}

AuditOutcome make_outcome(std::string name, std::vector<double> radii, std::vector<double> lhs,
                          std::vector<double> rhs, double budget) {
  if (radii.size() != lhs.size() || radii.size() != rhs.size())
    throw Error(Errc::invalid_configuration, "audit columns differ in length");
  AuditOutcome o;
  o.name = std::move(name);
  o.budget = budget;
  o.radii = std::move(radii);
  o.lhs = std::move(lhs);
  o.rhs = std::move(rhs);
  o.margin.resize(o.radii.size());
  o.min_margin = std::numeric_limits<double>::infinity();
  const std::size_t n = o.radii.size();
  for (std::size_t i = 0; i < n; ++i) {
    o.margin[i] = o.rhs[i] - o.lhs[i];
    if (!std::isfinite(o.margin[i])) o.margins_finite = false;
    o.min_margin = std::min(o.min_margin, o.margin[i]);
    if (!(o.margin[i] < 0.0)) continue;
    const double lo = i == 0 ? o.radii[0] : 0.5 * (o.radii[i - 1] + o.radii[i]);
    const double hi = i + 1 == n ? o.radii[i] : 0.5 * (o.radii[i] + o.radii[i + 1]);
    if (!o.exceptional.empty() && o.exceptional.back().hi == lo)
      o.exceptional.back().hi = hi;
    else
      o.exceptional.push_back({lo, hi});
    o.exceptional_measure += hi - lo;
  }
  if (n == 0) o.min_margin = 0.0;
  o.verdict = o.margins_finite && o.exceptional_measure <= o.budget;
  return o;
}

AuditOutcome with_extension_check(const std::function<AuditOutcome(std::span<const double>)>& audit,
                                  const GridSpec& grid) {
  const std::vector<double> base_grid = grid.points();
  const std::vector<double> ext_grid = grid.extended().points();
  AuditOutcome base = audit(base_grid);
  const AuditOutcome ext = audit(ext_grid);
  base.extended_measure = ext.exceptional_measure;
  base.extension_stable = ext.exceptional_measure <= base.exceptional_measure + max_cell(ext_grid) &&
                          ext.margins_finite;
  base.verdict = base.verdict && *base.extension_stable;
  return base;
}

void AuditOutcome::write_csv(std::ostream& out) const {
  std::vector<Column> cols{{"r", radii}, {"lhs", lhs}, {"rhs", rhs}, {"margin", margin}};
  std::vector<double> flag(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) flag[i] = margin[i] < 0.0 ? 1.0 : 0.0;
  cols.push_back({"exceptional", flag});
  for (const auto& c : extra) cols.push_back(c);
  write_table(out, cols);
}

nlohmann::json AuditOutcome::summary() const {
  nlohmann::json j;
  j["name"] = name;
  j["verdict"] = verdict ? "pass" : "fail";
  j["exceptional_measure"] = exceptional_measure;
  j["budget"] = std::isfinite(budget) ? nlohmann::json(budget) : nlohmann::json("inf");
  j["min_margin"] = std::isfinite(min_margin) ? nlohmann::json(min_margin) : nlohmann::json(nullptr);
  j["margins_finite"] = margins_finite;
  j["exceptional_set"] = nlohmann::json::array();
  for (const Interval& iv : exceptional) j["exceptional_set"].push_back({iv.lo, iv.hi});
  if (extended_measure) j["extended_measure"] = *extended_measure;
  if (extension_stable) j["extension_stable"] = *extension_stable;
  if (!details.empty()) j["details"] = details;
  return j;
}

}  // namespace nevlab
