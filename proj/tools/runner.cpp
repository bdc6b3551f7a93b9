#include "runner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "nevlab/brownian.h"
#include "nevlab/errors.h"
#include "nevlab/green.h"
#include "nevlab/meromorphic.h"
#include "nevlab/nevanlinna.h"
#include "nevlab/tabular.h"
#include "nevlab/theorems.h"
#include "nevlab/version.h"

namespace nevlab::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Strict JSON reading

class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_null() && std::isinf(out)) return;
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void read(const char* key, unsigned& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
      out = v->get<unsigned>();
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }
  void read(const char* key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key), "expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back((*v)[i].get<std::string>());
      }
    }
  }

  /// Unknown keys are errors.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key().c_str()), "unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

SurfaceKind parse_surface_kind(const std::string& text, const std::string& field) {
  if (text == "euclidean_plane") return SurfaceKind::euclidean_plane;
  if (text == "poincare_disc") return SurfaceKind::poincare_disc;
  if (text == "radial") return SurfaceKind::radial;
  throw ConfigError(field, "unknown surface '" + text + "'");
}

Spacing parse_spacing(const std::string& text, const std::string& field) {
  if (text == "linear") return Spacing::linear;
  if (text == "log") return Spacing::log;
  throw ConfigError(field, "spacing must be 'linear' or 'log'");
}

std::string spacing_name(Spacing s) { return s == Spacing::log ? "log" : "linear"; }

json finite_or_null(double x) { return std::isinf(x) ? json(nullptr) : json(x); }

bool is_known_map(const std::string& name) {
  for (const CatalogEntry& e : map_catalog())
    if (e.name == name) return true;
  return false;
}

const AuditInfo* find_audit(const std::string& name) {
  for (const AuditInfo& a : audit_catalog())
    if (a.name == name) return &a;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Output helpers

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& cell(double x) {
    rows_.back().push_back(format_double(x));
    return *this;
  }
  CsvTable& cell(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
  }
  CsvTable& cell(bool b) {
    rows_.back().push_back(b ? "1" : "0");
    return *this;
  }

  void write(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// splitmix64 finalizer; derives per-radius seeds from the configured seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

// ---------------------------------------------------------------------------
// Execution context

struct AuditOutput {
  bool pass = false;
  json details = json::object();
};

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunOptions& options)
      : config_(config), options_(options), surface_(make_surface(config.surface)),
        map_(catalog_map(config.map.name, Complex{config.map.shift_re, config.map.shift_im})),
        radii_(config.grid.points()) {
    for (const std::string& t : config.targets) targets_.push_back(ProjectivePoint::parse_label(t));
    for (const std::string& a : config.audits)
      if (a == "coarea" || a == "dynkin") needs_functionals_ = true;
  }

  AuditOutput run(const std::string& name, std::ostream& csv);

  const std::vector<std::pair<std::string, std::string>>& extra_files() const { return extra_files_; }

 private:
  static ModelSurface make_surface(const SurfaceSection& s) {
    switch (s.kind) {
      case SurfaceKind::euclidean_plane: return ModelSurface::euclidean_plane();
      case SurfaceKind::poincare_disc: return ModelSurface::poincare_disc();
      case SurfaceKind::radial: {
        const CurvatureProfile p =
            s.curvature ? CurvatureProfile::constant(*s.curvature) : CurvatureProfile::load(s.profile_file);
        return ModelSurface::radial(p, s.chart_radius);
      }
    }
    throw ConfigError("surface.kind", "unknown surface");
  }

  void log(const std::string& line) const {
    if (options_.verbosity > 0 && options_.log) *options_.log << line << '\n';
  }

  unsigned workers() const {
    if (config_.sim.workers) return config_.sim.workers;
    if (const char* env = std::getenv("NEVLAB_WORKERS")) {
      const long w = std::strtol(env, nullptr, 10);
      if (w > 0) return static_cast<unsigned>(w);
    }
    return 0;
  }

  SimConfig sim_for(std::size_t i) const {
    SimConfig s;
    const double r = radii_[i];
    s.radius = r;
    s.step_dt = config_.sim.step_scales_with_r2 ? config_.sim.step * r * r : config_.sim.step;
    s.max_paths = config_.sim.paths;
    s.base_seed = mix_seed(*config_.sim.seed, i);
    s.max_steps = config_.sim.max_steps;
    s.workers = workers();
    return s;
  }

  // Slots: 0 phi = 1, 1 phi = r(x)^2, then Delta_S u for each Dynkin test.
  static std::vector<std::pair<std::string, DynkinTest>> dynkin_tests() {
    return {
        {"re_z", {[](Complex z) { return z.real(); }, [](Complex) { return 0.0; }}},
        {"abs_z_squared", {[](Complex z) { return std::norm(z); }, [](Complex) { return 4.0; }}},
        {"constant", {[](Complex) { return 1.0; }, [](Complex) { return 0.0; }}},
    };
  }

  OccupationTest coarea_test(int which) const {
    if (which == 0) return {[](Complex) { return 1.0; }, [](double) { return 1.0; }};
    const ModelSurface s = surface_;
    return {[s](Complex z) {
              const double r = s.geodesic_radius(z);
              return r * r;
            },
            [](double t) { return t * t; }};
  }

  const Ensemble& ensemble(std::size_t i) {
    auto it = ensembles_.find(i);
    if (it != ensembles_.end()) return it->second;
    std::vector<PointFunction> functionals;
    if (needs_functionals_) {
      functionals.push_back(coarea_test(0).at_point);
      functionals.push_back(coarea_test(1).at_point);
      for (const auto& [name, u] : dynkin_tests()) functionals.push_back(dynkin_occupation(surface_, u));
    }
    const auto t0 = std::chrono::steady_clock::now();
    Ensemble e = run_ensemble(surface_, sim_for(i), functionals);
    log("  ensemble r=" + format_double(radii_[i]) + " paths=" + std::to_string(e.paths.size()) + " in " +
        std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    if (options_.dump_paths) {
      std::ostringstream out;
      std::vector<std::string> names;
      if (needs_functionals_) {
        names = {"occ_one", "occ_r2"};
        for (const auto& [name, u] : dynkin_tests()) names.push_back("occ_lap_" + name);
      }
      write_path_records(out, e, names);
      extra_files_.emplace_back("paths_" + std::to_string(i) + ".csv", out.str());
    }
    return ensembles_.emplace(i, std::move(e)).first->second;
  }

  AuditOutput radial_green_consistency_audit(std::ostream& csv);
  AuditOutput atsuji_audit(std::ostream& csv);
  AuditOutput exit_time_audit(std::ostream& csv);
  AuditOutput coarea_run(std::ostream& csv);
  AuditOutput dynkin_run(std::ostream& csv);
  AuditOutput exit_distribution_run(std::ostream& csv);
  AuditOutput fmt_audit(std::ostream& csv);
  AuditOutput singular_form_audit(std::ostream& csv);
  AuditOutput outcome_audit(const AuditOutcome& o, std::ostream& csv);

  const ExperimentConfig& config_;
  const RunOptions& options_;
  ModelSurface surface_;
  MeromorphicMap map_;
  std::vector<double> radii_;
  std::vector<ProjectivePoint> targets_;
  bool needs_functionals_ = false;
  std::map<std::size_t, Ensemble> ensembles_;
  std::vector<std::pair<std::string, std::string>> extra_files_;
};

AuditOutput Runner::radial_green_consistency_audit(std::ostream& csv) {
  CsvTable t({"r", "max_deviation", "pass"});
  AuditOutput out;
  out.pass = true;
  double worst = 0.0;
  for (double r : radii_) {
    std::vector<double> probe(static_cast<std::size_t>(config_.params.green_samples));
    for (std::size_t j = 0; j < probe.size(); ++j)
      probe[j] = r * static_cast<double>(j + 1) / static_cast<double>(probe.size() + 1);
    const double d = radial_green_consistency(surface_, r, probe);
    const bool ok = d <= config_.tolerances.green_abs;
    out.pass = out.pass && ok;
    worst = std::max(worst, d);
    t.row().cell(r).cell(d).cell(ok);
  }
  t.write(csv);
  out.details["max_deviation"] = worst;
  return out;
}

AuditOutput Runner::atsuji_audit(std::ostream& csv) {
  CsvTable t({"r", "constant", "min_ratio", "pass"});
  AuditOutput out;
  out.pass = true;
  const JacobiSolution g = comparison_solution(surface_, radii_.back());
  double envelope = std::numeric_limits<double>::infinity();
  for (double r : radii_) {
    if (r <= config_.params.eta) throw Error(Errc::invalid_configuration, "atsuji_bound needs radii above eta");
    std::vector<double> probe;
    for (int j = 1; j <= 32; ++j) probe.push_back(config_.params.eta + (r - config_.params.eta) * j / 33.0);
    const AtsujiAudit a = atsuji_bound_audit(g, GreenKernel(surface_, r), config_.params.eta, probe);
    const double min_ratio = *std::min_element(a.ratios.begin(), a.ratios.end());
    const bool ok = std::isfinite(a.constant) && a.constant > 0.0;
    out.pass = out.pass && ok;
    envelope = std::min(envelope, a.constant);
    t.row().cell(r).cell(a.constant).cell(min_ratio).cell(ok);
  }
  t.write(csv);
  out.details["envelope_constant"] = envelope;
  out.details["eta"] = config_.params.eta;
  return out;
}

AuditOutput Runner::exit_time_audit(std::ostream& csv) {
  CsvTable t({"r", "mean", "std_error", "n", "reference", "upper_bound", "pass"});
  AuditOutput out;
  out.pass = true;
  const double k = config_.tolerances.sigma;
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    const double r = radii_[i];
    const MCEstimate e = exit_time_of(ensemble(i));
    // Coarea with phi = 1: E[tau] is the Green volume of the ball.
    const double reference = green_radial_integral(GreenKernel(surface_, r), [](double) { return 1.0; });
    const double bound = 2.0 * r * r;
    const bool ok = std::abs(e.mean - reference) <= k * e.std_error && e.mean <= bound + k * e.std_error;
    out.pass = out.pass && ok;
    t.row().cell(r).cell(e.mean).cell(e.std_error).cell(static_cast<double>(e.n)).cell(reference).cell(bound).cell(ok);
  }
  t.write(csv);
  return out;
}

AuditOutput Runner::coarea_run(std::ostream& csv) {
  CsvTable t({"r", "phi", "mc_mean", "mc_std_error", "quadrature", "pass"});
  AuditOutput out;
  out.pass = true;
  const char* names[2] = {"one", "r_squared"};
  for (std::size_t i = 0; i < radii_.size(); ++i)
    for (int which = 0; which < 2; ++which) {
      const CoareaResult c = coarea_from(ensemble(i), static_cast<std::size_t>(which), surface_, radii_[i],
                                         coarea_test(which));
      const bool ok = std::abs(c.monte_carlo.mean - c.quadrature) <= config_.tolerances.sigma * c.monte_carlo.std_error;
      out.pass = out.pass && ok;
      t.row().cell(radii_[i]).cell(std::string(names[which])).cell(c.monte_carlo.mean).cell(c.monte_carlo.std_error)
          .cell(c.quadrature).cell(ok);
    }
  t.write(csv);
  return out;
}

AuditOutput Runner::dynkin_run(std::ostream& csv) {
  CsvTable t({"r", "u", "boundary_mean", "start_value", "half_occupation", "residual", "sigma", "pass"});
  AuditOutput out;
  out.pass = true;
  const auto tests = dynkin_tests();
  for (std::size_t i = 0; i < radii_.size(); ++i)
    for (std::size_t j = 0; j < tests.size(); ++j) {
      const DynkinResult d = dynkin_from(ensemble(i), 2 + j, tests[j].second);
      const bool ok = d.residual <= config_.tolerances.sigma * d.sigma + 1e-12;
      out.pass = out.pass && ok;
      t.row().cell(radii_[i]).cell(tests[j].first).cell(d.boundary_mean).cell(d.start_value).cell(d.half_occupation)
          .cell(d.residual).cell(d.sigma).cell(ok);
    }
  t.write(csv);
  return out;
}

AuditOutput Runner::exit_distribution_run(std::ostream& csv) {
  CsvTable t({"r", "bin", "count"});
  AuditOutput out;
  out.pass = true;
  json per_radius = json::array();
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    const ExitDistribution d = exit_distribution_of(ensemble(i), config_.params.bins);
    const bool ok = d.p_value >= config_.tolerances.chi_square_alpha;
    out.pass = out.pass && ok;
    for (std::size_t b = 0; b < d.counts.size(); ++b)
      t.row().cell(radii_[i]).cell(static_cast<double>(b)).cell(static_cast<double>(d.counts[b]));
    per_radius.push_back({{"r", radii_[i]}, {"statistic", d.statistic}, {"dof", d.degrees_of_freedom},
                          {"p_value", d.p_value}, {"pass", ok}});
  }
  t.write(csv);
  out.details["chi_square"] = per_radius;
  return out;
}

AuditOutput Runner::fmt_audit(std::ostream& csv) {
  std::vector<std::string> header{"r"};
  std::vector<std::vector<double>> cols;
  AuditOutput out;
  out.pass = true;
  std::vector<double> log_r;
  for (double r : radii_) log_r.push_back(std::log(r));
  for (const ProjectivePoint& a : targets_) {
    header.push_back("residual@" + a.label());
    cols.push_back(fmt_residual(map_, a, surface_, radii_));
    const auto [lo, hi] = std::minmax_element(cols.back().begin(), cols.back().end());
    const double window = *hi - *lo;
    const double trend = slope(log_r, cols.back());
    const bool ok = window <= config_.tolerances.fmt_window && std::abs(trend) < config_.tolerances.fmt_slope;
    out.pass = out.pass && ok;
    out.details[a.label()] = {{"window", window}, {"slope", trend}, {"base_weil", base_weil(map_, a)}, {"pass", ok}};
  }
  CsvTable t(header);
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    t.row().cell(radii_[i]);
    for (const auto& c : cols) t.cell(c[i]);
  }
  t.write(csv);
  return out;
}

AuditOutput Runner::singular_form_audit(std::ostream& csv) {
  const std::size_t n = radii_.size();
  std::vector<double> phi(n), classical(n), spherical(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = singular_form_T(map_, surface_, radii_[i]);
    classical[i] = classical_T(map_, surface_, radii_[i]);
    spherical[i] = characteristic_T(map_, surface_, radii_[i]).value;
  }
  // The constant is frozen on the leading part of the grid and then held fixed.
  const std::size_t frozen =
      std::max<std::size_t>(1, static_cast<std::size_t>(config_.params.freeze_fraction * static_cast<double>(n)));
  double c = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < frozen; ++i) c = std::max(c, phi[i] - classical[i]);
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = classical[i] + c;
  AuditOutcome o = make_outcome("singular_form", radii_, phi, rhs, 0.0);
  o.extra = {{"T", classical}, {"T_hat", spherical}};
  o.details["C"] = c;
  o.details["frozen_points"] = frozen;
  o.write_csv(csv);
  AuditOutput out;
  out.pass = o.margins_finite && o.min_margin >= -1e-9 * std::max(1.0, std::abs(c));
  out.details = o.summary();
  return out;
}

AuditOutput Runner::outcome_audit(const AuditOutcome& o, std::ostream& csv) {
  o.write_csv(csv);
  AuditOutput out;
  out.pass = o.verdict;
  out.details = o.summary();
  return out;
}

AuditOutput Runner::run(const std::string& name, std::ostream& csv) {
  const ParamSection& p = config_.params;
  if (name == "radial_green_consistency") return radial_green_consistency_audit(csv);
  if (name == "atsuji_bound") return atsuji_audit(csv);
  if (name == "exit_time") return exit_time_audit(csv);
  if (name == "coarea") return coarea_run(csv);
  if (name == "dynkin") return dynkin_run(csv);
  if (name == "exit_distribution") return exit_distribution_run(csv);
  if (name == "fmt_residual") return fmt_audit(csv);
  if (name == "singular_form") return singular_form_audit(csv);
  if (name == "borel") {
    std::vector<double> u;
    for (double r : radii_) u.push_back(characteristic_T(map_, surface_, r).value);
    return outcome_audit(borel_audit(radii_, u, p.delta, p.budget), csv);
  }
  if (name == "calculus_lemma") {
    const MeromorphicMap& f = map_;
    const ModelSurface s = surface_;
    OccupationTest k{[&f, s](Complex z) { return f.spherical_density(z) / (2.0 * s.conformal_factor(z)); }, {}};
    CalculusLemmaOptions opt;
    opt.eta = p.eta;
    opt.budget = p.budget;
    return outcome_audit(calculus_lemma_audit(k, surface_, radii_, p.delta, opt), csv);
  }
  if (name == "ldl") {
    const int k = p.derivative_order;
    const LdlEnvelope env = calibrate_ldl(catalog_map(p.calibration_map), surface_, k, radii_);
    AuditOutcome o = with_extension_check(
        [&](std::span<const double> rr) { return ldl_audit(map_, surface_, k, rr, env, p.budget); }, config_.grid);
    o.details["calibration_map"] = p.calibration_map;
    return outcome_audit(o, csv);
  }
  if (name == "derivative_growth")
    return outcome_audit(derivative_growth_audit(map_, surface_, p.derivative_order, radii_, p.budget), csv);
  if (name == "metric_match") {
    const MetricMatch m = metric_match_audit(map_, p.euclidean_radii);
    CsvTable t({"euclidean_radius", "hyperbolic_radius", "T_poincare", "T_euclidean_disc", "deviation"});
    for (const MetricMatchRow& row : m.rows)
      t.row().cell(row.euclidean_radius).cell(row.hyperbolic_radius).cell(row.poincare).cell(row.euclidean_disc)
          .cell(row.deviation);
    t.write(csv);
    AuditOutput out;
    out.pass = m.max_deviation < config_.tolerances.metric_rel;
    out.details["max_deviation"] = m.max_deviation;
    return out;
  }
  if (name == "smt_curve") {
    SmtOptions opt;
    opt.budget = p.budget;
    const SmtResult r = smt_curve_audit(map_, targets_, surface_, radii_, opt);
    return outcome_audit(r.outcome, csv);
  }
  throw ConfigError("audits", "unknown audit '" + name + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.surface == b.surface && a.map == b.map && a.grid.min == b.grid.min && a.grid.max == b.grid.max &&
         a.grid.count == b.grid.count && a.grid.spacing == b.grid.spacing && a.sim == b.sim &&
         a.audits == b.audits && a.targets == b.targets && a.output_dir == b.output_dir && a.params == b.params &&
         a.tolerances == b.tolerances;
}

const std::vector<AuditInfo>& audit_catalog() {
  static const std::vector<AuditInfo> catalog = [] {
    std::vector<AuditInfo> c{
        {"atsuji_bound", false, "empirical Green lower-bound constant per ball radius; params: eta"},
        {"borel", false, "growth lemma on the spherical characteristic; params: delta, budget"},
        {"calculus_lemma", false, "harmonic mean vs occupation bound for the pulled-back density; params: delta, eta, budget"},
        {"coarea", true, "occupation sums vs Green quadrature for phi in {1, r(x)^2}; needs sim.seed"},
        {"derivative_growth", false, "T of the k-th derivative against 2^k T plus error terms; params: derivative_order"},
        {"dynkin", true, "Dynkin identity for u in {Re z, |z|^2, 1}; needs sim.seed"},
        {"exit_distribution", true, "chi-square test of exit-angle uniformity; params: bins; needs sim.seed"},
        {"exit_time", true, "mean exit time vs Green volume and the 2 r^2 bound; needs sim.seed"},
        {"fmt_residual", false, "first main theorem residual window and trend per target"},
        {"ldl", false, "logarithmic derivative lemma with calibrated envelope; params: derivative_order, calibration_map"},
        {"metric_match", false, "Poincare vs Euclidean disc characteristic; params: euclidean_radii"},
        {"radial_green_consistency", false, "radial Green quadrature vs closed form; params: green_samples"},
        {"singular_form", false, "singular-form characteristic against T plus a frozen constant; params: freeze_fraction"},
        {"smt_curve", false, "(q-2) T <= sum N1 + envelope, defects and extremality; needs >= 3 targets"},
    };
    std::sort(c.begin(), c.end(), [](const AuditInfo& x, const AuditInfo& y) { return x.name < y.name; });
    return c;
  }();
  return catalog;
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  Section root(doc, "");
  if (const json* s = root.find("surface")) {
    Section sec(*s, "surface");
    std::string kind = to_string(c.surface.kind);
    sec.read("kind", kind);
    c.surface.kind = parse_surface_kind(kind, "surface.kind");
    if (const json* k = sec.find("curvature")) {
      if (!k->is_number()) throw ConfigError("surface.curvature", "expected a number");
      c.surface.curvature = k->get<double>();
    }
    sec.read("profile_file", c.surface.profile_file);
    sec.read("chart_radius", c.surface.chart_radius);
    sec.finish();
  }
  if (const json* m = root.find("map")) {
    Section sec(*m, "map");
    sec.read("name", c.map.name);
    std::vector<double> shift{c.map.shift_re, c.map.shift_im};
    sec.read("shift", shift);
    if (shift.size() != 2) throw ConfigError("map.shift", "expected [re, im]");
    c.map.shift_re = shift[0];
    c.map.shift_im = shift[1];
    sec.finish();
  }
  if (const json* g = root.find("grid")) {
    Section sec(*g, "grid");
    sec.read("min", c.grid.min);
    sec.read("max", c.grid.max);
    sec.read("count", c.grid.count);
    std::string spacing = spacing_name(c.grid.spacing);
    sec.read("spacing", spacing);
    c.grid.spacing = parse_spacing(spacing, "grid.spacing");
    sec.finish();
  }
  if (const json* s = root.find("sim")) {
    Section sec(*s, "sim");
    if (const json* seed = sec.find("seed")) {
      if (!seed->is_number_unsigned()) throw ConfigError("sim.seed", "expected a non-negative integer");
      c.sim.seed = seed->get<std::uint64_t>();
    }
    sec.read("paths", c.sim.paths);
    sec.read("step", c.sim.step);
    sec.read("step_scales_with_r2", c.sim.step_scales_with_r2);
    sec.read("max_steps", c.sim.max_steps);
    sec.read("workers", c.sim.workers);
    sec.finish();
  }
  root.read("audits", c.audits);
  root.read("targets", c.targets);
  root.read("output_dir", c.output_dir);
  if (const json* p = root.find("params")) {
    Section sec(*p, "params");
    sec.read("derivative_order", c.params.derivative_order);
    sec.read("delta", c.params.delta);
    sec.read("eta", c.params.eta);
    sec.read("bins", c.params.bins);
    sec.read("calibration_map", c.params.calibration_map);
    sec.read("euclidean_radii", c.params.euclidean_radii);
    sec.read("green_samples", c.params.green_samples);
    sec.read("budget", c.params.budget);
    sec.read("freeze_fraction", c.params.freeze_fraction);
    sec.finish();
  }
  if (const json* t = root.find("tolerances")) {
    Section sec(*t, "tolerances");
    sec.read("sigma", c.tolerances.sigma);
    sec.read("green_abs", c.tolerances.green_abs);
    sec.read("metric_rel", c.tolerances.metric_rel);
    sec.read("fmt_window", c.tolerances.fmt_window);
    sec.read("fmt_slope", c.tolerances.fmt_slope);
    sec.read("chi_square_alpha", c.tolerances.chi_square_alpha);
    sec.finish();
  }
  root.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json surface{{"kind", to_string(c.surface.kind)}, {"chart_radius", c.surface.chart_radius}};
  if (c.surface.curvature) surface["curvature"] = *c.surface.curvature;
  if (!c.surface.profile_file.empty()) surface["profile_file"] = c.surface.profile_file;
  json sim{{"paths", c.sim.paths},
           {"step", c.sim.step},
           {"step_scales_with_r2", c.sim.step_scales_with_r2},
           {"max_steps", c.sim.max_steps},
           {"workers", c.sim.workers}};
  if (c.sim.seed) sim["seed"] = *c.sim.seed;
  return {
      {"surface", surface},
      {"map", {{"name", c.map.name}, {"shift", {c.map.shift_re, c.map.shift_im}}}},
      {"grid", {{"min", c.grid.min}, {"max", c.grid.max}, {"count", c.grid.count}, {"spacing", spacing_name(c.grid.spacing)}}},
      {"sim", sim},
      {"audits", c.audits},
      {"targets", c.targets},
      {"output_dir", c.output_dir},
      {"params",
       {{"derivative_order", c.params.derivative_order},
        {"delta", c.params.delta},
        {"eta", c.params.eta},
        {"bins", c.params.bins},
        {"calibration_map", c.params.calibration_map},
        {"euclidean_radii", c.params.euclidean_radii},
        {"green_samples", c.params.green_samples},
        {"budget", finite_or_null(c.params.budget)},
        {"freeze_fraction", c.params.freeze_fraction}}},
      {"tolerances",
       {{"sigma", c.tolerances.sigma},
        {"green_abs", c.tolerances.green_abs},
        {"metric_rel", c.tolerances.metric_rel},
        {"fmt_window", c.tolerances.fmt_window},
        {"fmt_slope", c.tolerances.fmt_slope},
        {"chi_square_alpha", c.tolerances.chi_square_alpha}}},
  };
}

void validate(const ExperimentConfig& c) {
  // Grid.
  if (!std::isfinite(c.grid.min) || !(c.grid.min > 0.0)) throw ConfigError("grid.min", "must be positive");
  if (!std::isfinite(c.grid.max) || !(c.grid.max > c.grid.min))
    throw ConfigError("grid.max", "grid must be strictly increasing (max > min)");
  if (c.grid.count < 2) throw ConfigError("grid.count", "need at least 2 points");
  try {
    c.grid.validate();
  } catch (const Error& e) {
    throw ConfigError("grid", e.what());
  }

  // Surface.
  const SurfaceSection& s = c.surface;
  if (s.kind == SurfaceKind::radial) {
    if (s.curvature.has_value() == !s.profile_file.empty())
      throw ConfigError("surface", "radial surfaces need exactly one of curvature or profile_file");
    if (s.curvature && !(*s.curvature <= 0.0)) throw ConfigError("surface.curvature", "must be <= 0");
    if (!(s.chart_radius > 0.0)) throw ConfigError("surface.chart_radius", "must be positive");
    if (c.grid.max > s.chart_radius) throw ConfigError("grid.max", "exceeds surface.chart_radius");
    if (!s.profile_file.empty()) {
      try {
        CurvatureProfile::load(s.profile_file);
      } catch (const Error& e) {
        throw ConfigError("surface.profile_file", e.what());
      }
    }
  } else if (s.curvature || !s.profile_file.empty()) {
    throw ConfigError("surface", "curvature and profile_file apply to radial surfaces only");
  }

  // Map and targets.
  if (!is_known_map(c.map.name)) throw ConfigError("map.name", "unknown map '" + c.map.name + "'");
  std::vector<ProjectivePoint> targets;
  for (std::size_t i = 0; i < c.targets.size(); ++i) {
    try {
      targets.push_back(ProjectivePoint::parse_label(c.targets[i]));
    } catch (const Error& e) {
      throw ConfigError("targets[" + std::to_string(i) + "]", e.what());
    }
    for (std::size_t j = 0; j < i; ++j)
      if (targets[j] == targets[i]) throw ConfigError("targets[" + std::to_string(i) + "]", "duplicate target");
  }

  // Audits.
  if (c.audits.empty()) throw ConfigError("audits", "select at least one audit");
  bool stochastic = false;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < c.audits.size(); ++i) {
    const std::string field = "audits[" + std::to_string(i) + "]";
    const AuditInfo* info = find_audit(c.audits[i]);
    if (!info) throw ConfigError(field, "unknown audit '" + c.audits[i] + "'");
    if (!seen.insert(c.audits[i]).second) throw ConfigError(field, "duplicate audit");
    stochastic = stochastic || info->stochastic;
  }
  auto selected = [&](const char* name) { return seen.count(name) > 0; };
  if (stochastic && !c.sim.seed) throw ConfigError("sim.seed", "required by the selected stochastic audits");
  if (selected("smt_curve") && c.targets.size() < 3) throw ConfigError("targets", "smt_curve needs at least 3 targets");
  if (selected("fmt_residual") && c.targets.empty()) throw ConfigError("targets", "fmt_residual needs a target");
  if (selected("radial_green_consistency") && s.kind == SurfaceKind::radial)
    throw ConfigError("surface.kind", "radial_green_consistency needs a closed-form surface");
  if (selected("ldl") && s.kind == SurfaceKind::radial && c.grid.extended().max > s.chart_radius)
    throw ConfigError("grid.max", "ldl extends the grid twofold, past surface.chart_radius");
  if (selected("calculus_lemma") && !(c.grid.min > 1.0))
    throw ConfigError("grid.min", "calculus_lemma needs radii above 1");
  if ((selected("calculus_lemma") || selected("atsuji_bound")) && !(c.params.eta < c.grid.min))
    throw ConfigError("params.eta", "must lie below grid.min");

  // Simulation.
  if (stochastic) {
    if (c.sim.paths < 2) throw ConfigError("sim.paths", "need at least 2 paths");
    if (!(c.sim.step > 0.0)) throw ConfigError("sim.step", "must be positive");
    if (c.sim.max_steps == 0) throw ConfigError("sim.max_steps", "must be positive");
    if (selected("exit_distribution") && c.sim.paths < 5ULL * static_cast<std::uint64_t>(std::max(c.params.bins, 0)))
      throw ConfigError("sim.paths", "exit_distribution needs at least 5 paths per bin");
  }

  // Parameters.
  const ParamSection& p = c.params;
  if (p.derivative_order < 1) throw ConfigError("params.derivative_order", "must be >= 1");
  if (!(p.delta > 0.0)) throw ConfigError("params.delta", "must be positive");
  if (!(p.eta > 0.0)) throw ConfigError("params.eta", "must be positive");
  if (p.bins < 2) throw ConfigError("params.bins", "need at least 2 bins");
  if (!is_known_map(p.calibration_map)) throw ConfigError("params.calibration_map", "unknown map");
  for (std::size_t i = 0; i < p.euclidean_radii.size(); ++i)
    if (!(p.euclidean_radii[i] > 0.0 && p.euclidean_radii[i] <= 0.999))
      throw ConfigError("params.euclidean_radii[" + std::to_string(i) + "]", "must lie in (0, 0.999]");
  if (selected("metric_match") && p.euclidean_radii.empty())
    throw ConfigError("params.euclidean_radii", "metric_match needs radii");
  if (p.green_samples < 1) throw ConfigError("params.green_samples", "must be positive");
  if (!(p.budget > 0.0)) throw ConfigError("params.budget", "must be positive");
  if (!(p.freeze_fraction > 0.0 && p.freeze_fraction < 1.0))
    throw ConfigError("params.freeze_fraction", "must lie in (0, 1)");

  // Tolerances.
  const ToleranceSection& t = c.tolerances;
  const std::pair<const char*, double> tols[] = {{"sigma", t.sigma},           {"green_abs", t.green_abs},
                                                 {"metric_rel", t.metric_rel}, {"fmt_window", t.fmt_window},
                                                 {"fmt_slope", t.fmt_slope},   {"chi_square_alpha", t.chi_square_alpha}};
  for (const auto& [name, value] : tols)
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(std::string("tolerances.") + name, "must be positive");

  if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a_hex(to_json(config).dump()); }

bool RunResult::all_pass() const {
  return std::all_of(audits.begin(), audits.end(), [](const AuditStatus& a) { return a.status == "pass"; });
}

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  namespace fs = std::filesystem;
  const fs::path dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());

  Runner runner(config, options);
  RunResult result;
  json audits = json::array();
  json outputs = json::object();
  auto emit = [&](const std::string& file, const std::string& bytes) {
    std::ofstream out(dir / file, std::ios::binary);
    out << bytes;
    if (!out) throw Error(Errc::io, "cannot write " + (dir / file).string());
    outputs[file] = fnv1a_hex(bytes);
  };

  for (const std::string& name : config.audits) {
    const auto t0 = std::chrono::steady_clock::now();
    AuditStatus status{name, "error", ""};
    json entry{{"name", name}};
    std::ostringstream csv;
    try {
      AuditOutput out = runner.run(name, csv);
      status.status = out.pass ? "pass" : "fail";
      entry["details"] = std::move(out.details);
      emit(name + ".csv", csv.str());
    } catch (const Error& e) {
      status.message = e.what();
      entry["error_kind"] = to_string(e.code());
    }
    entry["status"] = status.status;
    if (!status.message.empty()) entry["message"] = status.message;
    audits.push_back(entry);
    if (options.verbosity > 0 && options.log)
      *options.log << name << ": " << status.status << " ("
                   << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)"
                   << (status.message.empty() ? "" : " " + status.message) << '\n';
    result.audits.push_back(std::move(status));
  }
  for (const auto& [file, bytes] : runner.extra_files()) emit(file, bytes);

  const std::string hash = config_hash(config);
  const json summary{{"config_hash", hash}, {"verdict", result.all_pass() ? "pass" : "fail"}, {"audits", audits}};
  emit("summary.json", summary.dump(2) + "\n");

  json versions = json::object();
  for (const auto& [k, v] : build_versions()) versions[k] = v;
  const json manifest{{"config_hash", hash},
                      {"seed", config.sim.seed ? json(*config.sim.seed) : json(nullptr)},
                      {"versions", versions},
                      {"config", to_json(config)},
                      {"outputs", outputs}};
  std::ofstream mout(dir / "manifest.json", std::ios::binary);
  mout << manifest.dump(2) << '\n';
  if (!mout) throw Error(Errc::io, "cannot write manifest.json");
  return result;
}

void list_catalog(std::ostream& out) {
  out << "maps:\n";
  for (const CatalogEntry& e : map_catalog()) out << "  " << e.name << "  " << e.description << '\n';
  out << "surfaces:\n"
      << "  euclidean_plane  g = 1/2, J(r) = r\n"
      << "  poincare_disc  g = 2/(1-|z|^2)^2, J(r) = sinh r\n"
      << "  radial  curvature profile from surface.curvature or surface.profile_file\n";
  out << "audits:\n";
  for (const AuditInfo& a : audit_catalog())
    out << "  " << a.name << (a.stochastic ? " [stochastic]" : "") << "  " << a.description << '\n';
}

}  // namespace nevlab::cli
