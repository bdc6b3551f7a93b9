#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nevlab/green.h"
#include "nevlab/surface.h"

namespace nevlab {

struct SimConfig {
  double step_dt = 1e-4;
  std::uint64_t max_paths = 100000;
  std::uint64_t base_seed = 0;
  double radius = 1.0;
  std::uint64_t max_steps = 100'000'000;  // per path; beyond it the path is censored
  unsigned workers = 0;                   // 0 = hardware concurrency
  /// Constant drift added to every conformal increment. Zero for Brownian
  /// motion; non-zero only to build a deliberately biased stepper.
  Complex drift{0.0, 0.0};
};

void validate(const SimConfig& config);

struct StoppedPath {
  Complex exit_point;
  double exit_time = 0.0;
  std::vector<double> occupation;  // one sum of phi(X_t) dt per functional
  std::uint64_t steps = 0;
  bool censored = false;
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
};

/// Welford mean/variance with Chan's pairwise merge.
class RunningStats {
 public:
  void push(double x);
  void merge(const RunningStats& other);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  MCEstimate estimate() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Occupation functional phi, evaluated on the conformal coordinate.
using PointFunction = std::function<double(Complex)>;

/// Euler scheme for dZ = (2 g(Z))^{-1/2} dB in the conformal chart, i.e. Brownian
/// motion of Delta_S / 2. The path stops at the first grid time with r(Z) > r;
/// exit time and point are interpolated linearly across the overshoot, and a
/// Brownian-bridge test catches excursions that leave and re-enter within one
/// step (those exit at mid-step). The stream of path i is Philox keyed on the
/// base seed with counter (i, block). Throws Error(non_exit) past max_steps.
StoppedPath simulate_stopped_path(const ModelSurface& surface, const SimConfig& config,
                                  std::span<const PointFunction> functionals,
                                  std::uint64_t path_index);

struct Ensemble {
  std::vector<StoppedPath> paths;  // indexed by path_index, censored ones flagged
  std::uint64_t censored = 0;

  double censored_fraction() const {
    return paths.empty() ? 0.0 : static_cast<double>(censored) / static_cast<double>(paths.size());
  }
};

/// Simulates paths 0 .. max_paths-1 on config.workers threads. The result does
/// not depend on the worker count.
Ensemble run_ensemble(const ModelSurface& surface, const SimConfig& config,
                      std::span<const PointFunction> functionals);

/// Mean of a per-path observable over the uncensored paths, reduced in fixed
/// blocks merged in block order. Throws Error(reliability) when more than 0.1%
/// of the paths are censored.
MCEstimate summarize(const Ensemble& ensemble,
                     const std::function<double(const StoppedPath&)>& observable);

MCEstimate estimate_exit_time(const ModelSurface& surface, const SimConfig& config);
MCEstimate exit_time_of(const Ensemble& ensemble);

struct CoareaResult {
  MCEstimate monte_carlo;
  double quadrature = 0.0;
  bool agrees = false;  // |mc - quadrature| <= 3 std_error
};

/// phi may additionally be given as a function of the geodesic radius, which
/// lets the Green side use the one-dimensional radial quadrature.
struct OccupationTest {
  PointFunction at_point;
  std::function<double(double)> radial;  // optional
};

CoareaResult coarea_audit(const ModelSurface& surface, const SimConfig& config,
                          const OccupationTest& phi);
/// Same, reading occupation sums from slot `slot` of an existing ensemble.
CoareaResult coarea_from(const Ensemble& ensemble, std::size_t slot, const ModelSurface& surface,
                         double radius, const OccupationTest& phi);

/// u and its flat Laplacian Delta_0 u; Delta_S u = Delta_0 u / (2 g).
struct DynkinTest {
  PointFunction value;
  PointFunction flat_laplacian;
};

struct DynkinResult {
  double boundary_mean = 0.0;     // E[u(X_tau)]
  double start_value = 0.0;       // u(o)
  double half_occupation = 0.0;   // E[1/2 int Delta_S u dt]
  double residual = 0.0;          // |boundary - start - half_occupation|
  double sigma = 0.0;             // std error of the per-path residual
  bool agrees = false;            // residual <= 3 sigma
};

DynkinResult dynkin_audit(const ModelSurface& surface, const SimConfig& config, const DynkinTest& u);
/// Same, reading the Delta_S u occupation from slot `slot` of an ensemble that
/// registered the functional dynkin_occupation(surface, u).
DynkinResult dynkin_from(const Ensemble& ensemble, std::size_t slot, const DynkinTest& u);
PointFunction dynkin_occupation(const ModelSurface& surface, const DynkinTest& u);

struct ExitDistribution {
  std::vector<std::uint64_t> counts;
  double statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double critical_value = 0.0;  // at significance 0.001
  double p_value = 0.0;
  bool uniform = false;         // statistic <= critical value
};

ExitDistribution exit_distribution_audit(const ModelSurface& surface, const SimConfig& config,
                                         int n_bins);
ExitDistribution exit_distribution_of(const Ensemble& ensemble, int n_bins);

/// "path_index,tau,exit_angle,<names...>" records, %.17g.
void write_path_records(std::ostream& out, const Ensemble& ensemble,
                        std::span<const std::string> functional_names);

}  // namespace nevlab
