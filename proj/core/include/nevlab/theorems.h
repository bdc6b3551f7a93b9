#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "nevlab/audit.h"
#include "nevlab/brownian.h"
#include "nevlab/meromorphic.h"
#include "nevlab/surface.h"

namespace nevlab {

constexpr double kNoBudget = std::numeric_limits<double>::infinity();

/// u'(r) <= u(r) (log+ u(r))^(1+delta) with u' from nonuniform central
/// differences. Throws Error(monotonicity) on decreasing samples.
AuditOutcome borel_audit(std::span<const double> radii, std::span<const double> u, double delta,
                         double budget = kNoBudget);

/// Jacobi solution of the surface's own curvature profile, out to r_max.
JacobiSolution comparison_solution(const ModelSurface& surface, double r_max);

struct CalculusLemmaOptions {
  double eta = 0.5;
  /// Green lower-bound constant; taken from the Atsuji envelope over the grid
  /// when unset.
  std::optional<double> constant;
  double budget = kNoBudget;
};

/// E_o[k(X_tau)] <= F(k^, kappa, delta) e^{r sqrt(-kappa(r))} log r / (2 pi C) * E_o[int k dt]
/// with both expectations by quadrature (harmonic measure and Green kernel).
/// Extra columns: E_int_k, k_hat, F, and the ratio of log+ F to
/// 1 + log+ log+ E[int k] + log+(r sqrt(-kappa)) + log+ log r. Radii must exceed 1.
AuditOutcome calculus_lemma_audit(const OccupationTest& k, const ModelSurface& surface,
                                  std::span<const double> radii, double delta,
                                  const CalculusLemmaOptions& options = {});

/// Coefficients of log+ log T, the curvature error, log+ log r and 1 in the LDL envelope.
using LdlEnvelope = std::array<double, 4>;

/// Curvature error term: -kappa(r) r^2 in general, r on the Poincare disc.
double ldl_error_term(const ModelSurface& surface, double r);

/// m(r, psi^(k) / psi) = mean of log+ |psi^(k) / psi| on the boundary circle.
double log_derivative_proximity(const MeromorphicMap& f, const ModelSurface& surface, double r, int k);

/// Smallest (in sum) non-negative envelope with zero margin deficit on the
/// calibration map over the grid, by exhaustive vertex search of the LP.
LdlEnvelope calibrate_ldl(const MeromorphicMap& calibration, const ModelSurface& surface, int k,
                          std::span<const double> radii);

/// m(r, psi^(k)/psi) <= (5k/4) log T(r, psi) + c1 log+ log T + c2 E(r) + c3 log+ log r + c4.
AuditOutcome ldl_audit(const MeromorphicMap& f, const ModelSurface& surface, int k,
                       std::span<const double> radii, const LdlEnvelope& envelope,
                       double budget = kNoBudget);

/// T(r, psi^(k)) <= 2^k T(r, psi) + log+ T(r, psi) + E(r) + log+ log r.
AuditOutcome derivative_growth_audit(const MeromorphicMap& f, const ModelSurface& surface, int k,
                                     std::span<const double> radii, double budget = kNoBudget);

struct MetricMatchRow {
  double euclidean_radius = 0.0;   // r~
  double hyperbolic_radius = 0.0;  // r
  double poincare = 0.0;           // Green-kernel characteristic on the disc at r
  double euclidean_disc = 0.0;     // int_0^r~ dt/t A(t) by the area ODE
  double deviation = 0.0;          // |difference| / max(1, |euclidean_disc|)
};

struct MetricMatch {
  std::vector<MetricMatchRow> rows;
  double max_deviation = 0.0;
};

/// Characteristic of f on the Poincare disc at r = log((1+r~)/(1-r~)) against
/// the classical Ahlfors-Shimizu characteristic of the Euclidean disc of radius
/// r~, the latter from RK4 on A' = a(t)/pi, T' = A/t. Throws Error(range) for
/// r~ outside (0, 0.999].
MetricMatch metric_match_audit(const MeromorphicMap& f, std::span<const double> euclidean_radii,
                               int ode_steps = 2000);

struct Defect {
  ProjectivePoint target;
  double delta = 0.0;
};

struct SmtOptions {
  double envelope_log_t = 1.0;   // coefficient of log+ T^
  double envelope_radius = 1.0;  // coefficient of log+ r (plane) or r (disc)
  double defect_slack = 1e-9;
  double budget = kNoBudget;
};

struct SmtResult {
  AuditOutcome outcome;
  std::vector<Defect> defects;
  double defect_sum = 0.0;
  bool defect_relation = false;  // defect_sum <= 2 + slack
  /// (sum N1 - (q-2) T^) / T^ at the largest radius.
  double extremality = 0.0;
};

/// (q-2) T^(r) <= sum_j N1(r, a_j) + envelope. Defects are
/// delta(a) = min over the last decade of radii of (m^(r,a) - log 1/||psi(o),a||) / T^(r),
/// clamped to [0, 1]; by the first main theorem this is 1 - N(r,a)/T^(r).
SmtResult smt_curve_audit(const MeromorphicMap& f, std::span<const ProjectivePoint> targets,
                          const ModelSurface& surface, std::span<const double> radii,
                          const SmtOptions& options = {});

}  // namespace nevlab
