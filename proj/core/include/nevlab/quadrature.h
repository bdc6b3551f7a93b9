#pragma once

#include <span>

#include "nevlab/function_ref.h"

namespace nevlab {

struct QuadOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-10;
  // Hard cap on the number of live subintervals. Running into it means the
  // integrand is not resolvable (typically a non-integrable singularity).
  int max_intervals = 4000;
  // The range is first cut into this many equal panels.
  int initial_panels = 1;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature: the subinterval with the
/// largest error estimate is bisected until the total estimate meets
/// max(abs_tol, rel_tol * |value|). Nodes never touch the endpoints, so
/// integrable endpoint singularities are fine.
QuadResult integrate(FunctionRef<double(double)> f, double a, double b,
                     const QuadOptions& options = {});

/// Same, with the range pre-split at the given interior breakpoints (which must
/// be sorted and inside (a, b); others are ignored).
QuadResult integrate(FunctionRef<double(double)> f, double a, double b,
                     std::span<const double> breakpoints, const QuadOptions& options = {});

/// Integrates f and throws Error(integrability) when the adaptive scheme does
/// not converge. `what` names the integral in the diagnostic.
double integrate_or_throw(FunctionRef<double(double)> f, double a, double b,
                          const QuadOptions& options, const char* what);

}  // namespace nevlab
