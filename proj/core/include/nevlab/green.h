#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "nevlab/function_ref.h"
#include "nevlab/quadrature.h"
#include "nevlab/surface.h"

namespace nevlab {

enum class GreenForm { closed_euclidean, closed_poincare, radial_numeric };

/// Green function g_r(o, .) of Delta_S / 2 on the geodesic ball D(r) with
/// Dirichlet boundary values and pole at the base point. On every model surface
/// it depends on the geodesic radius r(x) only:
///   g_r(o, x) = (1/pi) * integral_{r(x)}^r dt / J(t).
class GreenKernel {
 public:
  /// Closed form on the Euclidean plane and the Poincare disc, radial quadrature
  /// on radial surfaces.
  GreenKernel(ModelSurface surface, double radius);

  /// Radial-quadrature form on any surface. For the closed-form models the
  /// Jacobi equation of their constant curvature is solved with `step`.
  static GreenKernel radial_numeric(ModelSurface surface, double radius, double step = 1e-4);

  const ModelSurface& surface() const { return surface_; }
  double radius() const { return radius_; }
  GreenForm form() const { return form_; }
  /// |z| of the points on the boundary circle.
  double boundary_modulus() const { return boundary_modulus_; }

  /// g_r(o, x) for r(x) = s. Throws pole for s = 0 and domain for s > r.
  double value_at_radius(double s) const;
  double value(Complex z) const { return value_at_radius(surface_.geodesic_radius(z)); }

 private:
  GreenKernel() = default;

  ModelSurface surface_ = ModelSurface::euclidean_plane();
  double radius_ = 0.0;
  double boundary_modulus_ = 0.0;
  GreenForm form_ = GreenForm::closed_euclidean;
  std::shared_ptr<const JacobiSolution> jacobi_;
};

double green_value(const GreenKernel& kernel, Complex z);

/// sup over `radii` of |closed form - radial quadrature| (step 1e-4) on the
/// Euclidean plane or the Poincare disc.
double radial_green_consistency(const ModelSurface& surface, double radius,
                                std::span<const double> radii);

struct AtsujiAudit {
  double constant = 0.0;        // C* = min over the grid
  std::vector<double> ratios;   // per grid point
};

/// Empirical constant of the Green lower bound
///   g_r(o,x) * int_eta^r dt/G  >=  C * int_{r(x)}^r dt/G
/// over grid points eta < r(x) < r.
AtsujiAudit atsuji_bound_audit(const JacobiSolution& comparison, const GreenKernel& kernel,
                               double eta, std::span<const double> radii);

/// Lower envelope of C* across a family of ball radii, each probed on
/// `points` interior radii spread over (eta, r).
double atsuji_envelope(const JacobiSolution& comparison, const ModelSurface& surface, double eta,
                       std::span<const double> ball_radii, int points = 32);

/// Integral of psi against the harmonic measure of D(r) seen from the centre,
/// i.e. the mean of psi over the boundary circle with dtheta / 2pi. psi is a
/// function of the angle. Integrable log singularities are resolved by the
/// adaptive rule; a non-integrable singularity raises Error(integrability).
double harmonic_expectation(const ModelSurface& surface, double radius,
                            FunctionRef<double(double)> psi);

/// Same, with psi given as a function of the conformal coordinate.
double harmonic_expectation_at(const ModelSurface& surface, double radius,
                               FunctionRef<double(Complex)> psi);

/// int_{D(r)} g_r(o,x) phi(x) dV(x) for phi depending on the geodesic radius
/// only: int_0^r g_r(t) phi(t) 2 pi J(t) dt.
double green_radial_integral(const GreenKernel& kernel, FunctionRef<double(double)> phi);

/// int_{D(r)} g_r(o,x) phi(x) dV(x) for a general phi(z), in geodesic polar
/// coordinates.
double green_integral(const GreenKernel& kernel, FunctionRef<double(Complex)> phi);

/// Two-column table "r_x,g" with `samples` rows over (0, r].
void write_kernel_table(std::ostream& out, const GreenKernel& kernel, int samples);

}  // namespace nevlab
