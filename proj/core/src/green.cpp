#include "nevlab/green.h"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <cmath>
#include <numbers>
#include <ostream>

#include "nevlab/errors.h"

namespace nevlab {
namespace {

constexpr double kPi = std::numbers::pi;

// Tolerance on r(x) > r before it counts as outside the ball; absorbs the
// roundoff of the modulus -> radius conversion on the boundary circle.
constexpr double kBoundarySlack = 1e-12;

}  // namespace

GreenKernel::GreenKernel(ModelSurface surface, double radius)
    : surface_(std::move(surface)), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(Errc::invalid_configuration, "Green kernel radius must be positive and finite");
  if (radius > surface_.max_radius())
    throw Error(Errc::domain, "Green kernel radius exceeds the surface chart");
  switch (surface_.kind()) {
    case SurfaceKind::euclidean_plane: form_ = GreenForm::closed_euclidean; break;
    case SurfaceKind::poincare_disc: form_ = GreenForm::closed_poincare; break;
    case SurfaceKind::radial:
      form_ = GreenForm::radial_numeric;
      jacobi_ = std::shared_ptr<const JacobiSolution>(surface_.jacobi_solution(),
                                                      [](const JacobiSolution*) {});
      break;
  }
  boundary_modulus_ = surface_.conformal_radius(radius);
}

GreenKernel GreenKernel::radial_numeric(ModelSurface surface, double radius, double step) {
  GreenKernel k(surface, radius);
  k.form_ = GreenForm::radial_numeric;
  switch (surface.kind()) {
    case SurfaceKind::euclidean_plane:
      k.jacobi_ = std::make_shared<const JacobiSolution>(
          solve_jacobi(CurvatureProfile::constant(0.0), radius, std::min(step, 0.5 * radius)));
      break;
    case SurfaceKind::poincare_disc:
      k.jacobi_ = std::make_shared<const JacobiSolution>(
          solve_jacobi(CurvatureProfile::constant(-1.0), radius, std::min(step, 0.5 * radius)));
      break;
    case SurfaceKind::radial: break;
  }
  return k;
}

double GreenKernel::value_at_radius(double s) const {
  if (!(s > 0.0)) throw Error(Errc::pole, "Green function evaluated at its pole");
  if (s > radius_ * (1.0 + kBoundarySlack))
    throw Error(Errc::domain, "Green function evaluated outside the ball");
  if (s >= radius_) return 0.0;
  switch (form_) {
    case GreenForm::closed_euclidean: return std::log(radius_ / s) / kPi;
    case GreenForm::closed_poincare: {
      const double er = std::expm1(radius_), es = std::expm1(s);
      return (std::log(er) + std::log(es + 2.0) - std::log(er + 2.0) - std::log(es)) / kPi;
    }
    case GreenForm::radial_numeric: return jacobi_->inverse_integral(s, radius_) / kPi;
  }
  return 0.0;
}

double green_value(const GreenKernel& kernel, Complex z) { return kernel.value(z); }

double radial_green_consistency(const ModelSurface& surface, double radius,
                                std::span<const double> radii) {
  if (surface.kind() == SurfaceKind::radial)
    throw Error(Errc::invalid_configuration, "closed Green forms exist only for the plane and the disc");
  const GreenKernel closed(surface, radius);
  const GreenKernel numeric = GreenKernel::radial_numeric(surface, radius, 1e-4);
  double worst = 0.0;
  for (double s : radii)
    worst = std::max(worst, std::abs(closed.value_at_radius(s) - numeric.value_at_radius(s)));
  return worst;
}

AtsujiAudit atsuji_bound_audit(const JacobiSolution& comparison, const GreenKernel& kernel,
                               double eta, std::span<const double> radii) {
  const double r = kernel.radius();
  if (radii.empty()) throw Error(Errc::invalid_configuration, "Atsuji audit grid is empty");
  if (!(eta > 0.0 && eta < r))
    throw Error(Errc::invalid_configuration, "Atsuji audit needs 0 < eta < r");
  if (r > comparison.r_max())
    throw Error(Errc::domain, "comparison solution does not reach the ball radius");
  AtsujiAudit out;
  out.constant = std::numeric_limits<double>::infinity();
  const double outer = comparison.inverse_integral(eta, r);
  for (double s : radii) {
    if (!(s > eta && s < r))
      throw Error(Errc::invalid_configuration, "Atsuji grid points must satisfy eta < r(x) < r");
    const double ratio = kernel.value_at_radius(s) * outer / comparison.inverse_integral(s, r);
    out.ratios.push_back(ratio);
    out.constant = std::min(out.constant, ratio);
  }
  return out;
}

double atsuji_envelope(const JacobiSolution& comparison, const ModelSurface& surface, double eta,
                       std::span<const double> ball_radii, int points) {
  if (ball_radii.empty() || points < 1)
    throw Error(Errc::invalid_configuration, "Atsuji envelope needs radii and points");
  double envelope = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (double r : ball_radii) {
    if (!(r > eta)) continue;
    const GreenKernel kernel(surface, r);
    for (int i = 0; i < points; ++i)
      grid[static_cast<std::size_t>(i)] = eta + (r - eta) * (i + 0.5) / points;
    envelope = std::min(envelope, atsuji_bound_audit(comparison, kernel, eta, grid).constant);
  }
  if (!std::isfinite(envelope))
    throw Error(Errc::invalid_configuration, "no ball radius exceeds eta");
  return envelope;
}

double harmonic_expectation(const ModelSurface& surface, double radius,
                            FunctionRef<double(double)> psi) {
  if (!(radius > 0.0)) throw Error(Errc::domain, "harmonic measure needs a positive radius");
  (void)surface;  // the centre measure is dtheta/2pi on every model surface
  QuadOptions opt;
  opt.abs_tol = 1e-11;
  opt.rel_tol = 1e-11;
  opt.initial_panels = 16;
  opt.max_intervals = 20000;
  return integrate_or_throw(psi, 0.0, 2 * kPi, opt, "harmonic expectation") / (2 * kPi);
}

double harmonic_expectation_at(const ModelSurface& surface, double radius,
                               FunctionRef<double(Complex)> psi) {
  const double rho = surface.conformal_radius(radius);
  auto on_circle = [&](double theta) { return psi(std::polar(rho, theta)); };
  return harmonic_expectation(surface, radius, on_circle);
}

double green_radial_integral(const GreenKernel& kernel, FunctionRef<double(double)> phi) {
  const ModelSurface& surface = kernel.surface();
  auto f = [&](double t) {
    if (t <= 0.0 || t >= kernel.radius()) return 0.0;
    return kernel.value_at_radius(t) * phi(t) * 2 * kPi * surface.jacobi(t);
  };
  QuadOptions opt;
  opt.abs_tol = 1e-12;
  opt.rel_tol = 1e-11;
  opt.initial_panels = 8;
  return integrate_or_throw(f, 0.0, kernel.radius(), opt, "Green-weighted radial integral");
}

double green_integral(const GreenKernel& kernel, FunctionRef<double(Complex)> phi) {
  const ModelSurface& surface = kernel.surface();
  QuadOptions inner;
  inner.abs_tol = 1e-12;
  inner.rel_tol = 1e-10;
  inner.initial_panels = 8;
  auto f = [&](double t) {
    if (t <= 0.0 || t >= kernel.radius()) return 0.0;
    const double rho = surface.conformal_radius(t);
    auto ring = [&](double theta) { return phi(std::polar(rho, theta)); };
    const double angular = integrate_or_throw(ring, 0.0, 2 * kPi, inner, "Green integral (angle)");
    return kernel.value_at_radius(t) * surface.jacobi(t) * angular;
  };
  QuadOptions outer;
  outer.abs_tol = 1e-10;
  outer.rel_tol = 1e-9;
  outer.initial_panels = 4;
  return integrate_or_throw(f, 0.0, kernel.radius(), outer, "Green integral (radius)");
}

void write_kernel_table(std::ostream& out, const GreenKernel& kernel, int samples) {
  if (samples < 1) throw Error(Errc::invalid_configuration, "kernel table needs samples >= 1");
  char line[96];
  out << "r_x,g\n";
  for (int i = 1; i <= samples; ++i) {
    const double s = kernel.radius() * i / samples;
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", s, kernel.value_at_radius(s));
    out << line;
  }
}

}  // namespace nevlab
