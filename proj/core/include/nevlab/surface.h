#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nevlab {

using Complex = std::complex<double>;

/// Radial curvature lower bound kappa(t): non-positive, non-increasing and
/// continuous on [0, domain_max()]. Tabulated profiles are interpolated
/// piecewise-linearly, which keeps both properties.
class CurvatureProfile {
 public:
  static CurvatureProfile constant(double kappa);
  static CurvatureProfile tabulated(std::vector<double> radii, std::vector<double> kappa);

  /// Two-column text: "radius kappa" per line (whitespace or comma separated),
  /// '#' starts a comment. Radii must start at 0 and increase strictly.
  static CurvatureProfile parse(std::istream& in);
  static CurvatureProfile load(const std::filesystem::path& path);

  double operator()(double t) const;

  bool is_constant() const { return radii_.empty(); }
  double constant_value() const { return constant_; }
  double domain_max() const;
  std::span<const double> radii() const { return radii_; }
  std::span<const double> values() const { return kappa_; }

 private:
  CurvatureProfile() = default;

  double constant_ = 0.0;
  std::vector<double> radii_;
  std::vector<double> kappa_;
};

/// Solution of G'' + kappa G = 0, G(0) = 0, G'(0) = 1 sampled on a uniform grid,
/// with cubic Hermite interpolation in between.
class JacobiSolution {
 public:
  const CurvatureProfile& profile() const { return profile_; }
  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return g_; }
  std::span<const double> derivatives() const { return dg_; }
  double step() const { return step_; }
  double r_max() const { return grid_.back(); }

  double value(double t) const;
  double derivative(double t) const;

  /// L(t) = integral_0^t (1/G(s) - 1/s) ds. Finite because G(s) = s + O(s^3).
  double log_excess(double t) const;

  /// integral_a^b dt / G(t) for 0 < a <= b <= r_max, as log(b/a) + L(b) - L(a),
  /// so the 1/t pole at the origin is handled analytically.
  double inverse_integral(double a, double b) const;

 private:
  friend JacobiSolution solve_jacobi(const CurvatureProfile&, double, double);
  explicit JacobiSolution(CurvatureProfile profile) : profile_(std::move(profile)) {}

  std::size_t cell(double t) const;
  double excess_integrand(double s) const;

  CurvatureProfile profile_;
  double step_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> g_;
  std::vector<double> dg_;
  std::vector<double> excess_;  // L at grid points
};

/// Fixed-step classical RK4 on (G, G'). The step is shrunk so that r_max is a
/// grid point.
JacobiSolution solve_jacobi(const CurvatureProfile& profile, double r_max, double step = 1e-3);

enum class SurfaceKind { euclidean_plane, poincare_disc, radial };

std::string to_string(SurfaceKind kind);

/// Complete simply connected rotationally symmetric surface with the base point
/// o at the coordinate origin. Two presentations are kept in sync:
///   geodesic polar  ds^2 = dr^2 + J(r)^2 dtheta^2
///   conformal       ds^2 = 2 g(z) |dz|^2,   z = rho(r) e^{i theta}
/// For radial surfaces J is the Jacobi solution of the profile and rho solves
/// d(log rho)/dr = 1/J with rho ~ r at the origin (so g(0) = 1/2).
class ModelSurface {
 public:
  static ModelSurface euclidean_plane();
  static ModelSurface poincare_disc();
  static ModelSurface radial(const CurvatureProfile& profile, double r_max, double step = 1e-3);

  SurfaceKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }

  double jacobi(double r) const;
  double curvature_bound(double r) const;
  /// Largest admissible geodesic radius (infinite for the closed-form models).
  double max_radius() const;
  /// Supremum of |z| over the coordinate domain.
  double modulus_bound() const;

  double conformal_radius(double r) const;
  double geodesic_radius_of_modulus(double s) const;
  double geodesic_radius(Complex z) const;
  double conformal_factor_at_modulus(double s) const;
  double conformal_factor(Complex z) const { return conformal_factor_at_modulus(std::abs(z)); }
  Complex point(double r, double theta) const { return std::polar(conformal_radius(r), theta); }

  /// integral_a^b dt / J(t), 0 < a <= b.
  double inverse_jacobi_integral(double a, double b) const;

  /// Non-null for radial surfaces only.
  const JacobiSolution* jacobi_solution() const { return jacobi_.get(); }

 private:
  explicit ModelSurface(SurfaceKind kind) : kind_(kind) {}

  SurfaceKind kind_;
  std::shared_ptr<const JacobiSolution> jacobi_;
};

/// Gauss curvature at modulus s from the conformal presentation,
/// K = -(1/(4g)) Delta_0 log g, by central differences in s.
double curvature_from_conformal(const ModelSurface& surface, double s);

/// Gauss curvature at geodesic radius r from the polar presentation, K = -J''/J.
double curvature_from_jacobi(const ModelSurface& surface, double r);

/// Poincare-disc radius matching a Euclidean radius 0 < rt < 1:
/// r = log((1 + rt) / (1 - rt)).
double hyperbolic_radius(double euclidean_radius);
/// Inverse of hyperbolic_radius: rt = (e^r - 1) / (e^r + 1), r > 0.
double euclidean_radius(double hyperbolic_radius);

}  // namespace nevlab
