#include "nevlab/surface.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "nevlab/errors.h"

namespace nevlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HermiteCell {
  double h, y0, y1, d0, d1;

  double value(double u) const {
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * y1 +
           (u3 - u2) * h * d1;
  }
  double slope(double u) const {
    const double u2 = u * u;
    return ((6 * u2 - 6 * u) * y0 + (-6 * u2 + 6 * u) * y1) / h + (3 * u2 - 4 * u + 1) * d0 +
           (3 * u2 - 2 * u) * d1;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// CurvatureProfile

CurvatureProfile CurvatureProfile::constant(double kappa) {
  if (!std::isfinite(kappa) || kappa > 0.0)
    throw Error(Errc::invalid_profile, "constant curvature must be finite and <= 0");
  CurvatureProfile p;
  p.constant_ = kappa;
  return p;
}

CurvatureProfile CurvatureProfile::tabulated(std::vector<double> radii, std::vector<double> kappa) {
  if (radii.size() != kappa.size() || radii.size() < 2)
    throw Error(Errc::invalid_profile, "tabulated profile needs at least two (radius, kappa) rows");
  if (radii.front() != 0.0)
    throw Error(Errc::invalid_profile, "tabulated profile must start at radius 0");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i]) || !std::isfinite(kappa[i]))
      throw Error(Errc::invalid_profile, "non-finite entry in row " + std::to_string(i));
    if (kappa[i] > 0.0)
      throw Error(Errc::invalid_profile, "positive curvature in row " + std::to_string(i));
    if (i > 0 && radii[i] <= radii[i - 1])
      throw Error(Errc::invalid_profile, "radii not strictly increasing at row " + std::to_string(i));
    if (i > 0 && kappa[i] > kappa[i - 1])
      throw Error(Errc::invalid_profile, "curvature increases at row " + std::to_string(i));
  }
  CurvatureProfile p;
  p.radii_ = std::move(radii);
  p.kappa_ = std::move(kappa);
  return p;
}

CurvatureProfile CurvatureProfile::parse(std::istream& in) {
  std::vector<double> radii, kappa;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double t, k;
    if (!(fields >> t)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(Errc::invalid_profile, "line " + std::to_string(lineno) + ": expected two numbers");
    }
    std::string rest;
    if (!(fields >> k) || (fields >> rest))
      throw Error(Errc::invalid_profile, "line " + std::to_string(lineno) + ": expected two numbers");
    radii.push_back(t);
    kappa.push_back(k);
  }
  return tabulated(std::move(radii), std::move(kappa));
}

CurvatureProfile CurvatureProfile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open curvature profile " + path.string());
  return parse(in);
}

double CurvatureProfile::domain_max() const { return is_constant() ? kInf : radii_.back(); }

double CurvatureProfile::operator()(double t) const {
  if (is_constant()) return constant_;
  if (t < 0.0 || t > radii_.back())
    throw Error(Errc::domain, "curvature profile evaluated outside [0, " +
                                  std::to_string(radii_.back()) + "]");
  auto it = std::upper_bound(radii_.begin(), radii_.end(), t);
  if (it == radii_.end()) return kappa_.back();
  const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
  const double w = (t - radii_[i]) / (radii_[i + 1] - radii_[i]);
  return (1.0 - w) * kappa_[i] + w * kappa_[i + 1];
}

// ---------------------------------------------------------------------------
// JacobiSolution

JacobiSolution solve_jacobi(const CurvatureProfile& profile, double r_max, double step) {
  if (!(r_max > 0.0) || !(step > 0.0) || !std::isfinite(r_max))
    throw Error(Errc::invalid_configuration, "solve_jacobi needs r_max > 0 and step > 0");
  if (step >= r_max)
    throw Error(Errc::invalid_configuration, "solve_jacobi step must be smaller than r_max");
  if (r_max > profile.domain_max())
    throw Error(Errc::invalid_profile, "profile does not cover [0, r_max]");

  JacobiSolution sol(profile);
  const auto n = static_cast<std::size_t>(std::ceil(r_max / step - 1e-9));
  const double h = r_max / static_cast<double>(n);
  sol.step_ = h;
  sol.grid_.resize(n + 1);
  sol.g_.resize(n + 1);
  sol.dg_.resize(n + 1);

  auto kappa = [&](double t) { return profile(std::min(t, r_max)); };
  double g = 0.0, dg = 1.0;
  sol.grid_[0] = 0.0;
  sol.g_[0] = g;
  sol.dg_[0] = dg;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    const double k1g = dg, k1d = -kappa(t) * g;
    const double k2g = dg + 0.5 * h * k1d, k2d = -kappa(t + 0.5 * h) * (g + 0.5 * h * k1g);
    const double k3g = dg + 0.5 * h * k2d, k3d = -kappa(t + 0.5 * h) * (g + 0.5 * h * k2g);
    const double k4g = dg + h * k3d, k4d = -kappa(t + h) * (g + h * k3g);
    g += h / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
    dg += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    sol.grid_[i + 1] = (i + 1 == n) ? r_max : h * static_cast<double>(i + 1);
    sol.g_[i + 1] = g;
    sol.dg_[i + 1] = dg;
  }

  // Cumulative L(t) by Simpson's rule per cell on the Hermite interpolant.
  sol.excess_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = sol.grid_[i], b = sol.grid_[i + 1];
    const double fa = sol.excess_integrand(a);
    const double fm = sol.excess_integrand(0.5 * (a + b));
    const double fb = sol.excess_integrand(b);
    sol.excess_[i + 1] = sol.excess_[i] + (b - a) / 6.0 * (fa + 4 * fm + fb);
  }
  return sol;
}

std::size_t JacobiSolution::cell(double t) const {
  if (t < 0.0 || t > grid_.back() * (1 + 1e-12))
    throw Error(Errc::domain, "Jacobi solution evaluated outside [0, r_max]");
  auto i = static_cast<std::size_t>(t / step_);
  return std::min(i, grid_.size() - 2);
}

double JacobiSolution::value(double t) const {
  const std::size_t i = cell(t);
  const HermiteCell c{grid_[i + 1] - grid_[i], g_[i], g_[i + 1], dg_[i], dg_[i + 1]};
  return c.value((t - grid_[i]) / c.h);
}

double JacobiSolution::derivative(double t) const {
  const std::size_t i = cell(t);
  const HermiteCell c{grid_[i + 1] - grid_[i], g_[i], g_[i + 1], dg_[i], dg_[i + 1]};
  return c.slope((t - grid_[i]) / c.h);
}

double JacobiSolution::excess_integrand(double s) const {
  if (s <= 0.0) return 0.0;
  const double g = value(s);
  return (s - g) / (g * s);
}

double JacobiSolution::log_excess(double t) const {
  const std::size_t i = cell(t);
  const double a = grid_[i];
  if (t == a) return excess_[i];
  const double fa = excess_integrand(a);
  const double fm = excess_integrand(0.5 * (a + t));
  const double fb = excess_integrand(t);
  return excess_[i] + (t - a) / 6.0 * (fa + 4 * fm + fb);
}

double JacobiSolution::inverse_integral(double a, double b) const {
  if (!(a > 0.0) || b < a)
    throw Error(Errc::domain, "inverse_integral needs 0 < a <= b");
  return std::log(b / a) + log_excess(b) - log_excess(a);
}

// ---------------------------------------------------------------------------
// ModelSurface

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::euclidean_plane: return "euclidean_plane";
    case SurfaceKind::poincare_disc: return "poincare_disc";
    case SurfaceKind::radial: return "radial";
  }
  return "unknown";
}

ModelSurface ModelSurface::euclidean_plane() { return ModelSurface(SurfaceKind::euclidean_plane); }

ModelSurface ModelSurface::poincare_disc() { return ModelSurface(SurfaceKind::poincare_disc); }

ModelSurface ModelSurface::radial(const CurvatureProfile& profile, double r_max, double step) {
  ModelSurface s(SurfaceKind::radial);
  s.jacobi_ = std::make_shared<const JacobiSolution>(solve_jacobi(profile, r_max, step));
  return s;
}

double ModelSurface::jacobi(double r) const {
  switch (kind_) {
    case SurfaceKind::euclidean_plane: return r;
    case SurfaceKind::poincare_disc: return std::sinh(r);
    case SurfaceKind::radial: return jacobi_->value(r);
  }
  return 0.0;
}

double ModelSurface::curvature_bound(double r) const {
  switch (kind_) {
    case SurfaceKind::euclidean_plane: return 0.0;
    case SurfaceKind::poincare_disc: return -1.0;
    case SurfaceKind::radial: return jacobi_->profile()(r);
  }
  return 0.0;
}

double ModelSurface::max_radius() const {
  return kind_ == SurfaceKind::radial ? jacobi_->r_max() : kInf;
}

double ModelSurface::modulus_bound() const {
  switch (kind_) {
    case SurfaceKind::euclidean_plane: return kInf;
    case SurfaceKind::poincare_disc: return 1.0;
    case SurfaceKind::radial: return conformal_radius(jacobi_->r_max());
  }
  return 0.0;
}

double ModelSurface::conformal_radius(double r) const {
  if (r < 0.0) throw Error(Errc::domain, "negative geodesic radius");
  switch (kind_) {
    case SurfaceKind::euclidean_plane: return r;
    case SurfaceKind::poincare_disc: return std::tanh(0.5 * r);
    case SurfaceKind::radial:
      if (r == 0.0) return 0.0;
      return r * std::exp(jacobi_->log_excess(r));
  }
  return 0.0;
}

double ModelSurface::geodesic_radius_of_modulus(double s) const {
  if (!(s >= 0.0)) throw Error(Errc::domain, "negative modulus");
  switch (kind_) {
    case SurfaceKind::euclidean_plane: return s;
    case SurfaceKind::poincare_disc:
      if (s >= 1.0) throw Error(Errc::domain, "point outside the unit disc");
      return std::log1p(s) - std::log1p(-s);
    case SurfaceKind::radial: {
      if (s == 0.0) return 0.0;
      const double bound = modulus_bound();
      if (s > bound * (1 + 1e-14))
        throw Error(Errc::domain, "point outside the tabulated radial chart");
      // log rho(r) = log r + L(r) is increasing with slope 1/J(r).
      const double target = std::log(s);
      double lo = 0.0, hi = jacobi_->r_max();
      double r = std::min(s, hi);
      for (int it = 0; it < 100; ++it) {
        const double f = std::log(r) + jacobi_->log_excess(r) - target;
        if (f > 0) hi = r; else lo = r;
        double next = r - f * jacobi_->value(r);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - r) <= 1e-15 * std::max(1.0, r)) return next;
        r = next;
      }
      return r;
    }
  }
  return 0.0;
}

double ModelSurface::geodesic_radius(Complex z) const {
  return geodesic_radius_of_modulus(std::abs(z));
}

double ModelSurface::conformal_factor_at_modulus(double s) const {
  switch (kind_) {
    case SurfaceKind::euclidean_plane: return 0.5;
    case SurfaceKind::poincare_disc: {
      if (s >= 1.0) throw Error(Errc::domain, "point outside the unit disc");
      const double d = 1.0 - s * s;
      return 2.0 / (d * d);
    }
    case SurfaceKind::radial: {
      if (s < 1e-9) return 0.5;
      const double r = geodesic_radius_of_modulus(s);
      const double ratio = jacobi_->value(r) / s;
      return 0.5 * ratio * ratio;
    }
  }
  return 0.0;
}

double ModelSurface::inverse_jacobi_integral(double a, double b) const {
  if (!(a > 0.0) || b < a) throw Error(Errc::domain, "inverse_jacobi_integral needs 0 < a <= b");
  switch (kind_) {
    case SurfaceKind::euclidean_plane: return std::log(b / a);
    case SurfaceKind::poincare_disc: return std::log(std::tanh(0.5 * b) / std::tanh(0.5 * a));
    case SurfaceKind::radial: return jacobi_->inverse_integral(a, b);
  }
  return 0.0;
}

double curvature_from_conformal(const ModelSurface& surface, double s) {
  const double h = 1e-4 * std::max(s, 1e-2);
  auto lg = [&](double x) { return std::log(surface.conformal_factor_at_modulus(x)); };
  const double f0 = lg(s), fp = lg(s + h), fm = lg(s - h);
  const double second = (fp - 2 * f0 + fm) / (h * h);
  const double first = (fp - fm) / (2 * h);
  const double laplacian = second + first / s;
  return -laplacian / (4.0 * surface.conformal_factor_at_modulus(s));
}

double curvature_from_jacobi(const ModelSurface& surface, double r) {
  switch (surface.kind()) {
    case SurfaceKind::euclidean_plane: return 0.0;
    case SurfaceKind::poincare_disc: return -1.0;
    case SurfaceKind::radial: {
      // J'' = -kappa J holds along the solution; recover J'' from the grid.
      const JacobiSolution& j = *surface.jacobi_solution();
      const double h = j.step();
      const double second = (j.derivative(std::min(r + h, j.r_max())) -
                             j.derivative(std::max(r - h, 0.0))) /
                            (std::min(r + h, j.r_max()) - std::max(r - h, 0.0));
      return -second / j.value(r);
    }
  }
  return 0.0;
}

double hyperbolic_radius(double euclidean_radius) {
  if (!(euclidean_radius > 0.0 && euclidean_radius < 1.0))
    throw Error(Errc::domain, "Euclidean radius must lie in (0, 1)");
  return std::log1p(euclidean_radius) - std::log1p(-euclidean_radius);
}

double euclidean_radius(double hyperbolic_radius) {
  if (!(hyperbolic_radius > 0.0)) throw Error(Errc::domain, "hyperbolic radius must be > 0");
  return std::tanh(0.5 * hyperbolic_radius);
}

}  // namespace nevlab
