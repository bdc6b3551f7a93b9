#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nevlab/brownian.h"
#include "nevlab/meromorphic.h"
#include "nevlab/surface.h"

namespace nevlab {

enum class CharacteristicMethod { quadrature, montecarlo, boundary };

std::string to_string(CharacteristicMethod method);
CharacteristicMethod parse_characteristic_method(const std::string& text);

struct CharacteristicValue {
  double value = 0.0;
  double std_error = 0.0;  // zero for deterministic methods
  CharacteristicMethod method = CharacteristicMethod::quadrature;
};

/// Spherical characteristic T^(r) = int_{D(r)} g_r(o,x) (|psi'|^2 / (1+|psi|^2)^2)(x) dA(x):
///   quadrature  geodesic polar quadrature against the Green kernel, with the
///               density rescaled by 1/(2g) to the volume element J dr dtheta;
///   montecarlo  occupation integral of density / (2g) along stopped paths
///               (needs `sim`; sim->radius is overridden by r);
///   boundary    mean of log ||(psi0, psi1)|| over the boundary circle minus its
///               value at the base point.
CharacteristicValue characteristic_T(const MeromorphicMap& f, const ModelSurface& surface, double r,
                                     CharacteristicMethod method = CharacteristicMethod::quadrature,
                                     const SimConfig* sim = nullptr);

/// Nevanlinna's characteristic T(r, psi) = m(r, psi) + N(r, psi): mean of
/// log+|psi| over the boundary circle plus the counting function of poles.
double classical_T(const MeromorphicMap& f, const ModelSurface& surface, double r);

enum class ProximityKind { spherical, classical };

/// spherical: mean of log 1/||psi, a||. classical: mean of log+|psi| for
/// a = inf and of log+ 1/|psi - a| otherwise.
double proximity_m(const MeromorphicMap& f, const ProjectivePoint& a, const ModelSurface& surface,
                   double r, ProximityKind kind = ProximityKind::spherical);

/// N(r, a) = pi * sum of mult * g_r(o, x_j) over preimages x_j of a in D(r);
/// truncated counts each preimage once. Throws Error(pole) if psi(o) = a and
/// Error(root_finding) if the locator disagrees with the argument principle.
double counting_N(const MeromorphicMap& f, const ProjectivePoint& a, const ModelSurface& surface,
                  double r, bool truncated = false);

/// log 1/||psi(o), a||, the constant of the first main theorem.
double base_weil(const MeromorphicMap& f, const ProjectivePoint& a);

/// T^(r) - m^(r, a) - N(r, a) over the grid.
std::vector<double> fmt_residual(const MeromorphicMap& f, const ProjectivePoint& a,
                                 const ModelSurface& surface, std::span<const double> radii);

/// T_psi(r, Phi) = (1/2pi) int_{D(r)} g_r |psi'/psi|^2 / (1 + log^2 |psi|) dA for
/// the singular form Phi = dA / (2 pi^2 |zeta|^2 (1 + log^2 |zeta|)) of total
/// mass one. Zeros and poles of psi are cut out with smooth bumps and
/// integrated in local polar coordinates with their analytic inner tail.
/// psi(o) in {0, inf} makes the integral diverge and raises Error(pole).
double singular_form_T(const MeromorphicMap& f, const ModelSurface& surface, double r);

/// Sampled Nevanlinna functionals over a radius grid.
struct NevanlinnaReport {
  struct TargetColumns {
    ProjectivePoint target;
    std::vector<double> m, N, N1;
  };

  std::string map_name;
  std::string surface_name;
  CharacteristicMethod method = CharacteristicMethod::quadrature;
  std::vector<double> radii;
  std::vector<double> T;         // classical
  std::vector<double> T_hat;     // spherical
  std::vector<double> T_hat_se;  // Monte Carlo std error, zero otherwise
  std::vector<double> T_phi;     // singular form, empty when not requested
  std::vector<TargetColumns> targets;

  void write_csv(std::ostream& out) const;
  static NevanlinnaReport read_csv(std::istream& in, const std::string& map_name = "",
                                   const std::string& surface_name = "",
                                   CharacteristicMethod method = CharacteristicMethod::quadrature);
  std::string to_json() const;
  static NevanlinnaReport from_json(const std::string& text);

  friend bool operator==(const NevanlinnaReport&, const NevanlinnaReport&);
};

struct ReportOptions {
  CharacteristicMethod method = CharacteristicMethod::quadrature;
  std::optional<SimConfig> sim;  // required for montecarlo
  bool singular_form = false;
};

NevanlinnaReport build_report(const MeromorphicMap& f, const ModelSurface& surface,
                              std::span<const double> radii,
                              std::span<const ProjectivePoint> targets, const ReportOptions& options = {});

}  // namespace nevlab
