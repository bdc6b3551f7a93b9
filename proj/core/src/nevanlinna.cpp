#include "nevlab/nevanlinna.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nevlab/errors.h"
#include "nevlab/green.h"
#include "nevlab/tabular.h"
#include "nevlab/quadrature.h"

namespace nevlab {
namespace {

constexpr double kPi = std::numbers::pi;

QuadOptions angular_options() {
  QuadOptions o;
  o.abs_tol = 1e-13;
  o.rel_tol = 1e-11;
  o.initial_panels = 16;
  o.max_intervals = 20000;
  return o;
}

QuadOptions radial_options() {
  QuadOptions o;
  o.abs_tol = 1e-10;
  o.rel_tol = 1e-10;
  o.initial_panels = 8;
  o.max_intervals = 4000;
  return o;
}

// C^3 step: 1 on [0, 1/2], 0 on [1, inf).
double bump(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double x = 2.0 * t - 1.0;
  return 1.0 - x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

void require_base_off_target(const MeromorphicMap& f, const ProjectivePoint& a) {
  const Jet j = f.jet(Complex{});
  const double scale = std::sqrt((std::norm(j.f0) + std::norm(j.f1)) * (std::norm(a.w0) + std::norm(a.w1)));
  if (std::abs(a.w0 * j.f1 - a.w1 * j.f0) <= 1e-14 * scale)
    throw Error(Errc::pole, "psi(o) equals the target " + a.label() + "; shift the map");
}

}  // namespace

std::string to_string(CharacteristicMethod method) {
  switch (method) {
    case CharacteristicMethod::quadrature: return "quadrature";
    case CharacteristicMethod::montecarlo: return "montecarlo";
    case CharacteristicMethod::boundary: return "boundary";
  }
  return "unknown";
}

CharacteristicMethod parse_characteristic_method(const std::string& text) {
  if (text == "quadrature") return CharacteristicMethod::quadrature;
  if (text == "montecarlo") return CharacteristicMethod::montecarlo;
  if (text == "boundary") return CharacteristicMethod::boundary;
  throw Error(Errc::invalid_configuration, "unknown characteristic method '" + text + "'");
}

// ---------------------------------------------------------------------------
// Characteristic functions

CharacteristicValue characteristic_T(const MeromorphicMap& f, const ModelSurface& surface, double r,
                                     CharacteristicMethod method, const SimConfig* sim) {
  CharacteristicValue out;
  out.method = method;
  if (f.is_constant()) return out;
  switch (method) {
    case CharacteristicMethod::quadrature: {
      const GreenKernel kernel(surface, r);
      const QuadOptions inner = angular_options();
      auto ring = [&](double t) {
        if (t <= 0.0 || t >= r) return 0.0;
        const double rho = surface.conformal_radius(t);
        const double two_g = 2.0 * surface.conformal_factor_at_modulus(rho);
        auto dens = [&](double theta) { return f.spherical_density(std::polar(rho, theta)); };
        const double angular = integrate_or_throw(dens, 0.0, 2 * kPi, inner, "characteristic (angle)");
        return kernel.value_at_radius(t) * surface.jacobi(t) * angular / two_g;
      };
      out.value = integrate_or_throw(ring, 0.0, r, radial_options(), "characteristic (radius)");
      return out;
    }
    case CharacteristicMethod::montecarlo: {
      if (!sim) throw Error(Errc::invalid_configuration, "Monte Carlo characteristic needs a sim config");
      SimConfig config = *sim;
      config.radius = r;
      const PointFunction occupation[] = {[&f, &surface](Complex z) {
        return f.spherical_density(z) / (2.0 * surface.conformal_factor(z));
      }};
      const Ensemble ensemble = run_ensemble(surface, config, occupation);
      const MCEstimate est = summarize(ensemble, [](const StoppedPath& p) { return p.occupation[0]; });
      out.value = est.mean;
      out.std_error = est.std_error;
      return out;
    }
    case CharacteristicMethod::boundary: {
      const double mean = harmonic_expectation_at(surface, r, [&](Complex z) { return f.log_norm(z); });
      out.value = mean - f.log_norm(Complex{});
      return out;
    }
  }
  return out;
}

double proximity_m(const MeromorphicMap& f, const ProjectivePoint& a, const ModelSurface& surface,
                   double r, ProximityKind kind) {
  if (kind == ProximityKind::spherical)
    return harmonic_expectation_at(surface, r, [&](Complex z) { return f.log_weil(z, a); });
  if (a.is_infinity())
    return harmonic_expectation_at(surface, r, [&](Complex z) { return std::max(0.0, f.log_modulus(z)); });
  const Complex c = a.value();
  return harmonic_expectation_at(surface, r, [&](Complex z) {
    const Jet j = f.jet(z);
    return std::max(0.0, std::log(std::abs(j.f0)) - std::log(std::abs(j.f1 - c * j.f0)));
  });
}

double counting_N(const MeromorphicMap& f, const ProjectivePoint& a, const ModelSurface& surface,
                  double r, bool truncated) {
  require_base_off_target(f, a);
  if (f.is_constant()) return 0.0;
  const GreenKernel kernel(surface, r);
  double sum = 0.0;
  for (const Preimage& p : f.validated_preimages(a, kernel.boundary_modulus()))
    sum += (truncated ? 1 : p.multiplicity) * kPi * kernel.value(p.z);
  return sum;
}

double classical_T(const MeromorphicMap& f, const ModelSurface& surface, double r) {
  if (f.is_constant()) return 0.0;
  const ProjectivePoint inf = ProjectivePoint::infinity();
  return proximity_m(f, inf, surface, r, ProximityKind::classical) + counting_N(f, inf, surface, r);
}

double base_weil(const MeromorphicMap& f, const ProjectivePoint& a) {
  return f.log_weil(Complex{}, a);
}

std::vector<double> fmt_residual(const MeromorphicMap& f, const ProjectivePoint& a,
                                 const ModelSurface& surface, std::span<const double> radii) {
  require_base_off_target(f, a);
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    const double t = characteristic_T(f, surface, r).value;
    out.push_back(t - proximity_m(f, a, surface, r) - counting_N(f, a, surface, r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Singular form

double singular_form_T(const MeromorphicMap& f, const ModelSurface& surface, double r) {
  if (f.is_constant()) return 0.0;
  require_base_off_target(f, ProjectivePoint::finite(0.0));
  require_base_off_target(f, ProjectivePoint::infinity());
  const double rho = surface.conformal_radius(r);

  // In the conformal chart every geodesic ball is the disc |z| < rho and the
  // Green function of Delta_S / 2 is (1/pi) log(rho / |z|).
  auto green = [rho](Complex z) { return std::log(rho / std::abs(z)) / kPi; };
  auto form = [&](Complex z) {
    const Jet j = f.jet(z);
    const double l = std::log(std::abs(j.f1)) - std::log(std::abs(j.f0));
    const double ratio2 = std::norm((j.f0 * j.d1 - j.f1 * j.d0) / (j.f0 * j.f1));
    return ratio2 / (1.0 + l * l) / (2 * kPi);
  };

  struct Singular {
    Complex z;
    int multiplicity;
    bool pole;
    double eps = 0.0;
  };
  std::vector<Singular> all;
  const double reach = 1.25 * rho + 0.1;
  for (const Preimage& p : f.validated_preimages(ProjectivePoint::finite(0.0), reach))
    all.push_back({p.z, p.multiplicity, false});
  for (const Preimage& p : f.validated_preimages(ProjectivePoint::infinity(), reach))
    all.push_back({p.z, p.multiplicity, true});

  std::vector<Singular> inside;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Singular s = all[i];
    if (std::abs(s.z) >= rho) continue;
    double eps = std::min({0.5 * (rho - std::abs(s.z)), 0.25 * std::abs(s.z), 0.5});
    for (std::size_t k = 0; k < all.size(); ++k)
      if (k != i) eps = std::min(eps, 0.25 * std::abs(all[k].z - s.z));
    s.eps = eps;
    inside.push_back(s);
  }
  auto cut = [&](Complex z) {
    double c = 0.0;
    for (const Singular& s : inside) c += bump(std::abs(z - s.z) / s.eps);
    return c;
  };

  const QuadOptions ang = angular_options();
  QuadOptions rad = radial_options();
  rad.abs_tol = 1e-9;
  rad.rel_tol = 1e-9;

  auto ring = [&](double s) {
    if (s <= 0.0 || s >= rho) return 0.0;
    auto integrand = [&](double theta) {
      const Complex z = std::polar(s, theta);
      const double c = cut(z);
      if (c >= 1.0) return 0.0;
      return green(z) * form(z) * (1.0 - c);
    };
    return s * integrate_or_throw(integrand, 0.0, 2 * kPi, ang, "singular form (angle)");
  };
  double total = integrate_or_throw(ring, 0.0, rho, rad, "singular form (radius)");

  QuadOptions local = ang;
  local.rel_tol = 1e-9;
  constexpr double kInnerFraction = 1e-6;
  for (const Singular& s : inside) {
    const double m = s.multiplicity;
    const double sign = s.pole ? -1.0 : 1.0;
    const double u0 = kInnerFraction * s.eps;
    // log|psi| = sign m log u + L + O(u) near the point; L is the circle mean
    // of the harmonic remainder.
    double level = 0.0;
    constexpr int kSamples = 32;
    for (int k = 0; k < kSamples; ++k)
      level += f.log_modulus(s.z + std::polar(u0, 2 * kPi * k / kSamples)) - sign * m * std::log(u0);
    level /= kSamples;
    const double v0 = sign * m * std::log(u0) + level;
    const double tail = green(s.z) * m * (s.pole ? 0.5 * kPi - std::atan(v0) : 0.5 * kPi + std::atan(v0));

    auto shell = [&](double x) {
      const double u = s.eps * std::exp(-x);
      const double weight = bump(u / s.eps);
      auto integrand = [&](double phi) { return green(s.z + std::polar(u, phi)) * form(s.z + std::polar(u, phi)); };
      return u * u * weight * integrate_or_throw(integrand, 0.0, 2 * kPi, local, "singular form (local angle)");
    };
    total += tail + integrate_or_throw(shell, 0.0, std::log(1.0 / kInnerFraction), rad,
                                       "singular form (local radius)");
  }
  return total;
}

// ---------------------------------------------------------------------------
// Report

NevanlinnaReport build_report(const MeromorphicMap& f, const ModelSurface& surface,
                              std::span<const double> radii, std::span<const ProjectivePoint> targets,
                              const ReportOptions& options) {
  if (options.method == CharacteristicMethod::montecarlo && !options.sim)
    throw Error(Errc::invalid_configuration, "Monte Carlo report needs a sim config");
  NevanlinnaReport rep;
  rep.map_name = f.name();
  rep.surface_name = surface.name();
  rep.method = options.method;
  rep.radii.assign(radii.begin(), radii.end());
  for (const ProjectivePoint& a : targets) rep.targets.push_back({a, {}, {}, {}});
  for (double r : radii) {
    rep.T.push_back(classical_T(f, surface, r));
    const CharacteristicValue t =
        characteristic_T(f, surface, r, options.method, options.sim ? &*options.sim : nullptr);
    rep.T_hat.push_back(t.value);
    rep.T_hat_se.push_back(t.std_error);
    if (options.singular_form) rep.T_phi.push_back(singular_form_T(f, surface, r));
    for (auto& col : rep.targets) {
      col.m.push_back(proximity_m(f, col.target, surface, r));
      col.N.push_back(counting_N(f, col.target, surface, r, false));
      col.N1.push_back(counting_N(f, col.target, surface, r, true));
    }
  }
  return rep;
}

void NevanlinnaReport::write_csv(std::ostream& out) const {
  out << "r,T,T_hat,T_hat_se";
  const bool phi = !T_phi.empty();
  if (phi) out << ",T_phi";
  for (const auto& c : targets) {
    const std::string l = c.target.label();
    out << ",m@" << l << ",N@" << l << ",N1@" << l;
  }
  out << '\n';
  for (std::size_t i = 0; i < radii.size(); ++i) {
    out << format_double(radii[i]) << ',' << format_double(T[i]) << ',' << format_double(T_hat[i]) << ',' << format_double(T_hat_se[i]);
    if (phi) out << ',' << format_double(T_phi[i]);
    for (const auto& c : targets) out << ',' << format_double(c.m[i]) << ',' << format_double(c.N[i]) << ',' << format_double(c.N1[i]);
    out << '\n';
  }
}

NevanlinnaReport NevanlinnaReport::read_csv(std::istream& in, const std::string& map_name,
                                            const std::string& surface_name,
                                            CharacteristicMethod method) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  NevanlinnaReport rep;
  rep.map_name = map_name;
  rep.surface_name = surface_name;
  rep.method = method;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io, "empty report table");
  const std::vector<std::string> header = split(line);
  if (header.size() < 4 || header[0] != "r" || header[1] != "T" || header[2] != "T_hat" ||
      header[3] != "T_hat_se")
    throw Error(Errc::io, "unexpected report header");
  std::size_t col = 4;
  const bool phi = header.size() > 4 && header[4] == "T_phi";
  if (phi) ++col;
  const std::size_t first_target = col;
  if ((header.size() - col) % 3 != 0) throw Error(Errc::io, "report target columns come in triples");
  for (; col < header.size(); col += 3) {
    const std::string& h = header[col];
    if (h.rfind("m@", 0) != 0) throw Error(Errc::io, "bad target column '" + h + "'");
    rep.targets.push_back({ProjectivePoint::parse_label(h.substr(2)), {}, {}, {}});
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) throw Error(Errc::io, "ragged report row");
    auto num = [&](std::size_t k) { return std::stod(cells[k]); };
    rep.radii.push_back(num(0));
    rep.T.push_back(num(1));
    rep.T_hat.push_back(num(2));
    rep.T_hat_se.push_back(num(3));
    if (phi) rep.T_phi.push_back(num(4));
    for (std::size_t t = 0; t < rep.targets.size(); ++t) {
      const std::size_t base = first_target + 3 * t;
      rep.targets[t].m.push_back(num(base));
      rep.targets[t].N.push_back(num(base + 1));
      rep.targets[t].N1.push_back(num(base + 2));
    }
  }
  return rep;
}

std::string NevanlinnaReport::to_json() const {
  nlohmann::json j;
  j["map"] = map_name;
  j["surface"] = surface_name;
  j["method"] = to_string(method);
  j["radii"] = radii;
  j["T"] = T;
  j["T_hat"] = T_hat;
  j["T_hat_se"] = T_hat_se;
  j["T_phi"] = T_phi;
  j["targets"] = nlohmann::json::array();
  for (const auto& c : targets)
    j["targets"].push_back({{"target", c.target.label()}, {"m", c.m}, {"N", c.N}, {"N1", c.N1}});
  return j.dump(2);
}

NevanlinnaReport NevanlinnaReport::from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    NevanlinnaReport rep;
    rep.map_name = j.at("map").get<std::string>();
    rep.surface_name = j.at("surface").get<std::string>();
    rep.method = parse_characteristic_method(j.at("method").get<std::string>());
    rep.radii = j.at("radii").get<std::vector<double>>();
    rep.T = j.at("T").get<std::vector<double>>();
    rep.T_hat = j.at("T_hat").get<std::vector<double>>();
    rep.T_hat_se = j.at("T_hat_se").get<std::vector<double>>();
    rep.T_phi = j.at("T_phi").get<std::vector<double>>();
    for (const auto& c : j.at("targets"))
      rep.targets.push_back({ProjectivePoint::parse_label(c.at("target").get<std::string>()),
                             c.at("m").get<std::vector<double>>(), c.at("N").get<std::vector<double>>(),
                             c.at("N1").get<std::vector<double>>()});
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, std::string("malformed report JSON: ") + e.what());
  }
}

bool operator==(const NevanlinnaReport& a, const NevanlinnaReport& b) {
  if (a.map_name != b.map_name || a.surface_name != b.surface_name || a.method != b.method ||
      a.radii != b.radii || a.T != b.T || a.T_hat != b.T_hat || a.T_hat_se != b.T_hat_se ||
      a.T_phi != b.T_phi || a.targets.size() != b.targets.size())
    return false;
  for (std::size_t i = 0; i < a.targets.size(); ++i) {
    const auto& x = a.targets[i];
    const auto& y = b.targets[i];
    if (!(x.target == y.target) || x.m != y.m || x.N != y.N || x.N1 != y.N1) return false;
  }
  return true;
}

}  // namespace nevlab
