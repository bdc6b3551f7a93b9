#include "nevlab/theorems.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "nevlab/errors.h"
#include "nevlab/green.h"
#include "nevlab/nevanlinna.h"

namespace nevlab {
namespace {

constexpr double kPi = std::numbers::pi;

double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

void require_grid(std::span<const double> radii) {
  if (radii.empty()) throw Error(Errc::invalid_configuration, "empty radius grid");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw Error(Errc::invalid_configuration, "radius grid must increase strictly");
}

double curvature_root(const ModelSurface& surface, double r) {
  return std::sqrt(-surface.curvature_bound(r));
}

}  // namespace

// ---------------------------------------------------------------------------
// Borel

AuditOutcome borel_audit(std::span<const double> radii, std::span<const double> u, double delta,
                         double budget) {
  require_grid(radii);
  if (u.size() != radii.size()) throw Error(Errc::invalid_configuration, "Borel audit: sample count mismatch");
  if (radii.size() < 3) throw Error(Errc::invalid_configuration, "Borel audit needs at least 3 samples");
  if (!(delta > 0.0)) throw Error(Errc::invalid_configuration, "Borel audit needs delta > 0");
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] < u[i - 1]) throw Error(Errc::monotonicity, "Borel audit: samples decrease at index " + std::to_string(i));
  const std::size_t n = radii.size();
  std::vector<double> du(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      du[i] = (u[1] - u[0]) / (radii[1] - radii[0]);
    } else if (i + 1 == n) {
      du[i] = (u[i] - u[i - 1]) / (radii[i] - radii[i - 1]);
    } else {
      const double h1 = radii[i] - radii[i - 1], h2 = radii[i + 1] - radii[i];
      du[i] = -h2 / (h1 * (h1 + h2)) * u[i - 1] + (h2 - h1) / (h1 * h2) * u[i] + h1 / (h2 * (h1 + h2)) * u[i + 1];
    }
    rhs[i] = u[i] * std::pow(log_plus(u[i]), 1.0 + delta);
  }
  AuditOutcome o = make_outcome("borel", {radii.begin(), radii.end()}, du, rhs, budget);
  o.extra.push_back({"u", {u.begin(), u.end()}});
  o.details["delta"] = delta;
  return o;
}

// ---------------------------------------------------------------------------
// Calculus lemma

JacobiSolution comparison_solution(const ModelSurface& surface, double r_max) {
  const double step = std::min(1e-3, r_max / 10);
  switch (surface.kind()) {
    case SurfaceKind::euclidean_plane: return solve_jacobi(CurvatureProfile::constant(0.0), r_max, step);
    case SurfaceKind::poincare_disc: return solve_jacobi(CurvatureProfile::constant(-1.0), r_max, step);
    case SurfaceKind::radial:
      if (r_max > surface.max_radius()) throw Error(Errc::domain, "comparison radius exceeds the surface chart");
      return *surface.jacobi_solution();
  }
  throw Error(Errc::invalid_configuration, "unknown surface");
}

AuditOutcome calculus_lemma_audit(const OccupationTest& k, const ModelSurface& surface,
                                  std::span<const double> radii, double delta,
                                  const CalculusLemmaOptions& options) {
  require_grid(radii);
  if (!(delta > 0.0)) throw Error(Errc::invalid_configuration, "calculus lemma needs delta > 0");
  if (!(radii.front() > 1.0)) throw Error(Errc::invalid_configuration, "calculus lemma radii must exceed 1");
  if (!(options.eta > 0.0 && options.eta < radii.front()))
    throw Error(Errc::invalid_configuration, "calculus lemma needs 0 < eta < min radius");

  double c = 0.0;
  if (options.constant) {
    c = *options.constant;
  } else {
    const JacobiSolution g = comparison_solution(surface, radii.back());
    c = atsuji_envelope(g, surface, options.eta, radii);
  }
  if (!(c > 0.0)) throw Error(Errc::invalid_configuration, "Green lower-bound constant must be positive");

  const std::size_t n = radii.size();
  std::vector<double> lhs(n), rhs(n), occupation(n), khat(n), factor(n), ratio(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = radii[i];
    lhs[i] = harmonic_expectation_at(surface, r, [&](Complex z) { return k.at_point(z); });
    const GreenKernel kernel(surface, r);
    occupation[i] = k.radial ? green_radial_integral(kernel, [&](double t) { return k.radial(t); })
                             : green_integral(kernel, [&](Complex z) { return k.at_point(z); });
    const double root = curvature_root(surface, r);
    const double growth = std::exp(r * root);
    khat[i] = std::log(r) / c * occupation[i];
    const double lk = log_plus(khat[i]);
    factor[i] = std::pow(lk * log_plus(r * growth * khat[i] * std::pow(lk, 1.0 + delta)), 1.0 + delta);
    rhs[i] = factor[i] * growth * std::log(r) / (2 * kPi * c) * occupation[i];
    ratio[i] = log_plus(factor[i]) /
               (1.0 + log_plus(log_plus(occupation[i])) + log_plus(r * root) + log_plus(std::log(r)));
  }
  AuditOutcome o = make_outcome("calculus_lemma", {radii.begin(), radii.end()}, lhs, rhs, options.budget);
  o.extra = {{"E_int_k", occupation}, {"k_hat", khat}, {"F", factor}, {"log_plus_F_ratio", ratio}};
  o.details["C"] = c;
  o.details["eta"] = options.eta;
  o.details["delta"] = delta;
  return o;
}

// ---------------------------------------------------------------------------
// Logarithmic derivative lemma

double ldl_error_term(const ModelSurface& surface, double r) {
  if (surface.kind() == SurfaceKind::poincare_disc) return r;
  return -surface.curvature_bound(r) * r * r;
}

namespace {

double log_ratio_proximity(const MeromorphicMap& f, const MeromorphicMap& fk, const ModelSurface& surface,
                           double r) {
  return harmonic_expectation_at(surface, r, [&](Complex z) {
    const double d = fk.log_modulus(z) - f.log_modulus(z);
    return std::isnan(d) ? 0.0 : std::max(0.0, d);
  });
}

struct LdlSample {
  double lhs, log_t;
  std::array<double, 4> basis;
};

std::vector<LdlSample> ldl_samples(const MeromorphicMap& f, const ModelSurface& surface, int k,
                                   std::span<const double> radii) {
  if (f.is_constant()) throw Error(Errc::degenerate_input, "LDL needs a nonconstant map");
  if (k < 1) throw Error(Errc::invalid_configuration, "LDL derivative order must be >= 1");
  require_grid(radii);
  const MeromorphicMap fk = f.derivative(k);
  std::vector<LdlSample> out;
  for (double r : radii) {
    LdlSample s;
    s.lhs = log_ratio_proximity(f, fk, surface, r);
    s.log_t = std::log(classical_T(f, surface, r));
    s.basis = {log_plus(s.log_t), ldl_error_term(surface, r), log_plus(std::log(r)), 1.0};
    out.push_back(s);
  }
  return out;
}

}  // namespace

double log_derivative_proximity(const MeromorphicMap& f, const ModelSurface& surface, double r, int k) {
  return log_ratio_proximity(f, f.derivative(k), surface, r);
}

LdlEnvelope calibrate_ldl(const MeromorphicMap& calibration, const ModelSurface& surface, int k,
                          std::span<const double> radii) {
  const std::vector<LdlSample> samples = ldl_samples(calibration, surface, k, radii);
  // Constraints a . c >= beta: one per radius plus c_m >= 0.
  std::vector<std::array<double, 4>> a;
  std::vector<double> beta;
  for (const LdlSample& s : samples) {
    a.push_back(s.basis);
    beta.push_back(s.lhs - 1.25 * k * s.log_t);
  }
  for (int m = 0; m < 4; ++m) {
    std::array<double, 4> e{};
    e[static_cast<std::size_t>(m)] = 1.0;
    a.push_back(e);
    beta.push_back(0.0);
  }
  const std::size_t rows = a.size();
  auto feasible = [&](const Eigen::Vector4d& c) {
    for (std::size_t j = 0; j < rows; ++j) {
      double lhs = 0.0;
      for (int m = 0; m < 4; ++m) lhs += a[j][static_cast<std::size_t>(m)] * c(m);
      if (lhs < beta[j] - 1e-10 * std::max(1.0, std::abs(beta[j]))) return false;
    }
    return true;
  };
  double best = std::numeric_limits<double>::infinity();
  LdlEnvelope best_c{};
  // The optimum of a bounded LP over a pointed polyhedron sits at a vertex:
  // four linearly independent active constraints.
  for (std::size_t i0 = 0; i0 < rows; ++i0)
    for (std::size_t i1 = i0 + 1; i1 < rows; ++i1)
      for (std::size_t i2 = i1 + 1; i2 < rows; ++i2)
        for (std::size_t i3 = i2 + 1; i3 < rows; ++i3) {
          Eigen::Matrix4d m;
          Eigen::Vector4d rhs;
          const std::size_t idx[4] = {i0, i1, i2, i3};
          for (int r = 0; r < 4; ++r) {
            for (int col = 0; col < 4; ++col) m(r, col) = a[idx[r]][static_cast<std::size_t>(col)];
            rhs(r) = beta[idx[r]];
          }
          Eigen::FullPivLU<Eigen::Matrix4d> lu(m);
          if (lu.rank() < 4) continue;
          const Eigen::Vector4d c = lu.solve(rhs);
          const double objective = c.sum();
          if (objective >= best || !feasible(c)) continue;
          best = objective;
          for (int q = 0; q < 4; ++q) best_c[static_cast<std::size_t>(q)] = std::max(0.0, c(q));
        }
  if (!std::isfinite(best)) throw Error(Errc::degenerate_input, "LDL calibration LP has no vertex");
  // The vertex is tight up to rounding; absorb any leftover deficit in the constant.
  double deficit = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double rhs = 1.25 * k * samples[i].log_t;
    for (std::size_t m = 0; m < 4; ++m) rhs += best_c[m] * samples[i].basis[m];
    deficit = std::max(deficit, samples[i].lhs - rhs);
  }
  if (deficit > 0.0) best_c[3] += deficit * (1.0 + 1e-12) + 1e-15;
  return best_c;
}

AuditOutcome ldl_audit(const MeromorphicMap& f, const ModelSurface& surface, int k,
                       std::span<const double> radii, const LdlEnvelope& envelope, double budget) {
  const std::vector<LdlSample> samples = ldl_samples(f, surface, k, radii);
  std::vector<double> lhs, rhs, log_t;
  for (const LdlSample& s : samples) {
    double r = 1.25 * k * s.log_t;
    for (std::size_t m = 0; m < 4; ++m) r += envelope[m] * s.basis[m];
    lhs.push_back(s.lhs);
    rhs.push_back(r);
    log_t.push_back(s.log_t);
  }
  AuditOutcome o = make_outcome("ldl", {radii.begin(), radii.end()}, lhs, rhs, budget);
  o.extra.push_back({"log_T", log_t});
  o.details["k"] = k;
  o.details["map"] = f.name();
  o.details["envelope"] = envelope;
  return o;
}

AuditOutcome derivative_growth_audit(const MeromorphicMap& f, const ModelSurface& surface, int k,
                                     std::span<const double> radii, double budget) {
  if (f.is_constant()) throw Error(Errc::degenerate_input, "derivative growth needs a nonconstant map");
  require_grid(radii);
  const MeromorphicMap fk = f.derivative(k);
  std::vector<double> lhs, rhs, t;
  for (double r : radii) {
    const double tr = classical_T(f, surface, r);
    lhs.push_back(classical_T(fk, surface, r));
    rhs.push_back(std::ldexp(tr, k) + log_plus(tr) + ldl_error_term(surface, r) + log_plus(std::log(r)));
    t.push_back(tr);
  }
  AuditOutcome o = make_outcome("derivative_growth", {radii.begin(), radii.end()}, lhs, rhs, budget);
  o.extra.push_back({"T", t});
  o.details["k"] = k;
  o.details["map"] = f.name();
  return o;
}

// ---------------------------------------------------------------------------
// Metric match

MetricMatch metric_match_audit(const MeromorphicMap& f, std::span<const double> euclidean_radii,
                               int ode_steps) {
  if (ode_steps < 10) throw Error(Errc::invalid_configuration, "metric match needs at least 10 ODE steps");
  const ModelSurface disc = ModelSurface::poincare_disc();
  QuadOptions ang;
  ang.abs_tol = 1e-14;
  ang.rel_tol = 1e-12;
  ang.initial_panels = 16;
  ang.max_intervals = 20000;
  // a(t) = t * int_0^2pi density(t e^{i theta}) d theta, so that A' = a / pi.
  auto area_rate = [&](double t) {
    if (t <= 0.0 || f.is_constant()) return 0.0;
    return t * integrate_or_throw([&](double th) { return f.spherical_density(std::polar(t, th)); }, 0.0,
                                  2 * kPi, ang, "metric match (angle)");
  };
  MetricMatch out;
  for (double rt : euclidean_radii) {
    if (!(rt > 0.0) || rt > 0.999)
      throw Error(Errc::range, "metric match radius must lie in (0, 0.999]");
    MetricMatchRow row;
    row.euclidean_radius = rt;
    row.hyperbolic_radius = hyperbolic_radius(rt);
    row.poincare = characteristic_T(f, disc, row.hyperbolic_radius).value;

    const double h = rt / ode_steps;
    double area = 0.0, t_char = 0.0;
    double a_left = area_rate(0.0);
    auto t_rate = [](double t, double a) { return t > 0.0 ? a / t : 0.0; };
    for (int s = 0; s < ode_steps; ++s) {
      const double t0 = s * h;
      const double a_mid = area_rate(t0 + 0.5 * h), a_right = area_rate(t0 + h);
      const double kA1 = a_left / kPi, kA2 = a_mid / kPi, kA3 = a_mid / kPi, kA4 = a_right / kPi;
      const double kT1 = t_rate(t0, area);
      const double kT2 = t_rate(t0 + 0.5 * h, area + 0.5 * h * kA1);
      const double kT3 = t_rate(t0 + 0.5 * h, area + 0.5 * h * kA2);
      const double kT4 = t_rate(t0 + h, area + h * kA3);
      area += h / 6.0 * (kA1 + 2 * kA2 + 2 * kA3 + kA4);
      t_char += h / 6.0 * (kT1 + 2 * kT2 + 2 * kT3 + kT4);
      a_left = a_right;
    }
    row.euclidean_disc = t_char;
    row.deviation = std::abs(row.poincare - row.euclidean_disc) / std::max(1.0, std::abs(row.euclidean_disc));
    out.max_deviation = std::max(out.max_deviation, row.deviation);
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Second main theorem

SmtResult smt_curve_audit(const MeromorphicMap& f, std::span<const ProjectivePoint> targets,
                          const ModelSurface& surface, std::span<const double> radii,
                          const SmtOptions& options) {
  const std::size_t q = targets.size();
  if (q < 3) throw Error(Errc::invalid_configuration, "second main theorem audit needs q >= 3 targets");
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i + 1; j < q; ++j)
      if (targets[i] == targets[j]) throw Error(Errc::invalid_configuration, "targets must be distinct");
  if (f.is_constant()) throw Error(Errc::degenerate_input, "second main theorem needs a nonconstant map");
  require_grid(radii);

  const std::size_t n = radii.size();
  const double r_last = radii.back();
  std::vector<double> t_hat(n), lhs(n), rhs(n), n1_sum(n);
  std::vector<std::vector<double>> n1(q, std::vector<double>(n)), defect_curve(q, std::vector<double>(n));
  std::vector<double> base(q);
  for (std::size_t j = 0; j < q; ++j) base[j] = base_weil(f, targets[j]);

  SmtResult res;
  std::vector<double> min_ratio(q, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const double r = radii[i];
    t_hat[i] = characteristic_T(f, surface, r).value;
    for (std::size_t j = 0; j < q; ++j) {
      n1[j][i] = counting_N(f, targets[j], surface, r, true);
      n1_sum[i] += n1[j][i];
      defect_curve[j][i] = (proximity_m(f, targets[j], surface, r) - base[j]) / t_hat[i];
      if (r >= 0.1 * r_last) min_ratio[j] = std::min(min_ratio[j], defect_curve[j][i]);
    }
    lhs[i] = (static_cast<double>(q) - 2.0) * t_hat[i];
    const double radius_term = surface.kind() == SurfaceKind::euclidean_plane ? log_plus(r) : r;
    rhs[i] = n1_sum[i] + options.envelope_log_t * log_plus(t_hat[i]) + options.envelope_radius * radius_term;
  }
  res.outcome = make_outcome("smt_curve", {radii.begin(), radii.end()}, lhs, rhs, options.budget);
  res.outcome.extra.push_back({"T_hat", t_hat});
  res.outcome.extra.push_back({"sum_N1", n1_sum});
  for (std::size_t j = 0; j < q; ++j) {
    res.outcome.extra.push_back({"N1@" + targets[j].label(), n1[j]});
    res.outcome.extra.push_back({"defect@" + targets[j].label(), defect_curve[j]});
    const double d = std::clamp(min_ratio[j], 0.0, 1.0);
    res.defects.push_back({targets[j], d});
    res.defect_sum += d;
  }
  res.defect_relation = res.defect_sum <= 2.0 + options.defect_slack;
  res.extremality = (n1_sum.back() - (static_cast<double>(q) - 2.0) * t_hat.back()) / t_hat.back();
  res.outcome.verdict = res.outcome.verdict && res.defect_relation;
  nlohmann::json defects = nlohmann::json::object();
  for (const Defect& d : res.defects) defects[d.target.label()] = d.delta;
  res.outcome.details["defects"] = defects;
  res.outcome.details["defect_sum"] = res.defect_sum;
  res.outcome.details["defect_relation"] = res.defect_relation;
  res.outcome.details["extremality"] = res.extremality;
  return res;
}

}  // namespace nevlab
