#include "nevlab/brownian.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "nevlab/errors.h"
#include "nevlab/philox.h"

namespace nevlab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kBlock = 1024;  // paths per reduction block
constexpr double kMaxCensoredFraction = 1e-3;

// Conformal factor as a function of |z|^2 without the generic dispatch on the
// two closed-form surfaces (this sits in the innermost loop).
struct ConformalFactor {
  const ModelSurface& surface;

  double operator()(double modulus2) const {
    switch (surface.kind()) {
      case SurfaceKind::euclidean_plane: return 0.5;
      case SurfaceKind::poincare_disc: {
        const double d = 1.0 - modulus2;
        return 2.0 / (d * d);
      }
      case SurfaceKind::radial: return surface.conformal_factor_at_modulus(std::sqrt(modulus2));
    }
    return 0.5;
  }
};

// Returns false when the step cap is hit before exit.
bool simulate(const ModelSurface& surface, const SimConfig& config,
              std::span<const PointFunction> functionals, std::uint64_t path_index,
              StoppedPath& out) {
  const ConformalFactor g{surface};
  const double rho = surface.conformal_radius(config.radius);
  const double dt = config.step_dt;
  const Complex drift_step = config.drift * dt;
  PhiloxStream rng(config.base_seed, path_index);

  out.occupation.assign(functionals.size(), 0.0);
  out.censored = false;
  Complex z{0.0, 0.0};
  double t = 0.0;
  auto accumulate = [&](Complex at, double weight) {
    for (std::size_t k = 0; k < functionals.size(); ++k) out.occupation[k] += functionals[k](at) * weight;
  };

  // The smallest 32-bit uniform is 2^-33 > e^-23, so the bridge test can only
  // fire below this exponent; above it no uniform is drawn.
  constexpr double kBridgeCutoff = 23.0;
  double m0 = 0.0;
  for (std::uint64_t step = 0; step < config.max_steps; ++step) {
    const double var = dt / (2.0 * g(m0 * m0));
    const double sigma = std::sqrt(var);
    const auto [n0, n1] = normal_pair(rng);
    const Complex z1 = z + sigma * Complex(n0, n1) + drift_step;
    const double m1 = std::sqrt(std::norm(z1));

    if (m1 > rho) {
      const double lambda = (rho - m0) / (m1 - m0);
      const Complex cross = z + lambda * (z1 - z);
      accumulate(z, lambda * dt);
      out.exit_time = t + lambda * dt;
      out.exit_point = std::polar(rho, std::arg(cross));
      out.steps = step + 1;
      return true;
    }
    // Probability that the bridge between two interior samples touched the
    // (locally flat) boundary.
    const double exponent = 2.0 * (rho - m0) * (rho - m1) / var;
    if (exponent < kBridgeCutoff && uniform32(rng.next()[0]) < std::exp(-exponent)) {
      const Complex mid = z + z1;
      accumulate(z, 0.5 * dt);
      out.exit_time = t + 0.5 * dt;
      out.exit_point = std::polar(rho, std::arg(std::abs(mid) > 0.0 ? mid : z1));
      out.steps = step + 1;
      return true;
    }
    accumulate(z, dt);
    z = z1;
    m0 = m1;
    t += dt;
  }
  out.exit_time = t;
  out.exit_point = z;
  out.steps = config.max_steps;
  out.censored = true;
  return false;
}

}  // namespace

void validate(const SimConfig& config) {
  if (!(config.step_dt > 0.0) || !std::isfinite(config.step_dt))
    throw Error(Errc::invalid_configuration, "sim.step must be positive");
  if (config.max_paths < 1) throw Error(Errc::invalid_configuration, "sim.paths must be >= 1");
  if (!(config.radius > 0.0) || !std::isfinite(config.radius))
    throw Error(Errc::invalid_configuration, "sim.radius must be positive");
  if (config.max_steps < 1) throw Error(Errc::invalid_configuration, "sim.max_steps must be >= 1");
}

// ---------------------------------------------------------------------------
// RunningStats

void RunningStats::push(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double RunningStats::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

MCEstimate RunningStats::estimate() const {
  if (n_ == 0) throw Error(Errc::reliability, "estimate from zero samples");
  return {mean_, std::sqrt(variance() / static_cast<double>(n_)), n_};
}

// ---------------------------------------------------------------------------
// Simulation

StoppedPath simulate_stopped_path(const ModelSurface& surface, const SimConfig& config,
                                  std::span<const PointFunction> functionals,
                                  std::uint64_t path_index) {
  validate(config);
  StoppedPath path;
  if (!simulate(surface, config, functionals, path_index, path))
    throw Error(Errc::non_exit, "path " + std::to_string(path_index) + " did not exit within " +
                                    std::to_string(config.max_steps) + " steps");
  return path;
}

Ensemble run_ensemble(const ModelSurface& surface, const SimConfig& config,
                      std::span<const PointFunction> functionals) {
  validate(config);
  if (config.radius > surface.max_radius())
    throw Error(Errc::domain, "simulation ball exceeds the surface chart");
  Ensemble ensemble;
  ensemble.paths.resize(config.max_paths);
  const std::uint64_t blocks = (config.max_paths + kBlock - 1) / kBlock;
  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));

  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> censored{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::uint64_t b = next++; b < blocks; b = next++) {
        const std::uint64_t end = std::min(config.max_paths, (b + 1) * kBlock);
        for (std::uint64_t i = b * kBlock; i < end; ++i)
          if (!simulate(surface, config, functionals, i, ensemble.paths[i])) ++censored;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = blocks;
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  ensemble.censored = censored;
  return ensemble;
}

MCEstimate summarize(const Ensemble& ensemble,
                     const std::function<double(const StoppedPath&)>& observable) {
  if (ensemble.censored_fraction() > kMaxCensoredFraction)
    throw Error(Errc::reliability, "censored fraction " + std::to_string(ensemble.censored_fraction()) +
                                       " exceeds 0.1%");
  RunningStats total;
  const std::size_t n = ensemble.paths.size();
  for (std::size_t start = 0; start < n; start += kBlock) {
    RunningStats block;
    for (std::size_t i = start; i < std::min(n, start + kBlock); ++i)
      if (!ensemble.paths[i].censored) block.push(observable(ensemble.paths[i]));
    total.merge(block);
  }
  return total.estimate();
}

MCEstimate exit_time_of(const Ensemble& ensemble) {
  return summarize(ensemble, [](const StoppedPath& p) { return p.exit_time; });
}

MCEstimate estimate_exit_time(const ModelSurface& surface, const SimConfig& config) {
  return exit_time_of(run_ensemble(surface, config, {}));
}

// ---------------------------------------------------------------------------
// Audits

CoareaResult coarea_from(const Ensemble& ensemble, std::size_t slot, const ModelSurface& surface,
                         double radius, const OccupationTest& phi) {
  CoareaResult out;
  out.monte_carlo = summarize(ensemble, [slot](const StoppedPath& p) { return p.occupation.at(slot); });
  const GreenKernel kernel(surface, radius);
  if (phi.radial) {
    out.quadrature = green_radial_integral(kernel, [&](double t) { return phi.radial(t); });
  } else {
    out.quadrature = green_integral(kernel, [&](Complex z) { return phi.at_point(z); });
  }
  out.agrees = std::abs(out.monte_carlo.mean - out.quadrature) <= 3.0 * out.monte_carlo.std_error;
  return out;
}

CoareaResult coarea_audit(const ModelSurface& surface, const SimConfig& config,
                          const OccupationTest& phi) {
  const PointFunction f[] = {phi.at_point};
  return coarea_from(run_ensemble(surface, config, f), 0, surface, config.radius, phi);
}

PointFunction dynkin_occupation(const ModelSurface& surface, const DynkinTest& u) {
  const ConformalFactor g{surface};
  return [g, lap = u.flat_laplacian](Complex z) { return lap(z) / (2.0 * g(std::norm(z))); };
}

DynkinResult dynkin_from(const Ensemble& ensemble, std::size_t slot, const DynkinTest& u) {
  DynkinResult out;
  out.start_value = u.value(Complex{0.0, 0.0});
  const MCEstimate boundary = summarize(ensemble, [&](const StoppedPath& p) { return u.value(p.exit_point); });
  const MCEstimate occupation =
      summarize(ensemble, [slot](const StoppedPath& p) { return 0.5 * p.occupation.at(slot); });
  const MCEstimate residual = summarize(ensemble, [&](const StoppedPath& p) {
    return u.value(p.exit_point) - out.start_value - 0.5 * p.occupation.at(slot);
  });
  out.boundary_mean = boundary.mean;
  out.half_occupation = occupation.mean;
  out.residual = std::abs(residual.mean);
  out.sigma = residual.std_error;
  out.agrees = out.residual <= 3.0 * out.sigma;
  return out;
}

DynkinResult dynkin_audit(const ModelSurface& surface, const SimConfig& config, const DynkinTest& u) {
  const PointFunction f[] = {dynkin_occupation(surface, u)};
  return dynkin_from(run_ensemble(surface, config, f), 0, u);
}

ExitDistribution exit_distribution_of(const Ensemble& ensemble, int n_bins) {
  if (n_bins < 2) throw Error(Errc::invalid_configuration, "exit distribution needs n_bins >= 2");
  const std::uint64_t usable = ensemble.paths.size() - ensemble.censored;
  if (usable < 5u * static_cast<std::uint64_t>(n_bins))
    throw Error(Errc::invalid_configuration, "fewer than 5 paths per exit-angle bin");
  ExitDistribution out;
  out.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (const StoppedPath& p : ensemble.paths) {
    if (p.censored) continue;
    double angle = std::arg(p.exit_point);
    if (angle < 0.0) angle += 2 * kPi;
    auto bin = static_cast<std::size_t>(angle / (2 * kPi) * n_bins);
    ++out.counts[std::min(bin, out.counts.size() - 1)];
  }
  const double expected = static_cast<double>(usable) / n_bins;
  for (std::uint64_t c : out.counts) {
    const double d = static_cast<double>(c) - expected;
    out.statistic += d * d / expected;
  }
  out.degrees_of_freedom = n_bins - 1;
  const boost::math::chi_squared dist(out.degrees_of_freedom);
  out.critical_value = boost::math::quantile(boost::math::complement(dist, 1e-3));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  out.uniform = out.statistic <= out.critical_value;
  return out;
}

ExitDistribution exit_distribution_audit(const ModelSurface& surface, const SimConfig& config,
                                         int n_bins) {
  if (n_bins >= 2 && config.max_paths < 5u * static_cast<std::uint64_t>(n_bins))
    throw Error(Errc::invalid_configuration, "fewer than 5 paths per exit-angle bin");
  return exit_distribution_of(run_ensemble(surface, config, {}), n_bins);
}

void write_path_records(std::ostream& out, const Ensemble& ensemble,
                        std::span<const std::string> functional_names) {
  out << "path_index,tau,exit_angle,censored";
  for (const auto& name : functional_names) out << ',' << name;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
    const StoppedPath& p = ensemble.paths[i];
    out << i;
    std::snprintf(buf, sizeof buf, ",%.17g", p.exit_time);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", std::arg(p.exit_point));
    out << buf << ',' << (p.censored ? 1 : 0);
    for (std::size_t k = 0; k < functional_names.size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", k < p.occupation.size() ? p.occupation[k] : 0.0);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace nevlab
