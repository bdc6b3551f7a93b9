#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nevlab/errors.h"
#include "nevlab/surface.h"

using namespace nevlab;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected nevlab::Error");
  return Errc::io;
}

}  // namespace

TEST_CASE("flat Jacobi solution is the identity") {
  const JacobiSolution g = solve_jacobi(CurvatureProfile::constant(0.0), 5.0);
  for (double t : g.grid()) CHECK(g.value(t) == doctest::Approx(t).epsilon(1e-12));
  CHECK(g.derivative(2.5) == doctest::Approx(1.0));
}

TEST_CASE("constant negative curvature gives hyperbolic sines") {
  const JacobiSolution g1 = solve_jacobi(CurvatureProfile::constant(-1.0), 5.0, 1e-3);
  double worst = 0.0;
  for (double t : g1.grid()) worst = std::max(worst, std::abs(g1.value(t) - std::sinh(t)));
  CHECK(worst < 1e-6);

  const JacobiSolution g4 = solve_jacobi(CurvatureProfile::constant(-4.0), 3.0, 1e-3);
  worst = 0.0;
  for (double t : g4.grid()) worst = std::max(worst, std::abs(g4.value(t) - std::sinh(2 * t) / 2));
  CHECK(worst < 1e-6);

  // Interpolated values between grid points keep the accuracy.
  CHECK(g1.value(1.23456) == doctest::Approx(std::sinh(1.23456)).epsilon(1e-9));
}

TEST_CASE("halving the step shrinks the error at least fourfold") {
  auto error = [](double step) {
    const JacobiSolution g = solve_jacobi(CurvatureProfile::constant(-1.0), 4.0, step);
    return std::abs(g.value(4.0) - std::sinh(4.0));
  };
  CHECK(error(0.05) / error(0.025) > 4.0);
}

TEST_CASE("invalid profiles and configurations are rejected") {
  CHECK(code_of([] { CurvatureProfile::constant(0.5); }) == Errc::invalid_profile);
  CHECK(code_of([] { CurvatureProfile::tabulated({0, 1, 2}, {-1, -0.5, -2}); }) == Errc::invalid_profile);
  CHECK(code_of([] { CurvatureProfile::tabulated({0, 1}, {0.1, -1}); }) == Errc::invalid_profile);
  CHECK(code_of([] { solve_jacobi(CurvatureProfile::constant(-1.0), 1.0, 1.0); }) == Errc::invalid_configuration);
  CHECK(code_of([] { solve_jacobi(CurvatureProfile::constant(-1.0), -1.0, 0.1); }) == Errc::invalid_configuration);
}

TEST_CASE("profile files: comments, commas and malformed lines") {
  std::istringstream good("# t kappa\n0, 0\n1 -0.5\n\n2,-2 # tail\n");
  const CurvatureProfile p = CurvatureProfile::parse(good);
  CHECK(p(0.5) == doctest::Approx(-0.25));
  CHECK(p(1.5) == doctest::Approx(-1.25));
  CHECK(p.domain_max() == 2.0);

  std::istringstream bad("0 0\n1\n");
  CHECK(code_of([&] { CurvatureProfile::parse(bad); }) == Errc::invalid_profile);
}

TEST_CASE("Jacobi comparison bounds hold for random monotone profiles") {
  std::mt19937_64 rng(20261019);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t{0.0}, k{-2.0 * unit(rng)};
    while (t.back() < 6.0) {
      t.push_back(t.back() + 0.1 + unit(rng));
      k.push_back(k.back() - 0.5 * unit(rng));
    }
    const CurvatureProfile profile = CurvatureProfile::tabulated(t, k);
    const JacobiSolution g = solve_jacobi(profile, 6.0, 1e-3);
    for (double r : g.grid()) {
      if (r == 0.0) continue;
      REQUIRE(g.value(r) >= r - 1e-9);
      REQUIRE(g.value(r) <= r * std::exp(r * std::sqrt(-profile(r))) * (1 + 1e-9));
      if (r >= 1.0) REQUIRE(g.inverse_integral(1.0, r) <= std::log(r) + 1e-9);
    }
  }
}

TEST_CASE("model surface presentations") {
  const ModelSurface plane = ModelSurface::euclidean_plane();
  const ModelSurface disc = ModelSurface::poincare_disc();
  CHECK(plane.conformal_factor({0.3, 0.4}) == doctest::Approx(0.5));
  CHECK(disc.conformal_factor({0.3, 0.4}) == doctest::Approx(2.0 / std::pow(1 - 0.25, 2)));
  CHECK(disc.jacobi(1.7) == doctest::Approx(std::sinh(1.7)));
  CHECK(plane.jacobi(1.7) == doctest::Approx(1.7));
  CHECK(disc.geodesic_radius({0.5, 0.0}) == doctest::Approx(std::log(3.0)));
  CHECK(disc.modulus_bound() == 1.0);

  const CurvatureProfile profile = CurvatureProfile::tabulated({0, 1, 2, 4, 8}, {0, -0.3, -1, -1.5, -1.5});
  const ModelSurface radial = ModelSurface::radial(profile, 8.0);
  for (const ModelSurface* s : {&plane, &disc, &radial}) {
    CHECK(s->jacobi(0.0) == doctest::Approx(0.0));
    for (double r : {0.2, 1.0, 2.5, 5.0}) {
      CAPTURE(s->name());
      CAPTURE(r);
      CHECK(s->geodesic_radius(s->point(r, 0.7)) == doctest::Approx(r).epsilon(1e-8));
      CHECK(s->jacobi(r) > 0.0);
      // Cross-presentation curvature consistency.
      const double rho = s->conformal_radius(r);
      CHECK(curvature_from_conformal(*s, rho) == doctest::Approx(curvature_from_jacobi(*s, r)).epsilon(1e-4).scale(1.0));
    }
  }
  // The radial surface's curvature never drops below the profile.
  CHECK(curvature_from_jacobi(radial, 3.0) == doctest::Approx(profile(3.0)).epsilon(1e-5));
}

TEST_CASE("Euclidean and hyperbolic radii correspond") {
  CHECK(hyperbolic_radius(0.5) == doctest::Approx(std::log(3.0)));
  for (double rt : {0.01, 0.3, 0.9, 0.999}) CHECK(euclidean_radius(hyperbolic_radius(rt)) == doctest::Approx(rt));
}
