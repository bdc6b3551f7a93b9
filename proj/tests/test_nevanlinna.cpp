#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nevlab/errors.h"
#include "nevlab/nevanlinna.h"
#include "nevlab/polynomial.h"
#include "nevlab/quadrature.h"

using namespace nevlab;

namespace {

constexpr double kPi = std::numbers::pi;

const ModelSurface kPlane = ModelSurface::euclidean_plane();
const ModelSurface kDisc = ModelSurface::poincare_disc();

// Periodic trapezoid rule; spectrally accurate for smooth periodic integrands.
double circle_mean(auto&& f, int n = 4096) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(2 * kPi * i / n);
  return s / n;
}

// T_Phi(r) = int N(r, zeta) Phi(zeta) over the sphere. With zeta = e^{s + i phi}
// and s = tan u the singular form becomes du dphi / (2 pi^2).
double fubini_singular_form(auto&& counting, double u_max) {
  QuadOptions inner;
  inner.abs_tol = 1e-10;
  inner.rel_tol = 1e-9;
  inner.max_intervals = 20000;
  QuadOptions outer = inner;
  outer.rel_tol = 1e-8;
  const double breaks[] = {0.0};
  auto ring = [&](double u) {
    const double s = std::tan(u);
    return integrate([&](double phi) { return counting(s, phi); }, -kPi, kPi, breaks, inner).value;
  };
  return integrate(ring, -kPi / 2, u_max, breaks, outer).value / (2 * kPi * kPi);
}

}  // namespace

TEST_CASE("polynomial roots with multiplicity") {
  // (z - 1)^2 (z + 2) z
  const Polynomial p = Polynomial{-1.0, 1.0}.pow(2) * Polynomial{2.0, 1.0} * Polynomial::monomial(1);
  const std::vector<Root> roots = find_roots(p);
  int total = 0;
  for (const Root& r : roots) {
    total += r.multiplicity;
    if (std::abs(r.value - 1.0) < 1e-6) CHECK(r.multiplicity == 2);
    CHECK(std::abs(p(r.value)) < 1e-9);
  }
  CHECK(total == 4);
  CHECK(p.derivative()(0.0) == p.coefficient(1));
}

TEST_CASE("catalog maps evaluate correctly") {
  const Complex z{0.3, -0.2};
  CHECK(std::abs(catalog_map("exp").value(z) - std::exp(z)) < 1e-14);
  CHECK(std::abs(catalog_map("tan").value(z) - std::tan(z)) < 1e-14);
  CHECK(std::abs(catalog_map("z2m1").value(z) - (z * z - 1.0)) < 1e-14);
  CHECK(std::abs(catalog_map("exp", {1.0, 0.0}).value(z) - std::exp(z + 1.0)) < 1e-13);
  const Complex sec = 1.0 / std::cos(z);
  CHECK(std::abs(catalog_map("tan").derivative().value(z) - sec * sec) < 1e-12);
  CHECK(std::abs(catalog_map("rational3").derivative(2).value(z) -
                 [&] {
                   const double h = 1e-4;
                   auto f = [](Complex w) { return (w * w * w + 3.0 * w - 2.0) / (4.0 * w * w - 1.0); };
                   return (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
                 }()) < 1e-5);
  // The rescaled pair stays finite up to the double range of the inner map.
  CHECK(catalog_map("exp").log_norm({700.0, 0.0}) == doctest::Approx(700.0));
  CHECK_THROWS_AS(catalog_map("exp").log_norm({800.0, 0.0}), Error);
  const auto entries = map_catalog();
  CHECK(std::is_sorted(entries.begin(), entries.end(), [](auto& a, auto& b) { return a.name < b.name; }));
}

TEST_CASE("projective labels round-trip") {
  for (const ProjectivePoint& p :
       {ProjectivePoint::infinity(), ProjectivePoint::finite(0.0), ProjectivePoint::finite({1.5, -0.25})}) {
    CHECK(ProjectivePoint::parse_label(p.label()) == p);
  }
  CHECK(ProjectivePoint::parse_label("1") == ProjectivePoint::finite(1.0));
  CHECK_THROWS_AS(ProjectivePoint::parse_label("one"), Error);
}

TEST_CASE("spherical characteristic: three routes agree with closed forms") {
  const MeromorphicMap z = catalog_map("z");
  for (double r : {0.5, 2.0, 10.0}) {
    // For psi = z the boundary mean of log sqrt(1 + |z|^2) is exact.
    const double exact = 0.5 * std::log1p(r * r);
    CHECK(characteristic_T(z, kPlane, r).value == doctest::Approx(exact).epsilon(1e-10));
    CHECK(characteristic_T(z, kPlane, r, CharacteristicMethod::boundary).value ==
          doctest::Approx(exact).epsilon(1e-10));
  }
  const MeromorphicMap e = catalog_map("exp");
  for (double r : {2.0, 10.0, 30.0}) {
    const double oracle = circle_mean([&](double th) { return 0.5 * std::log1p(std::exp(2 * r * std::cos(th))); }) -
                          0.5 * std::log(2.0);
    CHECK(characteristic_T(e, kPlane, r).value == doctest::Approx(oracle).epsilon(1e-9));
  }
  for (const char* name : {"tan", "rational3", "mobius"}) {
    const MeromorphicMap f = catalog_map(name);
    for (double r : {0.5, 1.5}) {
      CAPTURE(name);
      const double q = characteristic_T(f, kDisc, r).value;
      const double b = characteristic_T(f, kDisc, r, CharacteristicMethod::boundary).value;
      CHECK(q == doctest::Approx(b).epsilon(1e-9));
    }
  }
}

TEST_CASE("Monte Carlo characteristic within three standard errors") {
  SimConfig sim;
  sim.max_paths = 4000;
  sim.step_dt = 1e-4;
  sim.base_seed = 2;
  sim.workers = 1;
  const MeromorphicMap z = catalog_map("z");
  const CharacteristicValue v = characteristic_T(z, kPlane, 1.0, CharacteristicMethod::montecarlo, &sim);
  CHECK(v.std_error > 0.0);
  CHECK(std::abs(v.value - 0.5 * std::log(2.0)) < 3 * v.std_error);
  CHECK_THROWS_AS(characteristic_T(z, kPlane, 1.0, CharacteristicMethod::montecarlo), Error);
}

TEST_CASE("classical characteristic of the exponential is r / pi") {
  for (double r : {1.0, 5.0, 20.0}) CHECK(classical_T(catalog_map("exp"), kPlane, r) == doctest::Approx(r / kPi));
}

TEST_CASE("counting functions") {
  const ProjectivePoint zero = ProjectivePoint::finite(0.0);
  CHECK(counting_N(catalog_map("z2m1"), zero, kPlane, 2.0) == doctest::Approx(2 * std::log(2.0)));
  CHECK(counting_N(catalog_map("z2"), ProjectivePoint::finite(4.0), kPlane, 4.0) ==
        doctest::Approx(2 * std::log(2.0)));
  // (z - 1)^2: multiplicity counts twice, the truncated function once.
  const MeromorphicMap sq = MeromorphicMap::rational(Polynomial{1.0, -2.0, 1.0}, Polynomial{1.0}, "sq");
  CHECK(counting_N(sq, zero, kPlane, 3.0) == doctest::Approx(2 * std::log(3.0)));
  CHECK(counting_N(sq, zero, kPlane, 3.0, true) == doctest::Approx(std::log(3.0)));
  // Exponential lattice: e^{z+1} = 1 at -1 + 2 pi i k.
  const MeromorphicMap e = catalog_map("exp", {1.0, 0.0});
  double expected = 0.0;
  for (int k = -3; k <= 3; ++k) {
    const double m = std::abs(Complex(-1.0, 2 * kPi * k));
    if (m < 7.0) expected += std::log(7.0 / m);
  }
  CHECK(counting_N(e, ProjectivePoint::finite(1.0), kPlane, 7.0) == doctest::Approx(expected));
  // Base point on the target.
  try {
    counting_N(catalog_map("z"), zero, kPlane, 1.0);
    FAIL("expected a pole error");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::pole);
  }
}

TEST_CASE("first main theorem: the residual is the constant -log 1/||psi(o), a||") {
  std::vector<double> radii;
  for (int i = 0; i < 8; ++i) radii.push_back(2.0 * std::pow(15.0, i / 7.0));
  struct Case {
    const char* map;
    Complex shift;
    std::vector<ProjectivePoint> targets;
  };
  const Case cases[] = {
      {"exp", {}, {ProjectivePoint::finite(0.0), ProjectivePoint::infinity(), ProjectivePoint::finite(-2.0)}},
      {"z", {}, {ProjectivePoint::finite(1.0), ProjectivePoint::infinity()}},
      {"z2m1", {}, {ProjectivePoint::finite(0.0), ProjectivePoint::finite({0.0, 3.0})}},
      {"rational3", {}, {ProjectivePoint::infinity(), ProjectivePoint::finite(0.0)}},
      {"tan", {}, {ProjectivePoint::finite(1.0), ProjectivePoint::infinity()}},
  };
  for (const Case& c : cases) {
    const MeromorphicMap f = catalog_map(c.map, c.shift);
    for (const ProjectivePoint& a : c.targets) {
      CAPTURE(c.map);
      CAPTURE(a.label());
      const double constant = -base_weil(f, a);
      for (double v : fmt_residual(f, a, kPlane, radii)) CHECK(v == doctest::Approx(constant).epsilon(1e-7).scale(1.0));
      const std::vector<double> disc_radii{0.5, 1.0, 2.0, 4.0};
      for (double v : fmt_residual(f, a, kDisc, disc_radii))
        CHECK(v == doctest::Approx(constant).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("proximity: spherical and classical forms differ by a bounded amount") {
  const MeromorphicMap e = catalog_map("exp");
  for (double r : {2.0, 10.0}) {
    const double s = proximity_m(e, ProjectivePoint::infinity(), kPlane, r);
    const double c = proximity_m(e, ProjectivePoint::infinity(), kPlane, r, ProximityKind::classical);
    CHECK(c == doctest::Approx(r / kPi));
    CHECK(std::abs(s - c) <= 0.5 * std::log(2.0) + 1e-9);
  }
}

TEST_CASE("singular-form characteristic matches the Fubini oracle") {
  const MeromorphicMap shifted_z = catalog_map("z", {1.0, 0.0});
  const MeromorphicMap e = catalog_map("exp");
  for (double r : {2.0, 5.0}) {
    // psi = z + 1: one preimage zeta - 1 of every zeta.
    const double oracle_z = fubini_singular_form(
        [&](double s, double phi) {
          const double m = std::abs(std::exp(Complex(s, phi)) - 1.0);
          return m < r ? std::log(r / m) : 0.0;
        },
        std::atan(std::log(r + 1.0)));
    CHECK(singular_form_T(shifted_z, kPlane, r) == doctest::Approx(oracle_z).epsilon(1e-5));

    // psi = e^z: preimages s + i(phi + 2 pi k).
    const double oracle_e = fubini_singular_form(
        [&](double s, double phi) {
          double n = 0.0;
          for (int k = -10; k <= 10; ++k) {
            const double m = std::abs(Complex(s, phi + 2 * kPi * k));
            if (m < r) n += std::log(r / m);
          }
          return n;
        },
        std::atan(r));
    CHECK(singular_form_T(e, kPlane, r) == doctest::Approx(oracle_e).epsilon(1e-5));
  }
  CHECK_THROWS_AS(singular_form_T(catalog_map("z"), kPlane, 2.0), Error);
}

TEST_CASE("report round-trips through CSV and JSON") {
  const MeromorphicMap e = catalog_map("exp");
  const std::vector<double> radii{2.0, 4.0, 8.0};
  const std::vector<ProjectivePoint> targets{ProjectivePoint::finite(0.0), ProjectivePoint::infinity()};
  ReportOptions opt;
  opt.singular_form = true;
  const NevanlinnaReport rep = build_report(e, kPlane, radii, targets, opt);
  CHECK(rep.T_phi.size() == radii.size());

  std::ostringstream csv;
  rep.write_csv(csv);
  CHECK(csv.str().rfind("r,T,T_hat,T_hat_se,T_phi,m@0+0i,N@0+0i,N1@0+0i,m@inf,N@inf,N1@inf\n", 0) == 0);
  std::istringstream in(csv.str());
  CHECK(NevanlinnaReport::read_csv(in, rep.map_name, rep.surface_name, rep.method) == rep);
  CHECK(NevanlinnaReport::from_json(rep.to_json()) == rep);
}

TEST_CASE("preimage locator agrees with the argument principle") {
  for (const char* name : {"tan", "rational3", "exp", "z2m1"}) {
    const MeromorphicMap f = catalog_map(name, {0.1, 0.05});
    for (const ProjectivePoint& a : {ProjectivePoint::finite(0.5), ProjectivePoint::infinity()}) {
      const double modulus = 9.3;
      int total = 0;
      for (const Preimage& p : f.validated_preimages(a, modulus)) {
        CHECK(std::abs(p.z) < modulus);
        total += p.multiplicity;
      }
      CAPTURE(name);
      CHECK(total == f.winding_count(a, modulus));
    }
  }
}
