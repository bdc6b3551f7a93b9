#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nevlab/errors.h"
#include "nevlab/nevanlinna.h"
#include "nevlab/theorems.h"

using namespace nevlab;

namespace {

const ModelSurface kPlane = ModelSurface::euclidean_plane();
const ModelSurface kDisc = ModelSurface::poincare_disc();

}  // namespace

TEST_CASE("grids and exceptional sets") {
  const GridSpec lin{1.0, 3.0, 5, Spacing::linear};
  CHECK(lin.points() == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
  const GridSpec ext = lin.extended();
  CHECK(ext.max == 5.0);
  CHECK(ext.count == 9);
  const GridSpec lg{1.0, 100.0, 3, Spacing::log};
  CHECK(lg.points()[1] == doctest::Approx(10.0));
  CHECK(lg.extended().max == doctest::Approx(1e4));
  CHECK_THROWS_AS((GridSpec{3.0, 1.0, 5, Spacing::linear}.validate()), Error);

  const std::vector<double> r{1, 2, 3, 4}, lhs{0, 5, 0, 5}, rhs{1, 1, 1, 1};
  const AuditOutcome o = make_outcome("t", r, lhs, rhs);
  CHECK(o.exceptional_measure == doctest::Approx(1.5));  // cells [1.5, 2.5] and [3.5, 4]
  CHECK(o.min_margin == -4.0);
  CHECK(o.verdict);
  CHECK_FALSE(make_outcome("t", r, lhs, rhs, 1.0).verdict);
  std::ostringstream csv;
  o.write_csv(csv);
  CHECK(csv.str().rfind("r,lhs,rhs,margin,exceptional\n", 0) == 0);
}

TEST_CASE("Borel growth lemma on e^r") {
  std::vector<double> r, u;
  for (int i = 0; i <= 200; ++i) {
    r.push_back(0.1 + 9.9 * i / 200.0);
    u.push_back(std::exp(r.back()));
  }
  const AuditOutcome o = borel_audit(r, u, 1.0);
  CHECK(o.verdict);
  // u' = u fails only where log u = r < 1.
  REQUIRE_FALSE(o.exceptional.empty());
  CHECK(o.exceptional.back().hi < 1.1);
  std::reverse(u.begin(), u.end());
  try {
    borel_audit(r, u, 1.0);
    FAIL("expected a monotonicity error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::monotonicity);
  }
}

TEST_CASE("comparison solution follows the surface curvature") {
  CHECK(comparison_solution(kDisc, 4.0).value(2.0) == doctest::Approx(std::sinh(2.0)).epsilon(1e-9));
  CHECK(comparison_solution(kPlane, 4.0).value(2.0) == doctest::Approx(2.0));
}

TEST_CASE("calculus lemma for the pulled-back density") {
  const MeromorphicMap e = catalog_map("exp");
  for (const ModelSurface* s : {&kPlane, &kDisc}) {
    OccupationTest k{[&](Complex z) { return e.spherical_density(z) / (2 * s->conformal_factor(z)); }, {}};
    const GridSpec grid{1.5, 8.0, 12, Spacing::log};
    const AuditOutcome o = calculus_lemma_audit(k, *s, grid.points(), 0.1);
    CAPTURE(s->name());
    CHECK(o.verdict);
    CHECK(o.details["C"].get<double>() > 0.0);
    // E[int k] is the spherical characteristic.
    CHECK(o.extra[0].second.back() == doctest::Approx(characteristic_T(e, *s, 8.0).value).epsilon(1e-6));
  }
  OccupationTest one{[](Complex) { return 1.0; }, [](double) { return 1.0; }};
  CHECK_THROWS_AS(calculus_lemma_audit(one, kPlane, std::vector<double>{0.5, 2.0}, 0.1), Error);
}

TEST_CASE("LDL calibration is feasible and tight on the calibration map") {
  const GridSpec grid{2.0, 20.0, 15, Spacing::log};
  const MeromorphicMap cal = catalog_map("z2m1");
  for (const ModelSurface* s : {&kPlane, &kDisc})
    for (int k : {1, 2}) {
      const LdlEnvelope env = calibrate_ldl(cal, *s, k, grid.points());
      for (double c : env) CHECK(c >= 0.0);
      const AuditOutcome o = ldl_audit(cal, *s, k, grid.points(), env);
      CAPTURE(s->name());
      CAPTURE(k);
      CHECK(o.min_margin >= -1e-9);
      CHECK(o.exceptional_measure == 0.0);
    }
  CHECK(log_derivative_proximity(catalog_map("exp"), kPlane, 3.0, 1) == doctest::Approx(0.0).scale(1.0));
  // psi = z: |psi'/psi| = 1/r, so m = log+ (1/r).
  CHECK(log_derivative_proximity(catalog_map("z", {0.0, 0.0}), kPlane, 0.5, 1) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("derivative growth") {
  const GridSpec grid{2.0, 20.0, 10, Spacing::log};
  CHECK(derivative_growth_audit(catalog_map("exp"), kPlane, 1, grid.points()).verdict);
  CHECK(derivative_growth_audit(catalog_map("rational3"), kPlane, 2, grid.points()).verdict);
}

TEST_CASE("metric match between the Poincare disc and the unit disc") {
  const std::vector<double> rt{0.3, 0.6, 0.9};
  for (const char* name : {"z", "mobius", "z2"}) {
    const MetricMatch m = metric_match_audit(catalog_map(name), rt);
    CAPTURE(name);
    CHECK(m.rows.size() == 3);
    CHECK(m.max_deviation < 1e-8);
  }
  // psi = z on the unit disc: T(r) = (1/2) log(1 + r^2).
  const MetricMatch z = metric_match_audit(catalog_map("z"), rt);
  for (const MetricMatchRow& row : z.rows)
    CHECK(row.euclidean_disc == doctest::Approx(0.5 * std::log1p(row.euclidean_radius * row.euclidean_radius)));
  CHECK_THROWS_AS(metric_match_audit(catalog_map("z"), std::vector<double>{0.9995}), Error);
}

TEST_CASE("second main theorem: the exponential is extremal") {
  const MeromorphicMap e = catalog_map("exp", {1.0, 0.0});
  const std::vector<ProjectivePoint> targets{ProjectivePoint::finite(0.0), ProjectivePoint::finite(1.0),
                                             ProjectivePoint::infinity()};
  const GridSpec grid{3.0, 30.0, 12, Spacing::log};
  const SmtResult r = smt_curve_audit(e, targets, kPlane, grid.points());
  CHECK(r.outcome.verdict);
  CHECK(r.defects[0].delta == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.defects[1].delta == doctest::Approx(0.0).scale(1.0).epsilon(0.05));
  CHECK(r.defects[2].delta == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.defect_relation);
  CHECK(r.extremality < 0.1);

  // A rational map has no defects.
  const SmtResult q = smt_curve_audit(catalog_map("rational3"), targets, kPlane, grid.points());
  CHECK(q.outcome.verdict);
  CHECK(q.defect_sum < 0.5);

  const std::vector<ProjectivePoint> two{ProjectivePoint::finite(0.0), ProjectivePoint::infinity()};
  CHECK_THROWS_AS(smt_curve_audit(e, two, kPlane, grid.points()), Error);
  const std::vector<ProjectivePoint> dup{ProjectivePoint::finite(0.0), ProjectivePoint::finite(0.0),
                                         ProjectivePoint::infinity()};
  CHECK_THROWS_AS(smt_curve_audit(e, dup, kPlane, grid.points()), Error);
}

TEST_CASE("extension check") {
  const GridSpec grid{1.0, 10.0, 10, Spacing::linear};
  // Fails on [1, 2) only: finite exceptional set.
  const AuditOutcome good = with_extension_check(
      [](std::span<const double> r) {
        std::vector<double> lhs(r.size()), rhs(r.size(), 1.0);
        for (std::size_t i = 0; i < r.size(); ++i) lhs[i] = r[i] < 2.0 ? 2.0 : 0.0;
        return make_outcome("good", {r.begin(), r.end()}, lhs, rhs);
      },
      grid);
  CHECK(good.verdict);
  CHECK(good.extension_stable.value());
  // Fails beyond r = 8: the exceptional set grows with the grid.
  const AuditOutcome bad = with_extension_check(
      [](std::span<const double> r) {
        std::vector<double> lhs(r.size()), rhs(r.size(), 1.0);
        for (std::size_t i = 0; i < r.size(); ++i) lhs[i] = r[i] > 8.0 ? 2.0 : 0.0;
        return make_outcome("bad", {r.begin(), r.end()}, lhs, rhs);
      },
      grid);
  CHECK_FALSE(bad.verdict);
  CHECK_FALSE(bad.extension_stable.value());
}
