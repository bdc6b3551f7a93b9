#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nevlab/brownian.h"
#include "nevlab/errors.h"
#include "nevlab/philox.h"

using namespace nevlab;

namespace {

SimConfig small_config(double radius, std::uint64_t paths, std::uint64_t seed) {
  SimConfig c;
  c.radius = radius;
  c.step_dt = 1e-4 * radius * radius;
  c.max_paths = paths;
  c.base_seed = seed;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::generate(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal pairs have unit variance and no correlation") {
  PhiloxStream stream(123, 4);
  RunningStats x, y, xy, x4;
  for (int i = 0; i < 200000; ++i) {
    const auto p = normal_pair(stream);
    x.push(p[0]);
    y.push(p[1]);
    xy.push(p[0] * p[1]);
    x4.push(p[0] * p[0] * p[0] * p[0]);
  }
  CHECK(std::abs(x.mean()) < 0.01);
  CHECK(std::abs(y.mean()) < 0.01);
  CHECK(x.variance() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(xy.mean()) < 0.01);
  CHECK(x4.mean() == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("running statistics merge like a single pass") {
  RunningStats all, a, b;
  for (int i = 0; i < 100; ++i) {
    const double v = std::sin(i * 0.37) * 3 + i * 0.01;
    all.push(v);
    (i < 37 ? a : b).push(v);
  }
  a.merge(b);
  CHECK(a.count() == all.count());
  CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("configuration validation") {
  SimConfig c;
  c.step_dt = 0.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = SimConfig{};
  c.radius = -1.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = SimConfig{};
  c.max_paths = 0;
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("a single path exits on the boundary circle") {
  const ModelSurface disc = ModelSurface::poincare_disc();
  const SimConfig c = small_config(1.5, 1, 9);
  const StoppedPath p = simulate_stopped_path(disc, c, {}, 0);
  CHECK_FALSE(p.censored);
  CHECK(disc.geodesic_radius(p.exit_point) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(p.exit_time > 0.0);
  // Deterministic in (seed, index).
  const StoppedPath q = simulate_stopped_path(disc, c, {}, 0);
  CHECK(p.exit_time == q.exit_time);
  CHECK(p.exit_point == q.exit_point);
}

TEST_CASE("step budget exhaustion") {
  SimConfig c = small_config(1.0, 1, 1);
  c.max_steps = 10;
  CHECK_THROWS_AS(simulate_stopped_path(ModelSurface::euclidean_plane(), c, {}, 0), Error);
  c.max_paths = 100;
  const Ensemble e = run_ensemble(ModelSurface::euclidean_plane(), c, {});
  CHECK(e.censored_fraction() == 1.0);
  try {
    exit_time_of(e);
    FAIL("expected a reliability error");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::reliability);
  }
}

TEST_CASE("Euclidean exit time is r^2/2") {
  const MCEstimate e = estimate_exit_time(ModelSurface::euclidean_plane(), small_config(1.0, 10000, 77));
  CHECK(e.n == 10000);
  CHECK(std::abs(e.mean - 0.5) < 3 * e.std_error);
  CHECK(e.std_error < 0.01);
}

TEST_CASE("ensembles do not depend on the worker count") {
  const ModelSurface disc = ModelSurface::poincare_disc();
  SimConfig c = small_config(1.0, 300, 5);
  std::vector<PointFunction> f{[](Complex z) { return std::norm(z); }};
  const std::string names[] = {"abs2"};
  std::string text[2];
  for (unsigned w : {1u, 3u}) {
    c.workers = w;
    std::ostringstream out;
    write_path_records(out, run_ensemble(disc, c, f), names);
    text[w == 1 ? 0 : 1] = out.str();
  }
  CHECK(text[0] == text[1]);
  CHECK(text[0].rfind("path_index,tau,exit_angle,censored,abs2\n", 0) == 0);
}

TEST_CASE("coarea: occupation sums match Green quadrature") {
  const ModelSurface plane = ModelSurface::euclidean_plane();
  const OccupationTest r2{[](Complex z) { return std::norm(z); }, [](double t) { return t * t; }};
  const CoareaResult c = coarea_audit(plane, small_config(1.0, 4000, 3), r2);
  CHECK(c.quadrature == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(c.agrees);

  const ModelSurface disc = ModelSurface::poincare_disc();
  const OccupationTest one{[](Complex) { return 1.0; }, {}};
  const CoareaResult d = coarea_audit(disc, small_config(2.0, 4000, 4), one);
  CHECK(d.agrees);
}

TEST_CASE("Dynkin identity") {
  const ModelSurface plane = ModelSurface::euclidean_plane();
  const DynkinTest abs2{[](Complex z) { return std::norm(z); }, [](Complex) { return 4.0; }};
  const DynkinResult d = dynkin_audit(plane, small_config(1.0, 4000, 8), abs2);
  CHECK(d.boundary_mean == doctest::Approx(1.0));
  CHECK(d.start_value == 0.0);
  CHECK(d.agrees);
}

TEST_CASE("exit angles are uniform") {
  const ExitDistribution x = exit_distribution_audit(ModelSurface::poincare_disc(), small_config(1.0, 4000, 10), 16);
  CHECK(x.counts.size() == 16);
  CHECK(x.degrees_of_freedom == 15.0);
  CHECK(x.uniform);
  CHECK_THROWS_AS(exit_distribution_audit(ModelSurface::poincare_disc(), small_config(1.0, 40, 10), 16), Error);
}

TEST_CASE("negative control: a drifting stepper fails the audits") {
  const ModelSurface plane = ModelSurface::euclidean_plane();
  SimConfig c = small_config(1.0, 4000, 12);
  c.drift = {0.5, 0.0};
  const DynkinTest re{[](Complex z) { return z.real(); }, [](Complex) { return 0.0; }};
  CHECK_FALSE(dynkin_audit(plane, c, re).agrees);
  CHECK_FALSE(exit_distribution_audit(plane, c, 16).uniform);
}
