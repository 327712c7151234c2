#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <initializer_list>

#include "alig/projection.hpp"
#include "alig/rng.hpp"

using namespace alig;

TEST_CASE("unconstrained projection returns the point bitwise") {
  Rng rng(1);
  const Vectord w = rng.gaussian_vector<double>(7);
  const Vectord out = project(FeasibleRegiond::all(), w);
  CHECK((out.array() == w.array()).all());
  CHECK(distance_to(FeasibleRegiond::all(), w) == 0.0);
  CHECK(contains(FeasibleRegiond::all(), w));
}

TEST_CASE("ball projection: interior points untouched, exterior rescaled onto the sphere") {
  const auto region = FeasibleRegiond::ball(2.0);
  Vectord inside(3);
  inside << 0.5, -1.0, 0.25;
  const Vectord kept = project(region, inside);
  CHECK((kept.array() == inside.array()).all());

  Vectord outside(3);
  outside << 3.0, 0.0, 4.0;  // norm 5
  const Vectord moved = project(region, outside);
  CHECK(moved.norm() == doctest::Approx(2.0).epsilon(1e-15));
  // The radius bounds the norm itself: a point of norm 5 lands at norm 2.
  CHECK(moved[0] == doctest::Approx(3.0 * 2.0 / 5.0));
  CHECK(moved[2] == doctest::Approx(4.0 * 2.0 / 5.0));
  CHECK(distance_to(region, outside) == doctest::Approx(3.0));
  CHECK(contains(region, moved, 1e-12));

  // A boundary-norm point is inside (<=), hence bitwise unchanged.
  Vectord rim(1);
  rim << 2.0;
  CHECK(project(region, rim)[0] == 2.0);
}

TEST_CASE("ball projection requires a positive radius") {
  Vectord w(2);
  w << 1.0, 1.0;
  CHECK_THROWS_AS(project(FeasibleRegiond::ball(0.0), w), std::invalid_argument);
  CHECK_THROWS_AS(project(FeasibleRegiond::ball(-1.0), w), std::invalid_argument);
}

TEST_CASE("box projection clamps to the exact interval endpoints") {
  Vectord lo(2), hi(2);
  lo << -0.6, -1.0;
  hi << 0.6, 2.0;
  const auto region = FeasibleRegiond::interval_box(lo, hi);
  Vectord w(2);
  w << 5.0, -3.0;
  const Vectord out = project(region, w);
  CHECK(out[0] == 0.6);  // the endpoint value itself, not an approximation
  CHECK(out[1] == -1.0);
  CHECK(contains(region, out));

  Vectord interior(2);
  interior << 0.1, 0.5;
  CHECK((project(region, interior).array() == interior.array()).all());
}

TEST_CASE("projections are idempotent and non-expansive") {
  Rng rng(2);
  const auto ball = FeasibleRegiond::ball(1.5);
  const auto box = FeasibleRegiond::interval_box(Vectord::Constant(5, -1.0),
                                                 Vectord::Constant(5, 1.0));
  for (int trial = 0; trial < 200; ++trial) {
    const Vectord u = 3.0 * rng.gaussian_vector<double>(5);
    const Vectord v = 3.0 * rng.gaussian_vector<double>(5);
    for (const auto& region : {ball, box}) {
      const Vectord pu = project(region, u);
      CHECK((project(region, pu).array() == pu.array()).all());
      const Vectord pv = project(region, v);
      CHECK((pu - pv).norm() <= (u - v).norm() * (1 + 1e-12) + 1e-15);
    }
  }
}
