#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "alig/stepsize.hpp"

using namespace alig;

TEST_CASE("polyak step size: ratio, zero-gap, and error cases") {
  CHECK(polyak_step_size(2.0, 0.5, 3.0) == doctest::Approx(0.5));
  CHECK(polyak_step_size(0.144, 0.0, 0.0144) == 10.0);

  SUBCASE("zero gap with zero gradient is an exact stop, not a divergence") {
    CHECK(polyak_step_size(1.0, 1.0, 0.0) == 0.0);
    CHECK(polyak_step_size(1.0, 1.0, 5.0) == 0.0);
  }
  SUBCASE("positive gap with zero gradient cannot be stepped") {
    CHECK_THROWS_AS(polyak_step_size(1.0, 0.0, 0.0), DivergentStepError);
  }
  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(polyak_step_size(0.5, 1.0, 1.0), std::invalid_argument);  // f below target
    CHECK_THROWS_AS(polyak_step_size(1.0, 0.0, -1.0), std::invalid_argument);
  }
  SUBCASE("non-finite values divergent") {
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(polyak_step_size(inf, 0.0, 1.0), DivergentStepError);
    CHECK_THROWS_AS(polyak_step_size(1.0, 0.0, nan), DivergentStepError);
  }
}

TEST_CASE("adaptive step size clips at eta and damps with delta") {
  CHECK(alig_step_size(1.0, 2.0, 0.0, 10.0) == 0.5);
  CHECK(alig_step_size(1.0, 2.0, 2.0, 10.0) == 0.25);
  CHECK(alig_step_size(100.0, 1.0, 0.0, 0.125) == 0.125);
  CHECK(alig_step_size(1.0, 2.0, 0.0, std::numeric_limits<double>::infinity()) == 0.5);

  SUBCASE("zero loss with zero denominator is a null step") {
    CHECK(alig_step_size(0.0, 0.0, 0.0, 1.0) == 0.0);
  }
  SUBCASE("positive loss with zero denominator is divergent") {
    CHECK_THROWS_AS(alig_step_size(1.0, 0.0, 0.0, std::numeric_limits<double>::infinity()),
                    DivergentStepError);
  }
  SUBCASE("but a finite eta cannot rescue it: the ratio is unbounded") {
    CHECK_THROWS_AS(alig_step_size(1.0, 0.0, 0.0, 1.0), DivergentStepError);
  }
  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(alig_step_size(-1.0, 1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(alig_step_size(1.0, -1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(alig_step_size(1.0, 1.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(alig_step_size(1.0, 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(alig_step_size(1.0, 1.0, 0.0, -2.0), std::invalid_argument);
  }
}

TEST_CASE("prox of the truncated linear model") {
  Vectord w(3);
  w << 1.0, -2.0, 0.5;
  Vectord g(3);
  g << 0.0, 1.0, 0.0;

  SUBCASE("interior solution moves by loss/|g|^2") {
    const Vectord out = prox_truncated_solve(w, 0.5, g, 10.0);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == -2.5);
    CHECK(out[2] == 0.5);
  }
  SUBCASE("clipped solution moves by eta") {
    const Vectord out = prox_truncated_solve(w, 100.0, g, 0.25);
    CHECK(out[1] == -2.25);
  }
  SUBCASE("zero gradient leaves the point unchanged bitwise") {
    const Vectord zero = Vectord::Zero(3);
    const Vectord out = prox_truncated_solve(w, 3.0, zero, 1.0);
    CHECK((out.array() == w.array()).all());
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(prox_truncated_solve(w, -1.0, g, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(prox_truncated_solve(w, 1.0, g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(prox_truncated_solve(w, 1.0, g, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
    Vectord short_g(2);
    short_g << 1.0, 1.0;
    CHECK_THROWS_AS(prox_truncated_solve(w, 1.0, short_g, 1.0), std::invalid_argument);
  }
}

TEST_CASE("hyperplane membership of the classical step") {
  Vectord w(2);
  w << 3.0, 4.0;
  Vectord g(2);
  g << 1.0, 2.0;
  const double f = 2.0, f_star = 0.5;
  const double gamma = (f - f_star) / g.squaredNorm();
  const Vectord w_next = w - gamma * g;

  CHECK(hyperplane_intersection_check(w, f, g, f_star, w_next));
  CHECK(hyperplane_intersection_check(w, f, g, f, w));  // zero gap, zero move

  Vectord along = w_next + 1e-3 * g;  // off the plane
  CHECK_FALSE(hyperplane_intersection_check(w, f, g, f_star, along));

  Vectord orth(2);
  orth << -2.0, 1.0;  // perpendicular to g: on the plane but not the closest point
  const Vectord sideways = w_next + 1e-3 * orth;
  CHECK_FALSE(hyperplane_intersection_check(w, f, g, f_star, sideways));

  Vectord bad_dim(3);
  bad_dim << 0, 0, 0;
  CHECK_THROWS_AS(hyperplane_intersection_check(w, f, g, f_star, bad_dim),
                  std::invalid_argument);
}
