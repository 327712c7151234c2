#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "alig/rng.hpp"
#include "alig/trajectory_io.hpp"
#include "alig/types.hpp"

using namespace alig;

TEST_CASE("rng replays identically from a seed") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.raw() == b.raw());
  }
  Rng c(123), d(124);
  CHECK(c.raw() != d.raw());
}

TEST_CASE("uniform stays in [0, 1) and fills the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("gaussian draws are finite with sane first moments") {
  Rng rng(11);
  double sum = 0, sum_sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    REQUIRE(std::isfinite(g));
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform_index is in range and deterministic") {
  Rng a(5), b(5);
  for (int i = 0; i < 10000; ++i) {
    const Index x = a.uniform_index(17);
    CHECK(x >= 0);
    CHECK(x < 17);
    CHECK(x == b.uniform_index(17));
  }
}

TEST_CASE("trajectory csv roundtrips bit-exactly including absent optionals") {
  Trajectoryd traj;
  StepRecordd r0;
  r0.step = 0;
  r0.loss = 0.1 + 0.2;  // not exactly 0.3; %.17g must preserve it
  r0.step_size = 1e-300;
  r0.grad_norm_sq = 3.0;
  r0.dist_to_opt_sq = 0.7;
  r0.full_objective = 2.5;
  StepRecordd r1;
  r1.step = 1;
  r1.loss = 1.0 / 3.0;
  r1.step_size = 0.0;
  r1.grad_norm_sq = std::numeric_limits<double>::infinity();
  // dist and full objective intentionally absent
  traj.records = {r0, r1};

  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  const Trajectoryd back = read_trajectory_csv(ss);

  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].step == 0);
  CHECK(back.records[0].loss == r0.loss);
  CHECK(back.records[0].step_size == r0.step_size);
  CHECK(back.records[0].grad_norm_sq == r0.grad_norm_sq);
  REQUIRE(back.records[0].dist_to_opt_sq.has_value());
  CHECK(*back.records[0].dist_to_opt_sq == 0.7);
  REQUIRE(back.records[0].full_objective.has_value());
  CHECK(*back.records[0].full_objective == 2.5);
  CHECK(back.records[1].loss == r1.loss);
  CHECK(back.records[1].grad_norm_sq == r1.grad_norm_sq);
  CHECK_FALSE(back.records[1].dist_to_opt_sq.has_value());
  CHECK_FALSE(back.records[1].full_objective.has_value());
}

TEST_CASE("trajectory csv rejects a wrong header") {
  std::stringstream ss("step,loss\n0,1\n");
  CHECK_THROWS_AS(read_trajectory_csv(ss), std::invalid_argument);
}
