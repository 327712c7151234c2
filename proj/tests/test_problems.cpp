#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <sstream>

#include "alig/problem_io.hpp"
#include "alig/problems.hpp"
#include "alig/projection.hpp"
#include "alig/rng.hpp"

using namespace alig;

TEST_CASE("query validation") {
  RsiScalarProblemd rsi;
  Vectord good(1);
  good << 0.1;
  Vectord wrong_dim(2);
  wrong_dim << 0.1, 0.2;
  Vectord non_finite(1);
  non_finite << std::numeric_limits<double>::quiet_NaN();

  CHECK_THROWS_AS(evaluate_sample(rsi, wrong_dim, 0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_sample(rsi, non_finite, 0), std::domain_error);
  CHECK_THROWS_AS(evaluate_sample(rsi, good, 1), std::out_of_range);
  CHECK_THROWS_AS(evaluate_sample(rsi, good, -1), std::out_of_range);
}

TEST_CASE("scalar oscillation fixture: exact values at the rim") {
  RsiScalarProblemd rsi;
  Vectord w(1);
  w << 0.6;
  CHECK(rsi.sample_loss(w, 0) == doctest::Approx(0.144).epsilon(1e-15));
  CHECK(rsi.sample_gradient(w, 0)[0] == doctest::Approx(0.12).epsilon(1e-15));
  w << -0.6;
  CHECK(rsi.sample_loss(w, 0) == doctest::Approx(0.144).epsilon(1e-15));
  CHECK(rsi.sample_gradient(w, 0)[0] == doctest::Approx(-0.12).epsilon(1e-15));
  w << 0.0;
  CHECK(rsi.sample_loss(w, 0) == 0.0);
  CHECK(rsi.sample_gradient(w, 0)[0] == 0.0);

  // The domain rim sits one ulp outside 3/5 so the repelling two-cycle of the
  // classical step survives the clamp.
  CHECK(RsiScalarProblemd::bound() > 0.6);
  CHECK(RsiScalarProblemd::bound() == std::nextafter(0.6, 1.0));
  CHECK(rsi.initial_point()[0] == -RsiScalarProblemd::bound());
  CHECK(rsi.domain().kind == RegionKind::box);
}

TEST_CASE("least squares: targets interpolate exactly at the planted solution") {
  LeastSquaresProblemd ls(20, 10, 0.0, 3);
  const Vectord& w_star = *ls.meta().minimizer;
  for (Index z = 0; z < ls.num_samples(); ++z) {
    CHECK(ls.sample_loss(w_star, z) == 0.0);  // residuals are bitwise zero by construction
  }
  CHECK(*ls.meta().f_star == 0.0);
  CHECK(*ls.meta().interp_tolerance_eps == 0.0);

  SUBCASE("eps variant keeps every loss at the solution within eps") {
    LeastSquaresProblemd noisy(24, 10, 1e-3, 4);
    const Vectord& w = *noisy.meta().minimizer;
    double max_loss = 0;
    for (Index z = 0; z < noisy.num_samples(); ++z) {
      max_loss = std::max(max_loss, noisy.sample_loss(w, z));
    }
    CHECK(max_loss <= 1e-3);
    CHECK(max_loss > 0.0);
    CHECK(*noisy.meta().f_star > 0.0);
  }
  SUBCASE("eps needs strictly more rows than columns") {
    CHECK_THROWS_AS(LeastSquaresProblemd(10, 10, 1e-3, 3), std::invalid_argument);
  }
}

TEST_CASE("quadratic ensemble: gradients match the stored matrices") {
  QuadraticEnsembleProblemd quad(6, 5, 1.0, 2.0, 0.0, 9);
  Rng rng(17);
  const Vectord w = rng.gaussian_vector<double>(5);
  const Vectord q = w - *quad.meta().minimizer;
  for (Index z = 0; z < quad.num_samples(); ++z) {
    const Vectord expected = quad.matrix(z) * q;
    CHECK((quad.sample_gradient(w, z) - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK(quad.sample_loss(w, z) ==
          doctest::Approx(0.5 * q.dot(expected) + quad.offsets()[z]).epsilon(1e-14));
  }
  CHECK(quad.alpha() == 1.0);
  CHECK(quad.beta() == 2.0);
  CHECK_THROWS_AS(QuadraticEnsembleProblemd(3, 1, 1.0, 2.0, 0.0, 9), std::invalid_argument);
}

TEST_CASE("hinge ensemble: labels are signs and the planted point has margin slack") {
  HingeEnsembleProblemd hinge(15, 8, 21);
  const Vectord& w_star = *hinge.meta().minimizer;
  for (Index z = 0; z < hinge.num_samples(); ++z) {
    CHECK(std::abs(hinge.labels()[z]) == 1.0);
    CHECK(hinge.sample_loss(w_star, z) == 0.0);
    // Margin at least 1.25 by the rescaling of the planted direction.
    const double margin = hinge.labels()[z] * hinge.points().row(z).dot(w_star);
    CHECK(margin >= 1.25 * (1 - 1e-12));
  }
  CHECK(*hinge.meta().lipschitz_C > 0.0);
}

TEST_CASE("tiny mlp: the teacher reproduces its own targets") {
  TinyMlpProblemd mlp(4, 8, 16, 2);
  const Vectord& teacher = *mlp.meta().minimizer;
  for (Index z = 0; z < mlp.num_samples(); ++z) {
    CHECK(mlp.sample_loss(teacher, z) == 0.0);
  }
  CHECK(mlp.dim() == 4 * 8 + 8 + 8 + 1);
  CHECK(mlp.initial_point().size() == mlp.dim());
}

TEST_CASE("fixture save/load reproduces losses and gradients bitwise") {
  std::vector<std::shared_ptr<const Problemd>> originals = {
      std::make_shared<RsiScalarProblemd>(),
      std::make_shared<LeastSquaresProblemd>(12, 6, 0.0, 5),
      std::make_shared<LeastSquaresProblemd>(14, 6, 1e-3, 6),
      std::make_shared<QuadraticEnsembleProblemd>(5, 4, 1.0, 2.0, 1e-4, 7),
      std::make_shared<HingeEnsembleProblemd>(10, 6, 8),
      std::make_shared<TinyMlpProblemd>(3, 5, 8, 9),
  };
  Rng rng(33);
  for (const auto& original : originals) {
    CAPTURE(original->kind());
    std::stringstream ss;
    save_problem(ss, *original);
    const auto loaded = load_problem(ss);
    REQUIRE(loaded->kind() == original->kind());
    REQUIRE(loaded->dim() == original->dim());
    REQUIRE(loaded->num_samples() == original->num_samples());
    CHECK((loaded->initial_point().array() == original->initial_point().array()).all());
    for (int trial = 0; trial < 5; ++trial) {
      const Vectord w = project(original->domain(), rng.gaussian_vector<double>(original->dim()));
      for (Index z = 0; z < original->num_samples(); ++z) {
        CHECK(loaded->sample_loss(w, z) == original->sample_loss(w, z));
        CHECK((loaded->sample_gradient(w, z).array() ==
               original->sample_gradient(w, z).array())
                  .all());
      }
    }
  }
}

TEST_CASE("problem factory: aliases, defaults, and rejections") {
  CHECK(make_problem("rsi", {}, 0.0, 0)->kind() == "rsi_scalar");
  CHECK(make_problem("quadratic", {}, 0.0, 0)->num_samples() == 10);
  CHECK(make_problem("hinge", {12, 4}, 0.0, 0)->dim() == 4);
  CHECK(make_problem("mlp", {}, 0.0, 0)->kind() == "tiny_mlp");
  CHECK(make_problem("least_squares", {30, 7}, 1e-4, 0)->num_samples() == 30);

  CHECK_THROWS_AS(make_problem("hinge", {12, 4}, 1e-3, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("rsi", {2}, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("nope", {}, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("quadratic", {10}, 0.0, 0), std::invalid_argument);
}

TEST_CASE("per-fixture damping defaults") {
  CHECK(default_delta_for(*make_problem("rsi", {}, 0.0, 0)) == 0.0);
  CHECK(default_delta_for(*make_problem("quadratic", {}, 0.0, 0)) == 1e-5);
}
