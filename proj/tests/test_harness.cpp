#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "alig/envelopes.hpp"
#include "alig/problems.hpp"
#include "alig/ratefit.hpp"
#include "alig/sweep.hpp"

using namespace alig;

namespace {
Trajectoryd synthetic_trajectory(Index steps, double (*gap)(Index)) {
  Trajectoryd traj;
  for (Index t = 0; t <= steps; ++t) {
    StepRecordd rec;
    rec.step = t;
    rec.full_objective = gap(t);
    traj.records.push_back(rec);
  }
  return traj;
}
}  // namespace

TEST_CASE("envelope formulas evaluate to their closed forms") {
  EnvelopeParams p;
  p.dist0_sq = 4.0;
  p.C = 3.0;
  p.delta = 1.0;
  p.eps = 0.0;
  // sqrt(D) sqrt(C^2 + delta) / sqrt(T + 1) with D = 4, C^2 + delta = 10, T = 9.
  CHECK(envelope_value(EnvelopeKind::lipschitz_unclipped, p, 9) ==
        doctest::Approx(2.0 * std::sqrt(10.0) / std::sqrt(10.0)));

  p.eps = 0.1;
  // The interpolation term adds eps * sqrt(C^2/delta + 1) = 0.1 * sqrt(10).
  CHECK(envelope_value(EnvelopeKind::lipschitz_unclipped, p, 9) ==
        doctest::Approx(2.0 + 0.1 * std::sqrt(10.0)));

  EnvelopeParams smooth;
  smooth.dist0_sq = 2.0;
  smooth.beta = 4.0;
  smooth.delta = 0.01;
  smooth.eta = 1.0;
  // delta/beta + 2 beta D / (T+1) = 0.0025 + 16/10.
  CHECK(envelope_value(EnvelopeKind::smooth_large_eta, smooth, 9) ==
        doctest::Approx(0.01 / 4.0 + 2.0 * 4.0 * 2.0 / 10.0));

  EnvelopeParams sc;
  sc.dist0_sq = 1.0;
  sc.alpha = 1.0;
  sc.beta = 2.0;
  sc.delta = 0.0;
  sc.eta = 1.0;
  // beta exp(-alpha (k-1) / (4 beta)) D at k = 9: 2 exp(-1).
  CHECK(envelope_value(EnvelopeKind::strongly_convex_large_eta, sc, 9) ==
        doctest::Approx(2.0 * std::exp(-1.0)));

  EnvelopeParams rsi;
  rsi.dist0_sq = 1.0;
  rsi.alpha = 1.0;
  rsi.beta = 2.0;
  rsi.eta = 0.3;
  // (beta/2) exp((-alpha/beta + eta beta / 2)(k-1)) D at k = 11: exp(-2).
  CHECK(envelope_value(EnvelopeKind::rsi_large_eta, rsi, 11) ==
        doctest::Approx(std::exp(-2.0)));
  rsi.eta = 0.2;
  // (beta/2) exp(-eta (2 alpha - beta/2)(k-1)) D at k = 11: exp(-2).
  CHECK(envelope_value(EnvelopeKind::rsi_small_eta, rsi, 11) ==
        doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("iterate envelopes are undefined at step zero") {
  EnvelopeParams p;
  p.dist0_sq = 1.0;
  p.alpha = 1.0;
  p.beta = 2.0;
  p.eta = 1.0;
  CHECK_THROWS_AS(envelope_value(EnvelopeKind::strongly_convex_large_eta, p, 0),
                  std::invalid_argument);
  CHECK_NOTHROW(envelope_value(EnvelopeKind::lipschitz_small_eta,
                               [] {
                                 EnvelopeParams q;
                                 q.dist0_sq = 1.0;
                                 q.C = 1.0;
                                 q.delta = 1.0;
                                 q.eta = 1.0;
                                 return q;
                               }(),
                               0));
}

TEST_CASE("envelope parameter validation enforces each regime") {
  EnvelopeParams p;
  p.dist0_sq = 1.0;
  p.C = 1.0;
  p.delta = 0.0;  // lipschitz kinds need positive damping
  CHECK_THROWS_AS(validate_envelope(EnvelopeKind::lipschitz_unclipped, p),
                  std::invalid_argument);

  EnvelopeParams smooth;
  smooth.dist0_sq = 1.0;
  smooth.beta = 2.0;
  smooth.eta = 0.1;  // below 1/(2 beta) = 0.25
  smooth.delta = 1e-5;
  CHECK_THROWS_AS(validate_envelope(EnvelopeKind::smooth_large_eta, smooth),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_envelope(EnvelopeKind::smooth_small_eta, smooth));

  EnvelopeParams rsi;
  rsi.dist0_sq = 1.0;
  rsi.alpha = 1.0;
  rsi.beta = 2.0;
  rsi.eta = 0.3;
  rsi.delta = 1e-5;  // rsi bounds are stated undamped
  CHECK_THROWS_AS(validate_envelope(EnvelopeKind::rsi_large_eta, rsi), std::invalid_argument);
  rsi.delta = 0.0;
  CHECK_NOTHROW(validate_envelope(EnvelopeKind::rsi_large_eta, rsi));
  rsi.eta = 0.6;  // above 2 alpha / beta^2 = 0.5
  CHECK_THROWS_AS(validate_envelope(EnvelopeKind::rsi_large_eta, rsi), std::invalid_argument);
}

TEST_CASE("rate fit recovers planted decay laws") {
  SUBCASE("exponential") {
    const auto traj =
        synthetic_trajectory(400, [](Index t) { return 3.0 * std::exp(-0.05 * t); });
    const auto fit = fit_rate(traj, RateModel::exponential, 0.0);
    CHECK(fit.fitted_constant == doctest::Approx(-0.05).epsilon(1e-10));
    CHECK(fit.fit_residual < 1e-9);
    CHECK(fit.num_points == 401);
  }
  SUBCASE("inverse square root") {
    const auto traj =
        synthetic_trajectory(400, [](Index t) { return 2.0 / std::sqrt(t + 1.0); });
    const auto fit = fit_rate(traj, RateModel::inv_sqrt_t, 0.0);
    CHECK(fit.fitted_constant == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.fit_residual < 1e-9);
  }
  SUBCASE("inverse t") {
    const auto traj = synthetic_trajectory(400, [](Index t) { return 5.0 / (t + 1.0); });
    const auto fit = fit_rate(traj, RateModel::inv_t, 0.0);
    CHECK(fit.fitted_constant == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(fit.fit_residual < 1e-9);
  }
  SUBCASE("a wrong model shows up as residual, not as a crash") {
    const auto traj =
        synthetic_trajectory(400, [](Index t) { return 3.0 * std::exp(-0.05 * t); });
    const auto fit = fit_rate(traj, RateModel::inv_t, 0.0);
    CHECK(fit.fit_residual > 1.0);
  }
}

TEST_CASE("rate fit rejects unusable input") {
  const auto short_traj = synthetic_trajectory(10, [](Index) { return 1.0; });
  CHECK_THROWS_AS(fit_rate(short_traj, RateModel::exponential, 0.0), std::invalid_argument);

  // Long enough trajectory, but the gap hits zero almost immediately.
  const auto flat = synthetic_trajectory(100, [](Index t) { return t < 5 ? 1.0 : 0.0; });
  CHECK_THROWS_AS(fit_rate(flat, RateModel::exponential, 0.0), FitError);
}

TEST_CASE("zero-gap tail is dropped before fitting") {
  const auto traj = synthetic_trajectory(
      200, [](Index t) { return t < 60 ? std::exp(-0.1 * t) : 0.0; });
  const auto fit = fit_rate(traj, RateModel::exponential, 0.0);
  CHECK(fit.num_points == 60);
  CHECK(fit.fitted_constant == doctest::Approx(-0.1).epsilon(1e-10));
}

TEST_CASE("eta sweep classifies the scalar fixture's regimes") {
  RsiScalarProblemd rsi;
  OptimizerConfigd cfg;
  cfg.delta = 0.0;
  cfg.max_steps = 20000;
  cfg.log_every = 100;
  cfg.stop_threshold = 1e-10;
  const auto rows = run_eta_sweep(rsi, cfg, OptimizerKind::alig, FeasibleRegiond::all(),
                                  {0.1, 100.0}, 1e-8);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].eta == 0.1);
  CHECK(rows[0].converged);
  REQUIRE(rows[0].steps_to_threshold.has_value());
  CHECK(*rows[0].steps_to_threshold < 20000);
  CHECK_FALSE(rows[1].converged);
  CHECK_FALSE(rows[1].steps_to_threshold.has_value());
}

TEST_CASE("sweep csv has the documented shape") {
  std::vector<SweepRow> rows(2);
  rows[0] = {0.5, 1e-12, true, Index(42)};
  rows[1] = {100.0, 0.144, false, std::nullopt};
  std::stringstream ss;
  write_sweep_csv(ss, rows);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "eta,final_objective,converged,steps_to_threshold");
  std::getline(ss, line);
  CHECK(line == "0.5," + detail::format_g17(1e-12) + ",1,42");
  std::getline(ss, line);
  CHECK(line == "100," + detail::format_g17(0.144) + ",0,");
}

TEST_CASE("the standard envelope battery is well-formed") {
  const auto battery = standard_envelope_battery(0);
  CHECK(battery.size() == 9);
  for (const auto& cfg : battery) {
    REQUIRE(cfg.problem != nullptr);
    EnvelopeParams params = cfg.params;
    params.dist0_sq =
        (cfg.problem->initial_point() - *cfg.problem->meta().minimizer).squaredNorm();
    CHECK_NOTHROW(validate_envelope(cfg.kind, params));
  }
}

TEST_CASE("a single short envelope run executes end to end") {
  auto battery = standard_envelope_battery(0);
  auto cfg = battery.front();  // averaged-iterate bound on the hinge ensemble
  cfg.num_seeds = 2;
  cfg.config.max_steps = 300;
  const auto result = check_envelope(cfg);
  CHECK(result.points_checked > 0);
  CHECK(result.pass);
}
