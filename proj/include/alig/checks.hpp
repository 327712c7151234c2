#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "alig/problem.hpp"
#include "alig/problems.hpp"
#include "alig/projection.hpp"
#include "alig/rng.hpp"
#include "alig/types.hpp"

namespace alig {

struct GradientCheckResult {
  double max_rel_error = 0.0;
  Index worst_sample = -1;
  Index worst_coord = -1;
  Index skipped_samples = 0;
};

// Central-difference check of every sample gradient at w.  Per entry the
// error is |numeric - analytic| relative to the analytic entry.  Differences
// inside the difference quotient's own noise band count as zero: cancellation
// in (up - down) costs about eps * |loss| / h, which dwarfs a fixed floor
// whenever the loss is large, and O(h^2) truncation plus a small absolute
// floor cover the rest.  Samples within h of a kink are skipped.
template <class Scalar>
GradientCheckResult check_gradient(const Problem<Scalar>& problem, const Vector<Scalar>& w,
                                   Scalar h) {
  if (!(h > Scalar(0))) throw std::invalid_argument("check_gradient: h must be positive");
  GradientCheckResult result;
  Vector<Scalar> probe = w;
  for (Index z = 0; z < problem.num_samples(); ++z) {
    if (problem.near_nonsmooth(w, z, h)) {
      ++result.skipped_samples;
      continue;
    }
    const Vector<Scalar> analytic = problem.sample_gradient(w, z);
    for (Index j = 0; j < problem.dim(); ++j) {
      const Scalar saved = probe[j];
      probe[j] = saved + h;
      const Scalar up = problem.sample_loss(probe, z);
      probe[j] = saved - h;
      const Scalar down = problem.sample_loss(probe, z);
      probe[j] = saved;
      const double numeric = static_cast<double>((up - down) / (Scalar(2) * h));
      const double diff = std::abs(numeric - static_cast<double>(analytic[j]));
      const double noise =
          1e-8 + 1e-13 * (std::abs(static_cast<double>(up)) + std::abs(static_cast<double>(down))) /
                     (2.0 * static_cast<double>(h));
      if (diff <= noise) continue;
      const double rel = diff / std::max(std::abs(static_cast<double>(analytic[j])), 1e-8);
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_sample = z;
        result.worst_coord = j;
      }
    }
  }
  return result;
}

struct ConstantCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst observed / declared ratio (or margin for inequalities)
  std::string detail;
};

struct ConstantsReport {
  std::vector<ConstantCheck> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConstantCheck& c) { return c.pass; });
  }
};

// Verifies every constant the problem declares against sampled evaluations:
// gradient norms against lipschitz_C, gradient differences against
// smoothness_beta, secant inner products against strong_convexity_alpha and
// rsi_alpha, per-sample losses at the minimizer against
// interp_tolerance_eps.  Ratios carry a 1e-9 relative slack for roundoff.
inline ConstantsReport check_constants(const Problemd& problem, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_constants: trials must be positive");
  ConstantsReport report;
  const auto& meta = problem.meta();
  Rng rng(seed);
  const Index d = problem.dim();
  const Vectord center =
      meta.minimizer ? *meta.minimizer : Vectord::Zero(d);
  const double spread = 1.0 + center.norm();
  const FeasibleRegiond domain = problem.domain();
  // Declared constants hold on the problem's domain, so draws are clamped to it.
  auto draw = [&] {
    return project(domain, (center + spread * rng.gaussian_vector<double>(d)).eval());
  };
  const double slack = 1e-9;

  if (meta.lipschitz_C) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Vectord w = draw();
      for (Index z = 0; z < problem.num_samples(); ++z)
        worst = std::max(worst, problem.sample_gradient(w, z).norm() / *meta.lipschitz_C);
    }
    report.checks.push_back({"lipschitz_C", worst <= 1.0 + slack, worst,
                             "max |grad| / C over sampled points"});
  }

  if (meta.smoothness_beta) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Vectord u = draw(), v = draw();
      const double dist = (u - v).norm();
      if (dist == 0.0) continue;
      for (Index z = 0; z < problem.num_samples(); ++z) {
        const double ratio =
            (problem.sample_gradient(u, z) - problem.sample_gradient(v, z)).norm() /
            (dist * *meta.smoothness_beta);
        worst = std::max(worst, ratio);
      }
    }
    report.checks.push_back({"smoothness_beta", worst <= 1.0 + slack, worst,
                             "max |grad(u)-grad(v)| / (beta |u-v|)"});
  }

  if (meta.strong_convexity_alpha) {
    double worst = infinity<double>();
    for (int t = 0; t < trials; ++t) {
      const Vectord u = draw(), v = draw();
      const double dist_sq = (u - v).squaredNorm();
      if (dist_sq == 0.0) continue;
      for (Index z = 0; z < problem.num_samples(); ++z) {
        const double ratio =
            (problem.sample_gradient(u, z) - problem.sample_gradient(v, z)).dot(u - v) /
            (dist_sq * *meta.strong_convexity_alpha);
        worst = std::min(worst, ratio);
      }
    }
    report.checks.push_back({"strong_convexity_alpha", worst >= 1.0 - slack, worst,
                             "min <grad(u)-grad(v), u-v> / (alpha |u-v|^2)"});
  }

  if (meta.rsi_alpha && meta.minimizer) {
    // Secant inequality of the full objective against the minimizer.  The
    // scalar fixture is checked on a dense grid of its interval; the interval
    // endpoint sits one ulp above 3/5, so equality there holds only up to
    // representation error and the margin carries a small absolute floor.
    double worst = infinity<double>();
    const double alpha = *meta.rsi_alpha;
    auto secant_margin = [&](const Vectord& w) {
      const Vectord q = w - *meta.minimizer;
      Vectord g = Vectord::Zero(d);
      for (Index z = 0; z < problem.num_samples(); ++z) g += problem.sample_gradient(w, z);
      g /= static_cast<double>(problem.num_samples());
      return g.dot(q) - alpha * q.squaredNorm();
    };
    if (problem.kind() == "rsi_scalar") {
      const double bound = RsiScalarProblemd::bound();
      const int grid = 10000;
      for (int i = 0; i <= grid; ++i) {
        Vectord w(1);
        w[0] = -bound + (2.0 * bound) * (static_cast<double>(i) / grid);
        worst = std::min(worst, secant_margin(w));
      }
    } else {
      for (int t = 0; t < trials; ++t) worst = std::min(worst, secant_margin(draw()));
    }
    report.checks.push_back({"rsi_alpha", worst >= -1e-12, worst,
                             "min <grad f(w), w-w*> - alpha |w-w*|^2"});
  }

  if (meta.minimizer && meta.interp_tolerance_eps) {
    double worst = 0.0;
    for (Index z = 0; z < problem.num_samples(); ++z)
      worst = std::max(worst, problem.sample_loss(*meta.minimizer, z));
    report.checks.push_back({"interp_tolerance_eps", worst <= *meta.interp_tolerance_eps + 1e-15,
                             worst, "max per-sample loss at the minimizer"});
  }

  return report;
}

}  // namespace alig
