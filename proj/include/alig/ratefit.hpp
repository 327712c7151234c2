#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alig/types.hpp"

namespace alig {

enum class RateModel {
  inv_sqrt_t,   // e_t ~ c / sqrt(t + 1)
  inv_t,        // e_t ~ c / (t + 1)
  exponential,  // e_t ~ c * exp(k * t), k < 0 when converging
};

struct RateFit {
  RateModel model;
  // Amplitude c for the power laws; per-step log-slope k for exponential.
  double fitted_constant = 0;
  // Max absolute deviation in log space over the fitted window.
  double fit_residual = 0;
  Index window_begin = 0;
  Index window_end = 0;
  Index num_points = 0;
};

namespace detail {

// Least-squares fit in log space on (step, error) pairs with error > 0.
inline RateFit fit_series(const std::vector<std::pair<Index, double>>& series, RateModel model) {
  if (series.size() < 10) {
    throw FitError("rate fit needs at least 10 positive error values, got " +
                   std::to_string(series.size()));
  }
  RateFit fit;
  fit.model = model;
  fit.window_begin = series.front().first;
  fit.window_end = series.back().first;
  fit.num_points = static_cast<Index>(series.size());

  const auto n = static_cast<double>(series.size());
  if (model == RateModel::exponential) {
    // y = a + k t by ordinary least squares.
    double mean_t = 0, mean_y = 0;
    for (const auto& [t, e] : series) {
      mean_t += static_cast<double>(t);
      mean_y += std::log(e);
    }
    mean_t /= n;
    mean_y /= n;
    double cov = 0, var = 0;
    for (const auto& [t, e] : series) {
      const double dt = static_cast<double>(t) - mean_t;
      cov += dt * (std::log(e) - mean_y);
      var += dt * dt;
    }
    if (var <= 0) throw FitError("rate fit needs more than one distinct step");
    const double k = cov / var;
    const double a = mean_y - k * mean_t;
    fit.fitted_constant = k;
    double worst = 0;
    for (const auto& [t, e] : series) {
      worst = std::max(worst, std::abs(std::log(e) - (a + k * static_cast<double>(t))));
    }
    fit.fit_residual = worst;
    return fit;
  }

  // Power law with pinned exponent: log e = log c - p log(t + 1).
  const double p = (model == RateModel::inv_sqrt_t) ? 0.5 : 1.0;
  double log_c = 0;
  for (const auto& [t, e] : series) {
    log_c += std::log(e) + p * std::log(static_cast<double>(t) + 1.0);
  }
  log_c /= n;
  double worst = 0;
  for (const auto& [t, e] : series) {
    const double predicted = log_c - p * std::log(static_cast<double>(t) + 1.0);
    worst = std::max(worst, std::abs(std::log(e) - predicted));
  }
  fit.fitted_constant = std::exp(log_c);
  fit.fit_residual = worst;
  return fit;
}

}  // namespace detail

// Fits a decay model to the optimality gap f(w_t) - f_star along a recorded
// trajectory, using every record that carries a full objective.  The series
// ends at the first gap at or below gap_floor: with the default floor of zero
// that is the first exactly-zero gap (an exactly interpolated fixture sits at
// zero forever after), and a positive floor additionally cuts the rounding
// plateau where double precision can no longer express the gap and the decay
// law goes flat.
inline RateFit fit_rate(const Trajectoryd& trajectory, RateModel model, double f_star,
                        double gap_floor = 0.0) {
  if (trajectory.records.size() < 50) {
    throw std::invalid_argument("fit_rate needs a trajectory with at least 50 records");
  }
  if (!(gap_floor >= 0)) throw std::invalid_argument("fit_rate: gap_floor must be non-negative");
  std::vector<std::pair<Index, double>> series;
  series.reserve(trajectory.records.size());
  for (const auto& rec : trajectory.records) {
    if (!rec.full_objective) continue;
    const double gap = *rec.full_objective - f_star;
    if (!std::isfinite(gap)) throw FitError("non-finite objective gap in trajectory");
    if (gap <= gap_floor) break;
    series.emplace_back(rec.step, gap);
  }
  return detail::fit_series(series, model);
}

}  // namespace alig
