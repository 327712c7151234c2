#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alig/problem.hpp"
#include "alig/projection.hpp"
#include "alig/rng.hpp"
#include "alig/stepsize.hpp"
#include "alig/types.hpp"

namespace alig {

template <class Scalar>
struct OptimizerState {
  Vector<Scalar> w;
  Vector<Scalar> velocity;
  Index step = 0;
  Rng rng;
};

using OptimizerStated = OptimizerState<double>;

template <class Scalar>
OptimizerState<Scalar> make_state(const Problem<Scalar>& problem,
                                  const OptimizerConfig<Scalar>& config,
                                  const FeasibleRegion<Scalar>& region) {
  return OptimizerState<Scalar>{
      project(region, project(problem.domain(), problem.initial_point())),
      Vector<Scalar>::Zero(problem.dim()), 0, Rng(config.seed)};
}

namespace detail {

// A batch of the full sample count is the exact mean over all samples (not a
// bootstrap resample); smaller batches are drawn i.i.d. uniform with
// replacement.  Full batches consume no randomness.
template <class Scalar>
std::vector<Index> draw_batch(OptimizerState<Scalar>& state, Index num_samples, Index batch_size) {
  std::vector<Index> indices(static_cast<std::size_t>(batch_size));
  if (batch_size == num_samples) {
    std::iota(indices.begin(), indices.end(), Index(0));
  } else {
    for (auto& z : indices) z = state.rng.uniform_index(num_samples);
  }
  return indices;
}

template <class Scalar>
void apply_plain_update(OptimizerState<Scalar>& state, const Problem<Scalar>& problem,
                        const FeasibleRegion<Scalar>& region, Scalar gamma,
                        const Vector<Scalar>& grad) {
  state.w = project(region, project(problem.domain(), (state.w - gamma * grad).eval()));
  ++state.step;
}

}  // namespace detail

// One adaptive step: draw a batch, take gamma = min{loss/(|grad|^2+delta),
// eta}, then either the plain projected step (mu = 0) or the momentum update
// v <- mu v - gamma grad followed by w <- P(w + mu v) (scaled_velocity) or
// w <- P(w + v) (standard_nesterov).
template <class Scalar>
StepRecord<Scalar> alig_step(OptimizerState<Scalar>& state, const Problem<Scalar>& problem,
                             const OptimizerConfig<Scalar>& config,
                             const FeasibleRegion<Scalar>& region) {
  StepRecord<Scalar> rec;
  rec.step = state.step;
  rec.sample_indices = detail::draw_batch(state, problem.num_samples(), config.batch_size);
  const SampleEval<Scalar> eval = evaluate_batch<Scalar>(problem, state.w, rec.sample_indices);
  rec.loss = eval.loss;
  rec.grad_norm_sq = eval.gradient.squaredNorm();
  rec.step_size = alig_step_size(eval.loss, rec.grad_norm_sq, config.delta, config.max_lr_eta);
  if (config.momentum_mu == Scalar(0)) {
    detail::apply_plain_update(state, problem, region, rec.step_size, eval.gradient);
  } else {
    state.velocity = config.momentum_mu * state.velocity - rec.step_size * eval.gradient;
    const Vector<Scalar> displacement =
        config.momentum_variant == MomentumVariant::scaled_velocity
            ? (config.momentum_mu * state.velocity).eval()
            : state.velocity;
    state.w = project(region, project(problem.domain(), (state.w + displacement).eval()));
    ++state.step;
  }
  return rec;
}

// One classical Polyak step on the full objective: gamma = (f - f*)/|grad f|^2.
template <class Scalar>
StepRecord<Scalar> polyak_gd_step(OptimizerState<Scalar>& state, const Problem<Scalar>& problem,
                                  Scalar f_star, const FeasibleRegion<Scalar>& region) {
  StepRecord<Scalar> rec;
  rec.step = state.step;
  rec.sample_indices = detail::draw_batch(state, problem.num_samples(), problem.num_samples());
  const SampleEval<Scalar> eval = evaluate_batch<Scalar>(problem, state.w, rec.sample_indices);
  rec.loss = eval.loss;
  rec.grad_norm_sq = eval.gradient.squaredNorm();
  rec.step_size = polyak_step_size(eval.loss, f_star, rec.grad_norm_sq);
  detail::apply_plain_update(state, problem, region, rec.step_size, eval.gradient);
  return rec;
}

// One projected SGD step with the constant learning rate config.max_lr_eta.
template <class Scalar>
StepRecord<Scalar> sgd_step(OptimizerState<Scalar>& state, const Problem<Scalar>& problem,
                            const OptimizerConfig<Scalar>& config,
                            const FeasibleRegion<Scalar>& region) {
  StepRecord<Scalar> rec;
  rec.step = state.step;
  rec.sample_indices = detail::draw_batch(state, problem.num_samples(), config.batch_size);
  const SampleEval<Scalar> eval = evaluate_batch<Scalar>(problem, state.w, rec.sample_indices);
  rec.loss = eval.loss;
  rec.grad_norm_sq = eval.gradient.squaredNorm();
  rec.step_size = config.max_lr_eta;
  detail::apply_plain_update(state, problem, region, rec.step_size, eval.gradient);
  return rec;
}

namespace detail {

struct NoopObserver {
  template <class Scalar>
  void operator()(const StepRecord<Scalar>&, const Vector<Scalar>&) const {}
};

template <class Scalar>
void validate_run_config(const Problem<Scalar>& problem, const OptimizerConfig<Scalar>& config,
                         OptimizerKind kind) {
  if (!(config.max_lr_eta > Scalar(0))) throw std::invalid_argument("run: eta must be positive");
  if (!(config.delta >= Scalar(0))) throw std::invalid_argument("run: delta must be non-negative");
  if (!(config.momentum_mu >= Scalar(0) && config.momentum_mu < Scalar(1)))
    throw std::invalid_argument("run: momentum_mu must lie in [0, 1)");
  if (config.batch_size < 1 || config.batch_size > problem.num_samples())
    throw std::invalid_argument("run: batch_size must lie in [1, num_samples]");
  if (config.max_steps < 0) throw std::invalid_argument("run: max_steps must be non-negative");
  if (config.log_every < 1) throw std::invalid_argument("run: log_every must be positive");
  if (kind == OptimizerKind::sgd && !std::isfinite(static_cast<double>(config.max_lr_eta)))
    throw std::invalid_argument("run: sgd needs a finite learning rate");
  if ((kind == OptimizerKind::polyak_gd || kind == OptimizerKind::sgd) &&
      config.momentum_mu != Scalar(0))
    throw std::invalid_argument("run: momentum applies to the adaptive optimizers only");
  if (kind == OptimizerKind::alig && config.delta == Scalar(0) &&
      std::isfinite(static_cast<double>(config.max_lr_eta))) {
    const auto& eps = problem.meta().interp_tolerance_eps;
    if (!eps || *eps != Scalar(0))
      throw std::invalid_argument(
          "run: delta = 0 with finite eta requires an exactly interpolating problem");
  }
}

}  // namespace detail

// Runs max_steps iterations of the chosen optimizer from the problem's
// initial point.  Record t describes the pre-update iterate w_t and the step
// taken from it; a final summary record (empty indices, zero step size, full
// objective and full-batch gradient) describes the last iterate.  The full
// objective is logged every step for the first 100 steps, then every
// log_every-th step.  A divergent or non-finite step truncates the run and is
// annotated on the trajectory.  The observer is invoked once per record with
// the iterate that record describes.
template <class Scalar, class Observer = detail::NoopObserver>
Trajectory<Scalar> run(const Problem<Scalar>& problem, const OptimizerConfig<Scalar>& config_in,
                       OptimizerKind kind,
                       const FeasibleRegion<Scalar>& region = FeasibleRegion<Scalar>::all(),
                       Observer&& observe = Observer{}) {
  detail::validate_run_config(problem, config_in, kind);
  OptimizerConfig<Scalar> config = config_in;
  if (kind == OptimizerKind::alig_inf) config.max_lr_eta = infinity<Scalar>();

  Trajectory<Scalar> out;
  OptimizerState<Scalar> state = make_state(problem, config, region);
  const auto& meta = problem.meta();
  const Scalar f_star = meta.f_star_or_zero();
  const auto at_cadence = [&](Index t) { return t <= 100 || t % config.log_every == 0; };

  for (Index t = 0; t < config.max_steps; ++t) {
    std::optional<Scalar> fobj;
    std::optional<Scalar> dist;
    const Vector<Scalar> w_before = state.w;
    StepRecord<Scalar> rec;
    try {
      if (at_cadence(t)) fobj = full_objective(problem, state.w);
      if (config.stop_threshold && fobj && *fobj < *config.stop_threshold) break;
      if (meta.minimizer) dist = (state.w - *meta.minimizer).squaredNorm();
      switch (kind) {
        case OptimizerKind::alig:
        case OptimizerKind::alig_inf:
          rec = alig_step(state, problem, config, region);
          break;
        case OptimizerKind::polyak_gd:
          rec = polyak_gd_step(state, problem, f_star, region);
          break;
        case OptimizerKind::sgd:
          rec = sgd_step(state, problem, config, region);
          break;
      }
    } catch (const DivergentStepError& e) {
      out.error = e.what();
      out.error_step = t;
      break;
    } catch (const std::domain_error& e) {  // non-finite iterate: divergence in practice
      out.error = e.what();
      out.error_step = t;
      break;
    }
    rec.dist_to_opt_sq = dist;
    rec.full_objective = fobj;
    out.records.push_back(std::move(rec));
    observe(out.records.back(), w_before);
  }

  StepRecord<Scalar> fin;
  fin.step = state.step;
  bool summarized = false;
  if (state.w.allFinite()) {
    try {
      fin.loss = full_objective(problem, state.w);
      std::vector<Index> all(static_cast<std::size_t>(problem.num_samples()));
      std::iota(all.begin(), all.end(), Index(0));
      fin.grad_norm_sq = evaluate_batch<Scalar>(problem, state.w, all).gradient.squaredNorm();
      if (meta.minimizer) fin.dist_to_opt_sq = (state.w - *meta.minimizer).squaredNorm();
      summarized = true;
    } catch (const std::domain_error&) {  // losses overflowed at a finite iterate
    }
  }
  if (!summarized) {
    fin.loss = infinity<Scalar>();
    fin.grad_norm_sq = infinity<Scalar>();
    fin.dist_to_opt_sq.reset();
  }
  fin.full_objective = fin.loss;
  out.records.push_back(std::move(fin));
  observe(out.records.back(), state.w);
  return out;
}

}  // namespace alig
