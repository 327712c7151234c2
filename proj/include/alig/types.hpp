#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace alig {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vectord = Vector<double>;
using Matrixd = Matrix<double>;

template <class Scalar>
constexpr Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

// Thrown when a step size is unbounded: zero gradient (and zero damping) at a
// point strictly above the target value.  Distinct from argument errors so
// run loops can truncate a trajectory instead of rejecting the call.
class DivergentStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a rate fit has too little usable data.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Scalar>
struct SampleEval {
  Scalar loss;              // >= 0
  Vector<Scalar> gradient;  // same dimension as the query point
};

// Analytic facts a problem declares about itself.  Constants are only present
// when they hold by construction; consumers must not estimate missing ones.
template <class Scalar>
struct ProblemMeta {
  Index num_samples = 0;
  std::optional<Vector<Scalar>> minimizer;
  std::optional<Scalar> f_star;  // objective value at the minimizer; absent means 0
  std::optional<Scalar> lipschitz_C;
  std::optional<Scalar> smoothness_beta;
  std::optional<Scalar> rsi_alpha;
  std::optional<Scalar> strong_convexity_alpha;
  std::optional<Scalar> interp_tolerance_eps;  // max per-sample loss at the minimizer

  Scalar f_star_or_zero() const { return f_star.value_or(Scalar(0)); }
};

enum class RegionKind { unconstrained, l2_ball, box };

// Feasible set for projected updates.  The public optimizer surface offers
// unconstrained and l2_ball; box exists for problem fixtures whose domain is
// an interval (the clamp hits interval endpoints bitwise, which a ball
// rescale does not), and is not exposed through the CLI.
template <class Scalar>
struct FeasibleRegion {
  RegionKind kind = RegionKind::unconstrained;
  Scalar radius = Scalar(0);      // l2_ball: bound on the norm, not its square
  Vector<Scalar> lower, upper;    // box

  static FeasibleRegion all() { return {}; }

  static FeasibleRegion ball(Scalar r) {
    FeasibleRegion region;
    region.kind = RegionKind::l2_ball;
    region.radius = r;
    return region;
  }

  static FeasibleRegion interval_box(Vector<Scalar> lo, Vector<Scalar> hi) {
    FeasibleRegion region;
    region.kind = RegionKind::box;
    region.lower = std::move(lo);
    region.upper = std::move(hi);
    return region;
  }
};

using FeasibleRegiond = FeasibleRegion<double>;

enum class OptimizerKind { alig, alig_inf, polyak_gd, sgd };

// Displacement applied by a momentum step: scaled_velocity adds mu * v,
// standard_nesterov adds v itself.
enum class MomentumVariant { scaled_velocity, standard_nesterov };

template <class Scalar>
struct OptimizerConfig {
  Scalar max_lr_eta = Scalar(0.1);  // may be infinity; sgd uses it as its constant lr
  Scalar delta = Scalar(1e-5);
  Scalar momentum_mu = Scalar(0);  // in [0, 1)
  MomentumVariant momentum_variant = MomentumVariant::scaled_velocity;
  Index batch_size = 1;
  std::uint64_t seed = 0;
  Index max_steps = 0;
  Index log_every = 10;  // full-objective cadence after the first 100 steps
  std::optional<Scalar> stop_threshold;  // early stop on full objective; disabled by default
};

using OptimizerConfigd = OptimizerConfig<double>;

// One optimization step, described at the pre-update iterate w_t.  The
// terminal record of a run (empty sample_indices, step_size 0) summarizes the
// final iterate instead.
template <class Scalar>
struct StepRecord {
  Index step = 0;
  std::vector<Index> sample_indices;
  Scalar loss = Scalar(0);
  Scalar step_size = Scalar(0);
  Scalar grad_norm_sq = Scalar(0);
  std::optional<Scalar> dist_to_opt_sq;
  std::optional<Scalar> full_objective;
};

template <class Scalar>
struct Trajectory {
  std::vector<StepRecord<Scalar>> records;
  // A divergent step truncates the run and is recorded here instead of
  // propagating; the last record then summarizes the final valid iterate.
  std::optional<std::string> error;
  std::optional<Index> error_step;
};

using StepRecordd = StepRecord<double>;
using Trajectoryd = Trajectory<double>;

}  // namespace alig
