#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "alig/types.hpp"

namespace alig {

// A finite-sum objective f(w) = mean_z loss_z(w) with non-negative per-sample
// losses.  Implementations declare their analytic facts in meta() and may
// restrict iterates to a domain (applied by the optimizers after each step).
template <class Scalar>
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string kind() const = 0;
  virtual Index dim() const = 0;
  virtual Index num_samples() const = 0;
  virtual Scalar sample_loss(const Vector<Scalar>& w, Index z) const = 0;
  virtual Vector<Scalar> sample_gradient(const Vector<Scalar>& w, Index z) const = 0;
  virtual const ProblemMeta<Scalar>& meta() const = 0;
  virtual Vector<Scalar> initial_point() const = 0;

  virtual FeasibleRegion<Scalar> domain() const { return FeasibleRegion<Scalar>::all(); }

  // True when sample z is within h of a non-differentiable point at w, so
  // finite-difference checks can skip it.  Smooth problems never are.
  virtual bool near_nonsmooth(const Vector<Scalar>& /*w*/, Index /*z*/, Scalar /*h*/) const {
    return false;
  }
};

using Problemd = Problem<double>;

namespace detail {

template <class Scalar>
void require_query(const Problem<Scalar>& problem, const Vector<Scalar>& w, Index z) {
  if (w.size() != problem.dim())
    throw std::invalid_argument("evaluate: point dimension does not match the problem");
  if (!w.allFinite()) throw std::domain_error("evaluate: non-finite parameter vector");
  if (z < 0 || z >= problem.num_samples())
    throw std::out_of_range("evaluate: sample index out of range");
}

}  // namespace detail

template <class Scalar>
SampleEval<Scalar> evaluate_sample(const Problem<Scalar>& problem, const Vector<Scalar>& w, Index z) {
  detail::require_query(problem, w, z);
  SampleEval<Scalar> eval{problem.sample_loss(w, z), problem.sample_gradient(w, z)};
  if (!(eval.loss >= Scalar(0)))
    throw std::domain_error("evaluate_sample: negative or NaN loss");
  return eval;
}

// Plain mean of the member losses and gradients, in index order.
template <class Scalar>
SampleEval<Scalar> evaluate_batch(const Problem<Scalar>& problem, const Vector<Scalar>& w,
                                  std::span<const Index> indices) {
  if (indices.empty()) throw std::invalid_argument("evaluate_batch: empty index list");
  SampleEval<Scalar> sum{Scalar(0), Vector<Scalar>::Zero(problem.dim())};
  for (Index z : indices) {
    detail::require_query(problem, w, z);
    sum.loss += problem.sample_loss(w, z);
    sum.gradient += problem.sample_gradient(w, z);
  }
  const Scalar count = static_cast<Scalar>(indices.size());
  sum.loss /= count;  // divide, not multiply by a reciprocal: full-batch values
  sum.gradient /= count;  // must agree with full_objective bitwise

  if (!(sum.loss >= Scalar(0)))
    throw std::domain_error("evaluate_batch: negative or NaN mean loss");
  return sum;
}

// Mean loss over all samples, summed in index order (the same order
// evaluate_batch uses, so full-batch values agree bitwise).
template <class Scalar>
Scalar full_objective(const Problem<Scalar>& problem, const Vector<Scalar>& w) {
  const Index n = problem.num_samples();
  if (n == 0) throw std::invalid_argument("full_objective: problem has no samples");
  detail::require_query(problem, w, 0);
  Scalar sum = Scalar(0);
  for (Index z = 0; z < n; ++z) sum += problem.sample_loss(w, z);
  const Scalar mean = sum / static_cast<Scalar>(n);
  if (!(mean >= Scalar(0)))  // a negative or NaN mean is overflow, never convergence
    throw std::domain_error("full_objective: negative or NaN mean loss");
  return mean;
}

}  // namespace alig
