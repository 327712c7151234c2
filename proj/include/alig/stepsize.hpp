#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alig/types.hpp"

namespace alig {

// Classical Polyak step size (f(w) - f*) / ||grad f(w)||^2, with 0/0 = 0.
// A zero gradient strictly above f* has no finite step and is reported as
// DivergentStepError.
template <class Scalar>
Scalar polyak_step_size(Scalar f_val, Scalar f_star, Scalar grad_norm_sq) {
  if (!std::isfinite(static_cast<double>(f_val)) || !std::isfinite(static_cast<double>(grad_norm_sq)))
    throw DivergentStepError("polyak_step_size: non-finite objective or gradient");
  if (!(grad_norm_sq >= Scalar(0)))
    throw std::invalid_argument("polyak_step_size: grad_norm_sq must be non-negative");
  if (!(f_val >= f_star))
    throw std::invalid_argument("polyak_step_size: f_val below f_star");
  const Scalar gap = f_val - f_star;
  if (gap == Scalar(0)) return Scalar(0);
  if (grad_norm_sq == Scalar(0))
    throw DivergentStepError("polyak_step_size: zero gradient above the optimal value");
  return gap / grad_norm_sq;
}

// Adaptive step size min{ loss / (||grad||^2 + delta), eta }.  eta may be
// infinity, in which case no clipping happens.  loss = 0 with a zero
// denominator returns 0; a positive loss with a zero denominator has no
// finite unclipped step and is reported as DivergentStepError.
template <class Scalar>
Scalar alig_step_size(Scalar loss, Scalar grad_norm_sq, Scalar delta, Scalar eta) {
  if (!std::isfinite(static_cast<double>(loss)) || !std::isfinite(static_cast<double>(grad_norm_sq)))
    throw DivergentStepError("alig_step_size: non-finite loss or gradient");
  if (!(loss >= Scalar(0))) throw std::invalid_argument("alig_step_size: loss must be non-negative");
  if (!(grad_norm_sq >= Scalar(0)))
    throw std::invalid_argument("alig_step_size: grad_norm_sq must be non-negative");
  if (!(delta >= Scalar(0))) throw std::invalid_argument("alig_step_size: delta must be non-negative");
  if (!(eta > Scalar(0))) throw std::invalid_argument("alig_step_size: eta must be positive");
  const Scalar denom = grad_norm_sq + delta;
  if (denom == Scalar(0)) {
    if (loss == Scalar(0)) return Scalar(0);
    throw DivergentStepError("alig_step_size: positive loss with zero gradient and zero delta");
  }
  return std::min(loss / denom, eta);
}

// Minimizer of (1/(2 eta)) ||w - w_t||^2 + max{ loss + grad . (w - w_t), 0 },
// the proximal problem on the truncated linear model of a non-negative loss.
// Closed form: move along -grad by min{ loss / ||grad||^2, eta }.  With a zero
// gradient the model is constant and w_t itself is the minimizer.
template <class Scalar>
Vector<Scalar> prox_truncated_solve(const Vector<Scalar>& w_t, Scalar loss,
                                    const Vector<Scalar>& grad, Scalar eta) {
  if (!(loss >= Scalar(0))) throw std::invalid_argument("prox_truncated_solve: loss must be non-negative");
  if (!(eta > Scalar(0)) || !std::isfinite(static_cast<double>(eta)))
    throw std::invalid_argument("prox_truncated_solve: eta must be positive and finite");
  if (grad.size() != w_t.size())
    throw std::invalid_argument("prox_truncated_solve: gradient dimension mismatch");
  const Scalar gns = grad.squaredNorm();
  if (gns == Scalar(0)) return w_t;
  const Scalar gamma = std::min(loss / gns, eta);
  return (w_t - gamma * grad).eval();
}

// True iff w_next is the closest point to w_t on the hyperplane
// f(w_t) + grad . (w - w_t) = f_star: it must satisfy the plane equation and
// the displacement must be parallel to the gradient.
template <class Scalar>
bool hyperplane_intersection_check(const Vector<Scalar>& w_t, Scalar f_val,
                                   const Vector<Scalar>& grad, Scalar f_star,
                                   const Vector<Scalar>& w_next) {
  if (grad.size() != w_t.size() || w_next.size() != w_t.size())
    throw std::invalid_argument("hyperplane_intersection_check: dimension mismatch");
  const Vector<Scalar> d = w_next - w_t;
  const Scalar plane_tol = Scalar(1e-10) * std::max(Scalar(1), std::abs(f_star));
  if (std::abs(f_val + grad.dot(d) - f_star) > plane_tol) return false;
  const Scalar d_norm = d.norm();
  if (d_norm == Scalar(0)) return true;  // already on the plane, nothing moved
  const Scalar gns = grad.squaredNorm();
  if (gns == Scalar(0)) return false;  // moved without a direction to move along
  const Vector<Scalar> residual = d - (grad.dot(d) / gns) * grad;
  return residual.norm() <= Scalar(1e-8) * d_norm;
}

}  // namespace alig
