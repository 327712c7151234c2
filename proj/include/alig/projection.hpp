#pragma once

#include <cmath>
#include <stdexcept>

#include "alig/types.hpp"

namespace alig {

// Euclidean projection onto the region.  For the ball the radius bounds the
// norm itself (a point of norm 2r rescales by 1/2, not 1/4); interior points
// are returned unchanged, bitwise.
template <class Scalar>
Vector<Scalar> project(const FeasibleRegion<Scalar>& region, const Vector<Scalar>& w) {
  switch (region.kind) {
    case RegionKind::unconstrained:
      return w;
    case RegionKind::l2_ball: {
      if (!(region.radius > Scalar(0)))
        throw std::invalid_argument("project: l2_ball radius must be positive");
      // One rescale can land a last ulp above the radius; shave until the
      // norm test itself passes so projecting twice changes nothing.
      Vector<Scalar> p = w;
      Scalar norm = p.norm();
      while (norm > region.radius) {
        Scalar scale = region.radius / norm;
        if (!(scale < Scalar(1))) scale = std::nextafter(Scalar(1), Scalar(0));
        p *= scale;
        norm = p.norm();
      }
      return p;
    }
    case RegionKind::box: {
      if (region.lower.size() != w.size() || region.upper.size() != w.size())
        throw std::invalid_argument("project: box bounds do not match dimension");
      return w.cwiseMax(region.lower).cwiseMin(region.upper).eval();
    }
  }
  throw std::logic_error("project: unknown region kind");
}

template <class Scalar>
Scalar distance_to(const FeasibleRegion<Scalar>& region, const Vector<Scalar>& w) {
  return (w - project(region, w)).norm();
}

template <class Scalar>
bool contains(const FeasibleRegion<Scalar>& region, const Vector<Scalar>& w, Scalar tol = Scalar(0)) {
  return distance_to(region, w) <= tol;
}

}  // namespace alig
