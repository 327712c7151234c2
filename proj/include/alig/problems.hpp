#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alig/problem.hpp"
#include "alig/rng.hpp"
#include "alig/types.hpp"

namespace alig {

// f(w) = w^2 - |w|^3 on the interval [-3/5, 3/5]: nonconvex, satisfies the
// restricted secant inequality with alpha = 1/5, minimum 0 at w = 0.  The
// interval endpoint is represented by the closest double at or above 3/5: the
// two-cycle of the exact step dynamics at the endpoints is repelling (local
// multiplier 16 per step), so it survives in floating point only because the
// domain clamp binds; an endpoint rounded below 3/5 lets the computed orbit
// escape inward within a few steps.
template <class Scalar>
class RsiScalarProblem : public Problem<Scalar> {
 public:
  RsiScalarProblem() {
    meta_.num_samples = 1;
    meta_.minimizer = Vector<Scalar>::Zero(1);
    meta_.f_star = Scalar(0);
    meta_.rsi_alpha = Scalar(0.2);
    meta_.smoothness_beta = Scalar(2);  // |f''(w)| = |2 - 6|w|| <= 2 on the domain
    meta_.interp_tolerance_eps = Scalar(0);
  }

  std::string kind() const override { return "rsi_scalar"; }
  Index dim() const override { return 1; }
  Index num_samples() const override { return 1; }

  Scalar sample_loss(const Vector<Scalar>& w, Index) const override {
    const Scalar x = w[0], a = std::abs(x);
    return x * x - a * a * a;
  }

  Vector<Scalar> sample_gradient(const Vector<Scalar>& w, Index) const override {
    const Scalar x = w[0];
    const Scalar s = (x >= Scalar(0)) ? Scalar(1) : Scalar(-1);
    Vector<Scalar> g(1);
    g[0] = Scalar(2) * x - Scalar(3) * s * x * x;
    return g;
  }

  const ProblemMeta<Scalar>& meta() const override { return meta_; }

  Vector<Scalar> initial_point() const override {
    Vector<Scalar> w(1);
    w[0] = -bound();
    return w;
  }

  FeasibleRegion<Scalar> domain() const override {
    Vector<Scalar> lo(1), hi(1);
    lo[0] = -bound();
    hi[0] = bound();
    return FeasibleRegion<Scalar>::interval_box(std::move(lo), std::move(hi));
  }

  static Scalar bound() { return std::nextafter(Scalar(0.6), Scalar(1)); }

 private:
  ProblemMeta<Scalar> meta_;
};

// Least-squares ensemble loss_i(w) = (a_i . w - b_i)^2.  With eps = 0 the
// targets are consistent (b = A w*, computed row by row exactly as the losses
// evaluate them, so the residual at w* is bitwise zero).  With eps > 0 the
// targets carry a residual orthogonal to the rows, so w* stays the exact
// minimizer while every per-sample loss at w* is at most eps.
template <class Scalar>
class LeastSquaresProblem : public Problem<Scalar> {
 public:
  LeastSquaresProblem(Index n, Index d, Scalar eps, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("least_squares: need n >= 1, d >= 1");
    if (!(eps >= Scalar(0))) throw std::invalid_argument("least_squares: eps must be non-negative");
    if (eps > Scalar(0) && n <= d)
      throw std::invalid_argument("least_squares: tolerance mode needs n > d");
    Rng rng(seed);
    Matrix<Scalar> A(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) A(i, j) = static_cast<Scalar>(rng.gaussian());
    Vector<Scalar> w_star = rng.template gaussian_vector<Scalar>(d);
    Vector<Scalar> b(n);
    for (Index i = 0; i < n; ++i) b[i] = A.row(i).dot(w_star);
    if (eps > Scalar(0)) {
      Vector<Scalar> r0 = rng.template gaussian_vector<Scalar>(n);
      Vector<Scalar> fitted = A * A.colPivHouseholderQr().solve(r0);
      Vector<Scalar> r = r0 - fitted;  // orthogonal to the rows: grad f(w*) stays 0
      const Scalar max_abs = r.cwiseAbs().maxCoeff();
      if (!(max_abs > Scalar(0)))
        throw std::invalid_argument("least_squares: degenerate residual direction");
      r *= std::sqrt(Scalar(0.9) * eps) / max_abs;
      b -= r;
    }
    init(std::move(A), std::move(b), std::move(w_star), eps, seed);
  }

  LeastSquaresProblem(Matrix<Scalar> A, Vector<Scalar> b, Vector<Scalar> w_star, Scalar eps,
                      std::uint64_t seed) {
    init(std::move(A), std::move(b), std::move(w_star), eps, seed);
  }

  std::string kind() const override { return "least_squares"; }
  Index dim() const override { return A_.cols(); }
  Index num_samples() const override { return A_.rows(); }

  Scalar sample_loss(const Vector<Scalar>& w, Index z) const override {
    const Scalar r = A_.row(z).dot(w) - b_[z];
    return r * r;
  }

  Vector<Scalar> sample_gradient(const Vector<Scalar>& w, Index z) const override {
    const Scalar r = A_.row(z).dot(w) - b_[z];
    return (Scalar(2) * r) * A_.row(z).transpose();
  }

  const ProblemMeta<Scalar>& meta() const override { return meta_; }
  Vector<Scalar> initial_point() const override { return Vector<Scalar>::Zero(dim()); }

  const Matrix<Scalar>& design() const { return A_; }
  const Vector<Scalar>& targets() const { return b_; }
  std::uint64_t seed() const { return seed_; }

 private:
  void init(Matrix<Scalar> A, Vector<Scalar> b, Vector<Scalar> w_star, Scalar eps,
            std::uint64_t seed) {
    A_ = std::move(A);
    b_ = std::move(b);
    seed_ = seed;
    const Index n = A_.rows();
    meta_.num_samples = n;
    meta_.minimizer = std::move(w_star);
    Scalar beta = Scalar(0), f_star = Scalar(0);
    for (Index i = 0; i < n; ++i) {
      beta = std::max(beta, Scalar(2) * A_.row(i).squaredNorm());
      f_star += sample_loss(*meta_.minimizer, i);
    }
    meta_.smoothness_beta = beta;
    meta_.f_star = f_star / static_cast<Scalar>(n);
    meta_.interp_tolerance_eps = eps;
  }

  Matrix<Scalar> A_;
  Vector<Scalar> b_;
  ProblemMeta<Scalar> meta_;
  std::uint64_t seed_ = 0;
};

// Quadratic ensemble loss_i(w) = (w - w*)' A_i (w - w*) / 2 + c_i with a
// shared minimizer.  Each A_i is Q diag(lambda) Q' with lambda_1 = alpha,
// lambda_2 = beta and the rest uniform in between, so the declared strong
// convexity and smoothness constants are exact by construction (up to
// symmetrization rounding).  c_i in [0, eps) keeps w* the exact minimizer of
// every sample and makes eps an interpolation tolerance.
template <class Scalar>
class QuadraticEnsembleProblem : public Problem<Scalar> {
 public:
  QuadraticEnsembleProblem(Index n, Index d, Scalar alpha, Scalar beta, Scalar eps,
                           std::uint64_t seed) {
    if (n < 1 || d < 2) throw std::invalid_argument("quadratic_ensemble: need n >= 1, d >= 2");
    if (!(Scalar(0) < alpha && alpha <= beta))
      throw std::invalid_argument("quadratic_ensemble: need 0 < alpha <= beta");
    if (!(eps >= Scalar(0))) throw std::invalid_argument("quadratic_ensemble: eps must be non-negative");
    Rng rng(seed);
    std::vector<Matrix<Scalar>> As;
    Vector<Scalar> c(n);
    for (Index i = 0; i < n; ++i) {
      Matrix<Scalar> G(d, d);
      for (Index r = 0; r < d; ++r)
        for (Index j = 0; j < d; ++j) G(r, j) = static_cast<Scalar>(rng.gaussian());
      Matrix<Scalar> Q = Eigen::HouseholderQR<Matrix<Scalar>>(G).householderQ();
      Vector<Scalar> lambda(d);
      lambda[0] = alpha;
      lambda[1] = beta;
      for (Index j = 2; j < d; ++j) lambda[j] = static_cast<Scalar>(rng.uniform(alpha, beta));
      Matrix<Scalar> A = Q * lambda.asDiagonal() * Q.transpose();
      A = ((A + A.transpose()) / Scalar(2)).eval();
      As.push_back(std::move(A));
      c[i] = (eps > Scalar(0)) ? static_cast<Scalar>(eps * rng.uniform()) : Scalar(0);
    }
    Vector<Scalar> w_star = rng.template gaussian_vector<Scalar>(d);
    init(std::move(As), std::move(c), std::move(w_star), alpha, beta, eps, seed);
  }

  QuadraticEnsembleProblem(std::vector<Matrix<Scalar>> As, Vector<Scalar> c, Vector<Scalar> w_star,
                           Scalar alpha, Scalar beta, Scalar eps, std::uint64_t seed) {
    init(std::move(As), std::move(c), std::move(w_star), alpha, beta, eps, seed);
  }

  std::string kind() const override { return "quadratic_ensemble"; }
  Index dim() const override { return As_.front().rows(); }
  Index num_samples() const override { return static_cast<Index>(As_.size()); }

  Scalar sample_loss(const Vector<Scalar>& w, Index z) const override {
    const Vector<Scalar> q = w - *meta_.minimizer;
    return Scalar(0.5) * q.dot(As_[static_cast<std::size_t>(z)] * q) + c_[z];
  }

  Vector<Scalar> sample_gradient(const Vector<Scalar>& w, Index z) const override {
    return As_[static_cast<std::size_t>(z)] * (w - *meta_.minimizer);
  }

  const ProblemMeta<Scalar>& meta() const override { return meta_; }
  Vector<Scalar> initial_point() const override { return Vector<Scalar>::Zero(dim()); }

  Scalar alpha() const { return alpha_; }
  Scalar beta() const { return beta_; }
  const Matrix<Scalar>& matrix(Index z) const { return As_[static_cast<std::size_t>(z)]; }
  const Vector<Scalar>& offsets() const { return c_; }
  std::uint64_t seed() const { return seed_; }

 private:
  void init(std::vector<Matrix<Scalar>> As, Vector<Scalar> c, Vector<Scalar> w_star, Scalar alpha,
            Scalar beta, Scalar eps, std::uint64_t seed) {
    As_ = std::move(As);
    c_ = std::move(c);
    alpha_ = alpha;
    beta_ = beta;
    seed_ = seed;
    const Index n = num_samples();
    meta_.num_samples = n;
    meta_.minimizer = std::move(w_star);
    Scalar f_star = Scalar(0);
    for (Index i = 0; i < n; ++i) f_star += c_[i];
    meta_.f_star = f_star / static_cast<Scalar>(n);
    meta_.strong_convexity_alpha = alpha;
    meta_.smoothness_beta = beta;
    meta_.rsi_alpha = alpha;  // exact for quadratics: q'Aq >= alpha |q|^2
    meta_.interp_tolerance_eps = eps;
  }

  std::vector<Matrix<Scalar>> As_;
  Vector<Scalar> c_;
  Scalar alpha_ = Scalar(0), beta_ = Scalar(0);
  ProblemMeta<Scalar> meta_;
  std::uint64_t seed_ = 0;
};

// Hinge ensemble loss_i(w) = max{0, 1 - y_i x_i . w} on linearly separable
// data with margin, so a zero-loss w* exists.  Subgradient convention: 0 at
// the kink and in the flat region.  The per-sample Lipschitz constant is
// max_i |x_i| (a norm, not a squared norm).
template <class Scalar>
class HingeEnsembleProblem : public Problem<Scalar> {
 public:
  HingeEnsembleProblem(Index n, Index d, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("hinge_ensemble: need n >= 1, d >= 1");
    Rng rng(seed);
    Vector<Scalar> u = rng.template gaussian_vector<Scalar>(d);
    u /= u.norm();
    Matrix<Scalar> X(n, d);
    Vector<Scalar> y(n);
    Scalar min_margin = infinity<Scalar>();
    for (Index i = 0; i < n; ++i) {
      Vector<Scalar> x;
      Scalar m;
      for (int guard = 0;; ++guard) {
        x = rng.template gaussian_vector<Scalar>(d);
        m = u.dot(x);
        if (std::abs(m) >= Scalar(0.5)) break;
        if (guard > 10000) throw std::runtime_error("hinge_ensemble: sampling stalled");
      }
      X.row(i) = x.transpose();
      y[i] = (m >= Scalar(0)) ? Scalar(1) : Scalar(-1);
      min_margin = std::min(min_margin, y[i] * m);
    }
    Vector<Scalar> w_star = u * (Scalar(1.25) / min_margin);
    init(std::move(X), std::move(y), std::move(w_star), seed);
  }

  HingeEnsembleProblem(Matrix<Scalar> X, Vector<Scalar> y, Vector<Scalar> w_star,
                       std::uint64_t seed) {
    init(std::move(X), std::move(y), std::move(w_star), seed);
  }

  std::string kind() const override { return "hinge_ensemble"; }
  Index dim() const override { return X_.cols(); }
  Index num_samples() const override { return X_.rows(); }

  Scalar sample_loss(const Vector<Scalar>& w, Index z) const override {
    return std::max(Scalar(0), margin(w, z));
  }

  Vector<Scalar> sample_gradient(const Vector<Scalar>& w, Index z) const override {
    if (margin(w, z) > Scalar(0)) return (-y_[z]) * X_.row(z).transpose();
    return Vector<Scalar>::Zero(dim());
  }

  bool near_nonsmooth(const Vector<Scalar>& w, Index z, Scalar h) const override {
    // A coordinate probe of size h moves the margin by at most h |x_z|.
    return std::abs(margin(w, z)) < Scalar(10) * h * (Scalar(1) + X_.row(z).norm());
  }

  const ProblemMeta<Scalar>& meta() const override { return meta_; }
  Vector<Scalar> initial_point() const override { return Vector<Scalar>::Zero(dim()); }

  const Matrix<Scalar>& points() const { return X_; }
  const Vector<Scalar>& labels() const { return y_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Scalar margin(const Vector<Scalar>& w, Index z) const {
    return Scalar(1) - y_[z] * X_.row(z).dot(w);
  }

  void init(Matrix<Scalar> X, Vector<Scalar> y, Vector<Scalar> w_star, std::uint64_t seed) {
    X_ = std::move(X);
    y_ = std::move(y);
    seed_ = seed;
    const Index n = X_.rows();
    meta_.num_samples = n;
    meta_.minimizer = std::move(w_star);
    meta_.f_star = Scalar(0);
    Scalar C = Scalar(0);
    for (Index i = 0; i < n; ++i) C = std::max(C, static_cast<Scalar>(X_.row(i).norm()));
    meta_.lipschitz_C = C;
    meta_.interp_tolerance_eps = Scalar(0);
  }

  Matrix<Scalar> X_;
  Vector<Scalar> y_;
  ProblemMeta<Scalar> meta_;
  std::uint64_t seed_ = 0;
};

// Two-layer perceptron with tanh hidden units and a scalar output, squared
// loss per sample.  Targets come from a teacher of the same architecture, so
// the teacher's parameters interpolate exactly.  Parameter packing:
// [U (h x d, column-major), b1 (h), v (h), b2].
template <class Scalar>
class TinyMlpProblem : public Problem<Scalar> {
 public:
  TinyMlpProblem(Index d, Index h, Index n, std::uint64_t seed) {
    if (d < 1 || h < 1 || n < 1) throw std::invalid_argument("tiny_mlp: need d, h, n >= 1");
    Rng rng(seed);
    const Index p = h * d + h + h + 1;
    Vector<Scalar> teacher(p);
    for (Index i = 0; i < p; ++i) teacher[i] = static_cast<Scalar>(rng.gaussian());
    Matrix<Scalar> X(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) X(i, j) = static_cast<Scalar>(rng.gaussian());
    Vector<Scalar> init_point(p);
    for (Index i = 0; i < p; ++i) init_point[i] = static_cast<Scalar>(Scalar(0.5) * rng.gaussian());
    Vector<Scalar> y(n);
    for (Index i = 0; i < n; ++i) y[i] = forward_with(teacher, X.row(i).transpose(), d, h);
    init(d, h, std::move(X), std::move(y), std::move(teacher), std::move(init_point), seed);
  }

  TinyMlpProblem(Index d, Index h, Matrix<Scalar> X, Vector<Scalar> y, Vector<Scalar> teacher,
                 Vector<Scalar> init_point, std::uint64_t seed) {
    init(d, h, std::move(X), std::move(y), std::move(teacher), std::move(init_point), seed);
  }

  std::string kind() const override { return "tiny_mlp"; }
  Index dim() const override { return h_ * d_ + h_ + h_ + 1; }
  Index num_samples() const override { return X_.rows(); }

  Scalar sample_loss(const Vector<Scalar>& w, Index z) const override {
    const Scalar r = forward_with(w, X_.row(z).transpose(), d_, h_) - y_[z];
    return r * r;
  }

  Vector<Scalar> sample_gradient(const Vector<Scalar>& w, Index z) const override {
    const Vector<Scalar> x = X_.row(z).transpose();
    const auto U = Eigen::Map<const Matrix<Scalar>>(w.data(), h_, d_);
    const auto b1 = w.segment(h_ * d_, h_);
    const auto v = w.segment(h_ * d_ + h_, h_);
    const Scalar b2 = w[dim() - 1];
    const Vector<Scalar> hid = (U * x + b1).array().tanh().matrix();
    const Scalar out = v.dot(hid) + b2;
    const Scalar r = Scalar(2) * (out - y_[z]);
    Vector<Scalar> g(dim());
    const Vector<Scalar> gpre =
        (r * v.array() * (Scalar(1) - hid.array().square())).matrix();
    Eigen::Map<Matrix<Scalar>>(g.data(), h_, d_) = gpre * x.transpose();
    g.segment(h_ * d_, h_) = gpre;
    g.segment(h_ * d_ + h_, h_) = r * hid;
    g[dim() - 1] = r;
    return g;
  }

  const ProblemMeta<Scalar>& meta() const override { return meta_; }
  Vector<Scalar> initial_point() const override { return init_; }

  Index input_dim() const { return d_; }
  Index hidden_dim() const { return h_; }
  const Matrix<Scalar>& inputs() const { return X_; }
  const Vector<Scalar>& targets() const { return y_; }
  const Vector<Scalar>& teacher() const { return *meta_.minimizer; }
  std::uint64_t seed() const { return seed_; }

 private:
  static Scalar forward_with(const Vector<Scalar>& w, const Vector<Scalar>& x, Index d, Index h) {
    const auto U = Eigen::Map<const Matrix<Scalar>>(w.data(), h, d);
    const auto b1 = w.segment(h * d, h);
    const auto v = w.segment(h * d + h, h);
    const Scalar b2 = w[h * d + h + h];
    const Vector<Scalar> hid = (U * x + b1).array().tanh().matrix();
    return v.dot(hid) + b2;
  }

  void init(Index d, Index h, Matrix<Scalar> X, Vector<Scalar> y, Vector<Scalar> teacher,
            Vector<Scalar> init_point, std::uint64_t seed) {
    d_ = d;
    h_ = h;
    X_ = std::move(X);
    y_ = std::move(y);
    init_ = std::move(init_point);
    seed_ = seed;
    meta_.num_samples = X_.rows();
    meta_.minimizer = std::move(teacher);
    meta_.f_star = Scalar(0);
    meta_.interp_tolerance_eps = Scalar(0);
  }

  Index d_ = 0, h_ = 0;
  Matrix<Scalar> X_;
  Vector<Scalar> y_;
  Vector<Scalar> init_;
  ProblemMeta<Scalar> meta_;
  std::uint64_t seed_ = 0;
};

using RsiScalarProblemd = RsiScalarProblem<double>;
using LeastSquaresProblemd = LeastSquaresProblem<double>;
using QuadraticEnsembleProblemd = QuadraticEnsembleProblem<double>;
using HingeEnsembleProblemd = HingeEnsembleProblem<double>;
using TinyMlpProblemd = TinyMlpProblem<double>;

// Builds a fixture by kind name ("rsi_scalar"/"rsi", "least_squares",
// "quadratic_ensemble"/"quadratic", "hinge_ensemble"/"hinge",
// "tiny_mlp"/"mlp").  dims: {} for rsi, {n, d} for the ensembles, {d, h, n}
// for the mlp; empty means the kind's default shape.  eps > 0 is supported by
// least_squares and quadratic_ensemble only.
inline std::shared_ptr<const Problemd> make_problem(const std::string& kind,
                                                    std::vector<Index> dims, double eps,
                                                    std::uint64_t seed) {
  auto want = [&](std::size_t count, std::vector<Index> defaults) {
    if (dims.empty()) dims = std::move(defaults);
    if (dims.size() != count)
      throw std::invalid_argument("make_problem: wrong dims count for " + kind);
    for (Index v : dims)
      if (v < 1) throw std::invalid_argument("make_problem: dims must be positive");
  };
  auto no_eps = [&] {
    if (eps != 0.0)
      throw std::invalid_argument("make_problem: eps > 0 unsupported for " + kind);
  };
  if (kind == "rsi_scalar" || kind == "rsi") {
    want(1, {1});
    if (dims[0] != 1) throw std::invalid_argument("make_problem: rsi_scalar is one-dimensional");
    no_eps();
    return std::make_shared<RsiScalarProblemd>();
  }
  if (kind == "least_squares") {
    want(2, {20, 10});
    return std::make_shared<LeastSquaresProblemd>(dims[0], dims[1], eps, seed);
  }
  if (kind == "quadratic_ensemble" || kind == "quadratic") {
    want(2, {10, 8});
    return std::make_shared<QuadraticEnsembleProblemd>(dims[0], dims[1], 1.0, 2.0, eps, seed);
  }
  if (kind == "hinge_ensemble" || kind == "hinge") {
    want(2, {20, 10});
    no_eps();
    return std::make_shared<HingeEnsembleProblemd>(dims[0], dims[1], seed);
  }
  if (kind == "tiny_mlp" || kind == "mlp") {
    want(3, {4, 16, 32});
    no_eps();
    return std::make_shared<TinyMlpProblemd>(dims[0], dims[1], dims[2], seed);
  }
  throw std::invalid_argument("make_problem: unknown kind: " + kind);
}

// Analytic exact-interpolation fixtures default to an undamped step; the
// damping delta exists to control stochastic noise, which they do not have.
inline double default_delta_for(const Problemd& problem) {
  return problem.kind() == "rsi_scalar" ? 0.0 : 1e-5;
}

}  // namespace alig
