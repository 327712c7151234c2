#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "alig/problems.hpp"
#include "alig/trajectory_io.hpp"
#include "alig/types.hpp"

namespace alig {

// Text fixture format: one header line "kind,dims,eps,seed" (dims joined with
// 'x'), then whitespace-separated data rows.  The data rows carry the actual
// problem data, so a loaded fixture replays identically regardless of how the
// random source behaves; the seed is provenance only.
//   least_squares:      n rows (a_i..., b_i), one row w*
//   quadratic_ensemble: one row (alpha, beta), n rows (A_i row-major..., c_i), one row w*
//   hinge_ensemble:     n rows (x_i..., y_i), one row w*
//   tiny_mlp:           one row teacher, one row initial point, n rows (x_i..., y_i)
//   rsi_scalar:         no data rows

namespace detail {

inline void write_row(std::ostream& out, const double* data, Index count) {
  for (Index i = 0; i < count; ++i) {
    if (i) out << ' ';
    out << format_g17(data[i]);
  }
  out << '\n';
}

inline double read_value(std::istream& in) {
  double x;
  if (!(in >> x)) throw std::invalid_argument("problem fixture: truncated data");
  return x;
}

inline Vectord read_values(std::istream& in, Index count) {
  Vectord v(count);
  for (Index i = 0; i < count; ++i) v[i] = read_value(in);
  return v;
}

}  // namespace detail

inline void save_problem(std::ostream& out, const Problemd& problem) {
  auto header = [&](std::initializer_list<Index> dims, double eps, std::uint64_t seed) {
    out << problem.kind() << ',';
    bool first = true;
    for (Index v : dims) {
      if (!first) out << 'x';
      first = false;
      out << v;
    }
    out << ',' << detail::format_g17(eps) << ',' << seed << '\n';
  };
  if (const auto* p = dynamic_cast<const RsiScalarProblemd*>(&problem)) {
    (void)p;
    header({1}, 0.0, 0);
    return;
  }
  if (const auto* p = dynamic_cast<const LeastSquaresProblemd*>(&problem)) {
    const Index n = p->num_samples(), d = p->dim();
    header({n, d}, p->meta().interp_tolerance_eps.value_or(0.0), p->seed());
    for (Index i = 0; i < n; ++i) {
      Vectord row(d + 1);
      row.head(d) = p->design().row(i).transpose();
      row[d] = p->targets()[i];
      detail::write_row(out, row.data(), row.size());
    }
    detail::write_row(out, p->meta().minimizer->data(), d);
    return;
  }
  if (const auto* p = dynamic_cast<const QuadraticEnsembleProblemd*>(&problem)) {
    const Index n = p->num_samples(), d = p->dim();
    header({n, d}, p->meta().interp_tolerance_eps.value_or(0.0), p->seed());
    const double ab[2] = {p->alpha(), p->beta()};
    detail::write_row(out, ab, 2);
    for (Index i = 0; i < n; ++i) {
      Vectord row(d * d + 1);
      for (Index r = 0; r < d; ++r) row.segment(r * d, d) = p->matrix(i).row(r).transpose();
      row[d * d] = p->offsets()[i];
      detail::write_row(out, row.data(), row.size());
    }
    detail::write_row(out, p->meta().minimizer->data(), d);
    return;
  }
  if (const auto* p = dynamic_cast<const HingeEnsembleProblemd*>(&problem)) {
    const Index n = p->num_samples(), d = p->dim();
    header({n, d}, 0.0, p->seed());
    for (Index i = 0; i < n; ++i) {
      Vectord row(d + 1);
      row.head(d) = p->points().row(i).transpose();
      row[d] = p->labels()[i];
      detail::write_row(out, row.data(), row.size());
    }
    detail::write_row(out, p->meta().minimizer->data(), d);
    return;
  }
  if (const auto* p = dynamic_cast<const TinyMlpProblemd*>(&problem)) {
    const Index n = p->num_samples(), d = p->input_dim(), h = p->hidden_dim();
    header({d, h, n}, 0.0, p->seed());
    detail::write_row(out, p->teacher().data(), p->teacher().size());
    const Vectord init = p->initial_point();
    detail::write_row(out, init.data(), init.size());
    for (Index i = 0; i < n; ++i) {
      Vectord row(d + 1);
      row.head(d) = p->inputs().row(i).transpose();
      row[d] = p->targets()[i];
      detail::write_row(out, row.data(), row.size());
    }
    return;
  }
  throw std::invalid_argument("save_problem: unknown problem kind: " + problem.kind());
}

inline std::shared_ptr<const Problemd> load_problem(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("problem fixture: empty stream");
  std::stringstream header(line);
  std::string kind, dims_text, eps_text, seed_text;
  if (!std::getline(header, kind, ',') || !std::getline(header, dims_text, ',') ||
      !std::getline(header, eps_text, ',') || !std::getline(header, seed_text))
    throw std::invalid_argument("problem fixture: malformed header: " + line);
  std::vector<Index> dims;
  {
    std::stringstream ds(dims_text);
    std::string piece;
    while (std::getline(ds, piece, 'x')) dims.push_back(std::stoll(piece));
  }
  const double eps = std::stod(eps_text);
  const std::uint64_t seed = std::stoull(seed_text);

  if (kind == "rsi_scalar") return std::make_shared<RsiScalarProblemd>();
  if (kind == "least_squares") {
    if (dims.size() != 2) throw std::invalid_argument("problem fixture: least_squares needs n x d");
    const Index n = dims[0], d = dims[1];
    Matrixd A(n, d);
    Vectord b(n);
    for (Index i = 0; i < n; ++i) {
      A.row(i) = detail::read_values(in, d).transpose();
      b[i] = detail::read_value(in);
    }
    Vectord w_star = detail::read_values(in, d);
    return std::make_shared<LeastSquaresProblemd>(std::move(A), std::move(b), std::move(w_star),
                                                  eps, seed);
  }
  if (kind == "quadratic_ensemble") {
    if (dims.size() != 2) throw std::invalid_argument("problem fixture: quadratic needs n x d");
    const Index n = dims[0], d = dims[1];
    const double alpha = detail::read_value(in), beta = detail::read_value(in);
    std::vector<Matrixd> As;
    Vectord c(n);
    for (Index i = 0; i < n; ++i) {
      Matrixd A(d, d);
      for (Index r = 0; r < d; ++r) A.row(r) = detail::read_values(in, d).transpose();
      As.push_back(std::move(A));
      c[i] = detail::read_value(in);
    }
    Vectord w_star = detail::read_values(in, d);
    return std::make_shared<QuadraticEnsembleProblemd>(std::move(As), std::move(c),
                                                       std::move(w_star), alpha, beta, eps, seed);
  }
  if (kind == "hinge_ensemble") {
    if (dims.size() != 2) throw std::invalid_argument("problem fixture: hinge needs n x d");
    const Index n = dims[0], d = dims[1];
    Matrixd X(n, d);
    Vectord y(n);
    for (Index i = 0; i < n; ++i) {
      X.row(i) = detail::read_values(in, d).transpose();
      y[i] = detail::read_value(in);
    }
    Vectord w_star = detail::read_values(in, d);
    return std::make_shared<HingeEnsembleProblemd>(std::move(X), std::move(y), std::move(w_star),
                                                   seed);
  }
  if (kind == "tiny_mlp") {
    if (dims.size() != 3) throw std::invalid_argument("problem fixture: tiny_mlp needs d x h x n");
    const Index d = dims[0], h = dims[1], n = dims[2];
    const Index p = h * d + h + h + 1;
    Vectord teacher = detail::read_values(in, p);
    Vectord init = detail::read_values(in, p);
    Matrixd X(n, d);
    Vectord y(n);
    for (Index i = 0; i < n; ++i) {
      X.row(i) = detail::read_values(in, d).transpose();
      y[i] = detail::read_value(in);
    }
    return std::make_shared<TinyMlpProblemd>(d, h, std::move(X), std::move(y), std::move(teacher),
                                             std::move(init), seed);
  }
  throw std::invalid_argument("problem fixture: unknown kind: " + kind);
}

}  // namespace alig
