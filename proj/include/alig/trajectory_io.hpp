#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "alig/types.hpp"

namespace alig {

inline const char* trajectory_csv_header() {
  return "step,loss,step_size,grad_norm_sq,dist_to_opt_sq,full_objective";
}

namespace detail {

// 17 significant digits round-trip any double exactly.
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

template <class Scalar>
void write_trajectory_csv(std::ostream& out, const Trajectory<Scalar>& trajectory) {
  out << trajectory_csv_header() << '\n';
  for (const auto& r : trajectory.records) {
    out << r.step << ',' << detail::format_g17(static_cast<double>(r.loss)) << ','
        << detail::format_g17(static_cast<double>(r.step_size)) << ','
        << detail::format_g17(static_cast<double>(r.grad_norm_sq)) << ',';
    if (r.dist_to_opt_sq) out << detail::format_g17(static_cast<double>(*r.dist_to_opt_sq));
    out << ',';
    if (r.full_objective) out << detail::format_g17(static_cast<double>(*r.full_objective));
    out << '\n';
  }
}

// Reads a CSV produced by write_trajectory_csv.  Sample indices are not part
// of the CSV schema, so records come back with empty index lists.
inline Trajectoryd read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trajectory csv: empty stream");
  if (line != trajectory_csv_header())
    throw std::invalid_argument("trajectory csv: unexpected header: " + line);
  Trajectoryd trajectory;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    StepRecordd r;
    auto next = [&] {
      if (!std::getline(ss, field, ','))
        throw std::invalid_argument("trajectory csv: short row: " + line);
    };
    next();
    r.step = std::strtoll(field.c_str(), nullptr, 10);
    next();
    r.loss = std::strtod(field.c_str(), nullptr);
    next();
    r.step_size = std::strtod(field.c_str(), nullptr);
    next();
    r.grad_norm_sq = std::strtod(field.c_str(), nullptr);
    next();
    if (!field.empty()) r.dist_to_opt_sq = std::strtod(field.c_str(), nullptr);
    if (std::getline(ss, field) && !field.empty()) r.full_objective = std::strtod(field.c_str(), nullptr);
    trajectory.records.push_back(std::move(r));
  }
  return trajectory;
}

}  // namespace alig
