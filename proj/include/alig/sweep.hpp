#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <vector>

#include "alig/optimizers.hpp"
#include "alig/parallel.hpp"
#include "alig/trajectory_io.hpp"
#include "alig/types.hpp"

namespace alig {

struct SweepRow {
  double eta = 0;
  double final_objective = 0;
  bool converged = false;
  std::optional<Index> steps_to_threshold;
};

// Decades from 1e-4 to 1e6, wide enough to straddle every fixture's
// convergence boundary.
inline std::vector<double> default_eta_grid() {
  std::vector<double> etas;
  for (int e = -4; e <= 6; ++e) etas.push_back(std::pow(10.0, e));
  return etas;
}

// Runs the same configuration once per eta (in parallel; each run draws its
// own generator from the shared seed).  A run converges when its final full
// objective is finite and below threshold + f_star; steps_to_threshold is the
// first logged step already below that level, so its resolution is the
// logging cadence.
inline std::vector<SweepRow> run_eta_sweep(const Problemd& problem, const OptimizerConfigd& base,
                                           OptimizerKind kind, const FeasibleRegiond& region,
                                           const std::vector<double>& etas, double threshold) {
  if (etas.empty()) throw std::invalid_argument("run_eta_sweep: empty eta grid");
  if (!(threshold > 0)) throw std::invalid_argument("run_eta_sweep: threshold must be positive");
  const double level = problem.meta().f_star_or_zero() + threshold;
  std::vector<SweepRow> rows(etas.size());
  parallel_for(static_cast<Index>(etas.size()), [&](Index i) {
    OptimizerConfigd cfg = base;
    cfg.max_lr_eta = etas[static_cast<std::size_t>(i)];
    const Trajectoryd traj = run(problem, cfg, kind, region);
    SweepRow row;
    row.eta = cfg.max_lr_eta;
    const auto& fin = traj.records.back();
    row.final_objective = fin.full_objective.value_or(infinity<double>());
    row.converged = std::isfinite(row.final_objective) && row.final_objective < level;
    for (const auto& rec : traj.records) {
      if (rec.full_objective && *rec.full_objective < level) {
        row.steps_to_threshold = rec.step;
        break;
      }
    }
    rows[static_cast<std::size_t>(i)] = std::move(row);
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "eta,final_objective,converged,steps_to_threshold\n";
  for (const auto& row : rows) {
    os << detail::format_g17(row.eta) << ',' << detail::format_g17(row.final_objective) << ','
       << (row.converged ? 1 : 0) << ',';
    if (row.steps_to_threshold) os << *row.steps_to_threshold;
    os << '\n';
  }
}

}  // namespace alig
