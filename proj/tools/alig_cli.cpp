#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "alig/optimizers.hpp"
#include "alig/problem_io.hpp"
#include "alig/problems.hpp"
#include "alig/ratefit.hpp"
#include "alig/sweep.hpp"
#include "alig/trajectory_io.hpp"
#include "alig/verify.hpp"

namespace {

using namespace alig;

struct ProblemOpts {
  std::string kind = "quadratic";
  std::string dims;  // e.g. "20x10"; empty uses the kind's default shape
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string load_path;
  std::string save_path;
};

struct RunOpts {
  std::string optimizer = "alig";
  std::string eta = "0.1";  // accepts "inf"
  std::optional<double> delta;
  double momentum = 0.0;
  std::string momentum_variant = "scaled_velocity";
  Index batch = 1;
  Index steps = 1000;
  std::uint64_t seed = 0;
  Index log_every = 10;
  std::optional<double> threshold;
  std::string region = "none";
};

void add_problem_flags(CLI::App* cmd, ProblemOpts& opts) {
  cmd->add_option("--problem", opts.kind,
                  "Fixture kind: rsi_scalar, least_squares, quadratic_ensemble, "
                  "hinge_ensemble, tiny_mlp");
  cmd->add_option("--dims", opts.dims,
                  "Shape, x-separated (ensembles: NxD, mlp: DxHxN); empty for defaults");
  cmd->add_option("--eps", opts.eps, "Interpolation tolerance for fixtures that support it");
  cmd->add_option("--problem-seed", opts.seed, "Seed for fixture generation");
  cmd->add_option("--problem-file", opts.load_path, "Load the fixture from a saved file instead");
  cmd->add_option("--save-problem", opts.save_path, "Write the fixture to this file");
}

void add_run_flags(CLI::App* cmd, RunOpts& opts) {
  cmd->add_option("--optimizer", opts.optimizer, "alig, alig_inf, polyak_gd, or sgd");
  cmd->add_option("--eta", opts.eta, "Maximal learning rate (sgd: the constant rate); 'inf' allowed");
  cmd->add_option("--delta", opts.delta, "Step damping; default depends on the fixture");
  cmd->add_option("--momentum", opts.momentum, "Momentum coefficient in [0, 1)");
  cmd->add_option("--momentum-variant", opts.momentum_variant,
                  "scaled_velocity or standard_nesterov");
  cmd->add_option("--batch", opts.batch, "Samples per step");
  cmd->add_option("--steps", opts.steps, "Number of optimization steps");
  cmd->add_option("--seed", opts.seed, "Sampling seed for the run");
  cmd->add_option("--log-every", opts.log_every, "Full-objective cadence after step 100");
  cmd->add_option("--stop-threshold", opts.threshold,
                  "Stop once the full objective drops below this");
  cmd->add_option("--region", opts.region, "Feasible region: 'none' or 'l2:<radius>'");
}

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  if (text.empty()) return dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (part.empty()) throw std::invalid_argument("bad --dims: " + text);
    dims.push_back(static_cast<Index>(std::stoll(part)));
  }
  return dims;
}

double parse_eta(const std::string& text) {
  if (text == "inf" || text == "infinity") return infinity<double>();
  std::size_t used = 0;
  const double value = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("bad --eta: " + text);
  return value;
}

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "alig") return OptimizerKind::alig;
  if (text == "alig_inf") return OptimizerKind::alig_inf;
  if (text == "polyak_gd") return OptimizerKind::polyak_gd;
  if (text == "sgd") return OptimizerKind::sgd;
  throw std::invalid_argument("bad --optimizer: " + text);
}

MomentumVariant parse_variant(const std::string& text) {
  if (text == "scaled_velocity") return MomentumVariant::scaled_velocity;
  if (text == "standard_nesterov") return MomentumVariant::standard_nesterov;
  throw std::invalid_argument("bad --momentum-variant: " + text);
}

FeasibleRegiond parse_region(const std::string& text) {
  if (text == "none") return FeasibleRegiond::all();
  if (text.rfind("l2:", 0) == 0) {
    const double radius = std::stod(text.substr(3));
    return FeasibleRegiond::ball(radius);
  }
  throw std::invalid_argument("bad --region: " + text + " (expected 'none' or 'l2:<radius>')");
}

std::shared_ptr<const Problemd> build_problem(const ProblemOpts& opts) {
  std::shared_ptr<const Problemd> problem;
  if (!opts.load_path.empty()) {
    std::ifstream in(opts.load_path);
    if (!in) throw std::runtime_error("cannot open problem file: " + opts.load_path);
    problem = load_problem(in);
  } else {
    problem = make_problem(opts.kind, parse_dims(opts.dims), opts.eps, opts.seed);
  }
  if (!opts.save_path.empty()) {
    std::ofstream out(opts.save_path);
    if (!out) throw std::runtime_error("cannot write problem file: " + opts.save_path);
    save_problem(out, *problem);
  }
  return problem;
}

OptimizerConfigd build_config(const RunOpts& opts, const Problemd& problem) {
  OptimizerConfigd cfg;
  cfg.max_lr_eta = parse_eta(opts.eta);
  cfg.delta = opts.delta ? *opts.delta : default_delta_for(problem);
  cfg.momentum_mu = opts.momentum;
  cfg.momentum_variant = parse_variant(opts.momentum_variant);
  cfg.batch_size = opts.batch;
  cfg.seed = opts.seed;
  cfg.max_steps = opts.steps;
  cfg.log_every = opts.log_every;
  cfg.stop_threshold = opts.threshold;
  return cfg;
}

int cmd_run(const ProblemOpts& popts, const RunOpts& ropts, const std::string& csv_out) {
  const auto problem = build_problem(popts);
  const auto cfg = build_config(ropts, *problem);
  const auto region = parse_region(ropts.region);
  const auto traj = run(*problem, cfg, parse_optimizer(ropts.optimizer), region);
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    if (!out) throw std::runtime_error("cannot write csv file: " + csv_out);
    write_trajectory_csv(out, traj);
  }
  const auto& fin = traj.records.back();
  std::printf("problem          %s\n", problem->kind().c_str());
  std::printf("steps            %lld\n", static_cast<long long>(fin.step));
  std::printf("final_objective  %.17g\n", fin.full_objective.value_or(infinity<double>()));
  if (fin.dist_to_opt_sq) std::printf("dist_to_opt_sq   %.17g\n", *fin.dist_to_opt_sq);
  if (traj.error) {
    std::printf("error            %s (at step %lld)\n", traj.error->c_str(),
                static_cast<long long>(traj.error_step.value_or(-1)));
    return 1;
  }
  return 0;
}

int cmd_sweep(const ProblemOpts& popts, const RunOpts& ropts, const std::string& etas_text,
              double threshold, const std::string& csv_out) {
  const auto problem = build_problem(popts);
  RunOpts base = ropts;
  base.eta = "1";  // replaced per sweep row
  const auto cfg = build_config(base, *problem);
  std::vector<double> etas;
  if (etas_text.empty()) {
    etas = default_eta_grid();
  } else {
    std::stringstream ss(etas_text);
    std::string part;
    while (std::getline(ss, part, ',')) etas.push_back(parse_eta(part));
  }
  const auto rows = run_eta_sweep(*problem, cfg, parse_optimizer(ropts.optimizer),
                                  parse_region(ropts.region), etas, threshold);
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    if (!out) throw std::runtime_error("cannot write csv file: " + csv_out);
    write_sweep_csv(out, rows);
  } else {
    write_sweep_csv(std::cout, rows);
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, bool skip_envelopes) {
  const auto results = verify_suite(seed, !skip_envelopes);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("CHECK %-45s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                r.detail.c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}

int cmd_rates(const ProblemOpts& popts, const RunOpts& ropts, const std::string& model_text,
              double gap_floor) {
  RateModel model;
  if (model_text == "exponential") {
    model = RateModel::exponential;
  } else if (model_text == "inv_t") {
    model = RateModel::inv_t;
  } else if (model_text == "inv_sqrt_t") {
    model = RateModel::inv_sqrt_t;
  } else {
    throw std::invalid_argument("bad --model: " + model_text);
  }
  const auto problem = build_problem(popts);
  const auto cfg = build_config(ropts, *problem);
  const auto traj = run(*problem, cfg, parse_optimizer(ropts.optimizer),
                        parse_region(ropts.region));
  if (traj.error) {
    std::printf("error            %s\n", traj.error->c_str());
    return 1;
  }
  const auto fit = fit_rate(traj, model, problem->meta().f_star_or_zero(), gap_floor);
  std::printf("model            %s\n", model_text.c_str());
  std::printf("%s  %.17g\n",
              model == RateModel::exponential ? "log_slope      " : "amplitude      ",
              fit.fitted_constant);
  std::printf("fit_residual     %.17g\n", fit.fit_residual);
  std::printf("window           [%lld, %lld] (%lld points)\n",
              static_cast<long long>(fit.window_begin), static_cast<long long>(fit.window_end),
              static_cast<long long>(fit.num_points));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Polyak-step optimization workbench"};
  app.require_subcommand(1);

  ProblemOpts popts;
  RunOpts ropts;
  std::string csv_out;

  auto* run_cmd = app.add_subcommand("run", "Optimize a fixture and record the trajectory");
  add_problem_flags(run_cmd, popts);
  add_run_flags(run_cmd, ropts);
  run_cmd->add_option("--csv-out", csv_out, "Write the trajectory as CSV to this file");

  std::string etas_text;
  double sweep_threshold = 1e-8;
  auto* sweep_cmd = app.add_subcommand("sweep", "Re-run one configuration across a grid of eta");
  add_problem_flags(sweep_cmd, popts);
  add_run_flags(sweep_cmd, ropts);
  sweep_cmd->add_option("--etas", etas_text, "Comma-separated eta grid; default 1e-4..1e6");
  sweep_cmd->add_option("--threshold", sweep_threshold, "Convergence level above f_star");
  sweep_cmd->add_option("--csv-out", csv_out, "Write the sweep table to this file");

  std::uint64_t verify_seed = 0;
  bool skip_envelopes = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run the library's named self-checks");
  verify_cmd->add_option("--seed", verify_seed, "Seed for randomized checks");
  verify_cmd->add_flag("--skip-envelopes", skip_envelopes,
                       "Skip the multi-seed guarantee-envelope battery");

  std::string model_text = "exponential";
  double gap_floor = 0.0;
  auto* rates_cmd = app.add_subcommand("rates", "Optimize, then fit a decay model to the gap");
  add_problem_flags(rates_cmd, popts);
  add_run_flags(rates_cmd, ropts);
  rates_cmd->add_option("--model", model_text, "exponential, inv_t, or inv_sqrt_t");
  rates_cmd->add_option("--gap-floor", gap_floor,
                        "End the fitted window at the first gap at or below this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(popts, ropts, csv_out);
    if (sweep_cmd->parsed()) return cmd_sweep(popts, ropts, etas_text, sweep_threshold, csv_out);
    if (verify_cmd->parsed()) return cmd_verify(verify_seed, skip_envelopes);
    if (rates_cmd->parsed()) return cmd_rates(popts, ropts, model_text, gap_floor);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
