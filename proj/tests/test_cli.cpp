#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "alig/trajectory_io.hpp"

namespace {

namespace fs = std::filesystem;

fs::path scratch_path(const std::string& name) {
  return fs::temp_directory_path() / ("alig_cli_test_" + name);
}

// Exit status of the CLI binary; stdout and stderr land in capture.
int run_cli(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      std::string(ALIG_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run writes a parseable trajectory and reports the outcome") {
  const auto csv = scratch_path("run.csv");
  const auto out = scratch_path("run.out");
  const int code = run_cli(
      "run --problem rsi_scalar --optimizer polyak_gd --steps 5 --log-every 1 --csv-out " +
          csv.string(),
      out);
  CHECK(code == 0);
  const std::string text = slurp(out);
  CHECK(text.find("problem") != std::string::npos);
  CHECK(text.find("rsi_scalar") != std::string::npos);
  CHECK(text.find("final_objective") != std::string::npos);

  std::ifstream in(csv);
  REQUIRE(in.good());
  const auto traj = alig::read_trajectory_csv(in);
  REQUIRE(traj.records.size() == 6);  // five step records plus the terminal one
  CHECK(traj.records.back().step == 5);
  CHECK(traj.records.back().full_objective.has_value());
  fs::remove(csv);
  fs::remove(out);
}

TEST_CASE("a fixture saved by one invocation is loadable by the next") {
  const auto file = scratch_path("fixture.txt");
  const auto out = scratch_path("fixture.out");
  CHECK(run_cli("run --problem least_squares --steps 10 --save-problem " + file.string(), out) ==
        0);
  CHECK(run_cli("run --problem-file " + file.string() + " --steps 10", out) == 0);
  CHECK(slurp(out).find("least_squares") != std::string::npos);
  fs::remove(file);
  fs::remove(out);
}

TEST_CASE("sweep emits the table header") {
  const auto csv = scratch_path("sweep.csv");
  const auto out = scratch_path("sweep.out");
  const int code = run_cli(
      "sweep --problem rsi_scalar --delta 0 --steps 2000 --etas 0.1,100 --csv-out " + csv.string(),
      out);
  CHECK(code == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("eta,final_objective,converged,steps_to_threshold\n", 0) == 0);
  fs::remove(csv);
  fs::remove(out);
}

TEST_CASE("rates fits a model after a run") {
  const auto out = scratch_path("rates.out");
  const int code = run_cli(
      "rates --problem quadratic_ensemble --eta 0.5 --steps 1000 --model exponential", out);
  CHECK(code == 0);
  const std::string text = slurp(out);
  CHECK(text.find("model") != std::string::npos);
  CHECK(text.find("fit_residual") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("usage errors exit with status 2") {
  const auto out = scratch_path("usage.out");
  CHECK(run_cli("run --definitely-not-a-flag 3", out) == 2);
  CHECK(run_cli("run --problem rsi_scalar --optimizer sparkle --steps 1", out) == 2);
  CHECK(run_cli("run --problem no_such_fixture --steps 1", out) == 2);
  fs::remove(out);
}
