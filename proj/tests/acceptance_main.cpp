// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Each criterion aggregates the named self-checks it relies on.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "alig/envelopes.hpp"
#include "alig/verify.hpp"

using namespace alig;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  std::string name;
  std::function<std::vector<CheckResult>()> checks;
};

// Pass only if every member passes; detail names the worst member.
struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome evaluate(const std::vector<CheckResult>& results) {
  Outcome out;
  for (const auto& r : results) {
    if (!r.pass) {
      out.pass = false;
      out.detail = r.name + ": " + r.detail;
      return out;
    }
  }
  if (results.size() == 1) {
    out.detail = results.front().detail;
  } else {
    out.detail = std::to_string(results.size()) + " checks passed";
  }
  return out;
}

}  // namespace

int main() {
  const std::uint64_t seed = 0;
  const auto fix = detail::make_fixtures();

  std::vector<Criterion> criteria;
  criteria.push_back({"polyak_oscillation_boundary",
                      [&] { return std::vector<CheckResult>{check_polyak_oscillation(fix)}; }});
  criteria.push_back({"alig_eta_dichotomy", [&] {
                        return std::vector<CheckResult>{check_eta_dichotomy(fix),
                                                        check_eta_sweep_dichotomy(fix)};
                      }});
  criteria.push_back({"prox_dual_oracle", [&] {
                        return std::vector<CheckResult>{check_prox_against_dual_oracle(seed)};
                      }});
  criteria.push_back({"guarantee_envelopes", [&] {
                        std::vector<CheckResult> results;
                        for (const auto& cfg : standard_envelope_battery(seed)) {
                          const auto env = check_envelope(cfg);
                          results.push_back({"envelope_" + env.name, env.pass, env.detail});
                        }
                        return results;
                      }});
  criteria.push_back({"strongly_convex_rate_fit", [&] {
                        return std::vector<CheckResult>{check_rate_fit_strongly_convex(fix)};
                      }});
  criteria.push_back({"mlp_reaches_threshold", [&] {
                        return std::vector<CheckResult>{check_mlp_reaches_threshold(fix)};
                      }});
  criteria.push_back(
      {"gradient_correctness", [&] { return check_all_gradients(fix, seed); }});
  criteria.push_back({"step_size_lemmas", [&] {
                        return std::vector<CheckResult>{
                            check_lemma_smooth_loss_bound(fix, seed),
                            check_lemma_smooth_step_lower_bound(fix, seed),
                            check_lemma_strongly_convex_step_upper_bound(fix, seed),
                            check_lemma_parallelogram(seed)};
                      }});
  criteria.push_back({"update_equivalences", [&] {
                        return std::vector<CheckResult>{
                            check_deterministic_replay(fix),
                            check_alig_inf_full_batch_equals_polyak(fix),
                            check_momentum_zero_matches_plain(fix),
                            check_alig_step_solves_prox(fix),
                            check_sgd_replays_recorded_step(fix)};
                      }});

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = evaluate(criteria[i].checks());
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start).count();
    std::printf("CRITERION %zu %-28s %s (%.2fs) %s\n", i + 1, criteria[i].name.c_str(),
                out.pass ? "PASS" : "FAIL", secs, out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures == 0) {
    std::printf("ACCEPTANCE PASS (%zu criteria)\n", criteria.size());
    return 0;
  }
  std::printf("ACCEPTANCE FAIL (%d of %zu criteria failed)\n", failures, criteria.size());
  return 1;
}
