#pragma once

// Seeded episodes, seed batches and summary metrics.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrmab/core.hpp"
#include "netrmab/graph.hpp"
#include "netrmab/policies.hpp"
#include "netrmab/whittle.hpp"

namespace netrmab {

/// A policy emitted an infeasible assignment. Not recoverable: it means a
/// policy is broken.
class FeasibilityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitialStates { kUniform, kAllZero, kAllOne };

InitialStates parse_initial_states(const std::string& name);
std::string initial_states_name(InitialStates init);

/// Draws 1 with probability P^a_{s,1} using uniform u in [0,1).
inline int transition(const ArmModel& arm, int s, Action a, double u) {
  return u < arm.prob(a, s, 1) ? 1 : 0;
}

/// The uniform that drives arm `arm` from step t to t+1 under episode seed
/// `seed`. Independent of the policy, so policies see common random numbers.
double transition_uniform(std::uint64_t seed, int arm, int t);

StateVector initial_states(std::size_t n, std::uint64_t seed, InitialStates init);

struct EpisodeResult {
  std::uint64_t seed = 0;
  std::vector<StateVector> states;    // T rows: s_0 .. s_{T-1}
  std::vector<ActionVector> actions;  // T rows
  double reward = 0.0;                // sum over the state matrix
  Milli max_spend = 0;                // largest per-step cost
};

struct EpisodeOptions {
  InitialStates init = InitialStates::kUniform;
  bool keep_trajectory = true;
};

/// Runs T = cohort.horizon() steps. Throws FeasibilityViolation with the
/// step, seed and reason when the policy breaks a constraint.
EpisodeResult run_episode(const Cohort& cohort, const DiGraph& graph,
                          const WhittleTable& table, Policy& policy,
                          std::uint64_t seed, const EpisodeOptions& options = {});

struct Summary {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 * sample sd / sqrt(k); 0 for k < 2
  std::size_t count = 0;
};

Summary summarize(const std::vector<double>& values);

struct BatchResult {
  std::string policy;
  std::vector<std::uint64_t> seeds;
  std::vector<double> rewards;  // seed order
  Summary summary;
  Milli max_spend = 0;
};

/// One episode per seed on a fixed instance, spread across `workers`
/// threads (0 = hardware concurrency) and reduced in seed order. Each
/// worker builds its own policy from `spec`.
BatchResult run_batch(const Cohort& cohort, const DiGraph& graph,
                      const WhittleTable& table, const PolicySpec& spec,
                      const std::vector<std::uint64_t>& seeds,
                      const EpisodeOptions& options = {}, unsigned workers = 0);

/// 100 (e_pi - e_noact) / (e_gh - e_noact); empty when the denominator is 0.
std::optional<double> intervention_benefit(double e_pi, double e_noact,
                                           double e_gh);

/// Per-seed benefit summarised over seeds where it is defined, plus the
/// benefit of the batch means.
struct BenefitSummary {
  Summary paired;
  std::size_t undefined = 0;
  std::optional<double> of_means;
};

BenefitSummary paired_benefit(const std::vector<double>& pi,
                              const std::vector<double>& noact,
                              const std::vector<double>& gh);

/// One CSV row of results.csv.
struct ResultRow {
  std::string policy;
  std::string mapping;
  Milli budget = 0;
  Milli psi = 0;
  double p_in = 0.0;
  double p_out = 0.0;
  int n = 0;
  int horizon = 0;
  Summary summary;
  std::string config_hash;
  Milli max_spend = 0;
  std::string tag;
};

void write_result_header(std::ostream& os);
void write_result_row(std::ostream& os, const ResultRow& row);

/// Fixed six-decimal formatting independent of the stream state.
std::string fixed6(double x);

}  // namespace netrmab
