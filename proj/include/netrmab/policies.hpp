#pragma once

// Comparison policies and the exact solver for the joint MDP at small n.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrmab/core.hpp"
#include "netrmab/graph.hpp"
#include "netrmab/whittle.hpp"

namespace netrmab {

/// Raised when a computation would exceed a configured size limit.
class ResourceGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty when `a` is total over n arms, costs at most `budget` and every
/// messaged arm has a pulled in-neighbor in `g`; otherwise a description of
/// the first violation found.
std::optional<std::string> feasibility_violation(const ActionVector& a,
                                                 const DiGraph& g,
                                                 const CostModel& cost,
                                                 Milli budget);

ActionVector noact_step(std::size_t n);

/// Uniform draws among affordable live edges that still change the
/// assignment, applying (pull u, message v) and pruning after each draw.
ActionVector random_step(const DiGraph& g, Milli budget, const CostModel& cost,
                         std::mt19937_64& rng);

/// As random_step with draw weight 1 + out-degree of the source in g.
ActionVector cw_random_step(const DiGraph& g, Milli budget,
                            const CostModel& cost, std::mt19937_64& rng);

/// Greedy on next-step expected reward. The default score of an edge is the
/// gain in P(next state = 1) from the upgrades it would apply to the current
/// candidate; `raw` scores the absolute probabilities of the upgraded arms
/// instead.
ActionVector myopic_step(const DiGraph& g, Milli budget, const Cohort& cohort,
                         const StateVector& states, bool raw = false);

/// Top floor(B) arms by pull index, ties by arm id.
ActionVector tw_step(const std::vector<double>& w2, Milli budget);

struct FeasibleJointAction {
  ActionVector actions;
  Milli cost = 0;
};

inline constexpr int kMaxEnumerationArms = 10;

/// Every feasible joint action in lexicographic order (arm 0 most
/// significant). Throws ResourceGuardError above kMaxEnumerationArms arms.
std::vector<FeasibleJointAction> enumerate_feasible(const DiGraph& g,
                                                    Milli budget,
                                                    const CostModel& cost);

/// Joint MDP with state bit i holding arm i's state.
struct SystemMdp {
  std::vector<ArmModel> arms;
  std::vector<FeasibleJointAction> actions;
  double beta = 0.95;
  LocalReward reward{};

  std::size_t arm_count() const { return arms.size(); }
  std::size_t state_count() const { return std::size_t{1} << arms.size(); }
  double state_reward(std::uint32_t mask) const;
  /// Probability of moving from `from` to `to` under joint action `action`.
  double transition(std::uint32_t from, std::size_t action,
                    std::uint32_t to) const;
};

SystemMdp build_system_mdp(const Cohort& cohort, const DiGraph& g);

struct ViOptions {
  double tolerance = 1e-6;
  int max_sweeps = 100'000;
  std::size_t max_state_actions = std::size_t{1} << 26;
};

struct ViSolution {
  std::vector<double> value;         // per state mask
  std::vector<std::size_t> policy;   // action index per state mask
  int sweeps = 0;
};

/// Value iteration to sup-norm change below the tolerance, then greedy
/// extraction keeping the first maximizer in enumeration order.
ViSolution vi_solve(const SystemMdp& mdp, const ViOptions& options = {});

std::uint32_t state_mask(const StateVector& states);

enum class PolicyKind { kNoAct, kRandom, kCwRandom, kMyopic, kTw, kGreta, kVi };

struct PolicySpec {
  PolicyKind kind = PolicyKind::kNoAct;
  bool myopic_raw = false;
  ViOptions vi{};
  /// When set, the heuristic appends its per-chunk trace rows here.
  std::ostream* greta_trace = nullptr;
};

/// Accepts noact | random | cwrandom | myopic | tw | greta | vi.
PolicyKind parse_policy_kind(const std::string& name);
std::string policy_name(PolicyKind kind);

struct StepContext {
  int t = 0;
  const StateVector& states;
  const Cohort& cohort;
  const DiGraph& graph;  // arm space
  const WhittleTable& table;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  /// Resets per-episode state; randomized policies reseed from `seed`.
  virtual void begin_episode(std::uint64_t /*seed*/) {}
  virtual ActionVector act(const StepContext& ctx) = 0;
};

/// The exact policy solves its MDP here, once per (cohort, graph).
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Cohort& cohort,
                                    const DiGraph& graph);

}  // namespace netrmab
