#pragma once

// Arm MDPs, cohorts, the three-level cost model and structural validation.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace netrmab {

/// Budget and cost amounts in thousandths of a pull. All feasibility
/// comparisons happen on this integer scale.
using Milli = std::int64_t;

inline constexpr Milli kMilliPerUnit = 1000;

/// Converts a real amount carrying at most three decimals to milli-units.
Milli to_milli(double units);
double from_milli(Milli m);

enum class Action : std::uint8_t { kNoAct = 0, kMessage = 1, kPull = 2 };

inline constexpr int kNumActions = 3;
inline constexpr int kNumStates = 2;

constexpr int to_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int a);

using ActionVector = std::vector<Action>;
using StateVector = std::vector<std::uint8_t>;

/// Two-state, three-action arm. Entry (a, s, s') is P^a_{s,s'}.
class ArmModel {
 public:
  using Tensor = std::array<double, kNumActions * kNumStates * kNumStates>;

  ArmModel() = default;
  ArmModel(int id, const Tensor& transitions);

  /// Builds the tensor from the probabilities of landing in state 1,
  /// indexed [action][state].
  static ArmModel from_next_desirable(
      int id, const std::array<std::array<double, 2>, 3>& to_one);

  int id() const { return id_; }
  const Tensor& tensor() const { return transitions_; }

  double prob(Action a, int s, int next) const {
    return transitions_[flat(to_index(a), s, next)];
  }
  double prob(int a, int s, int next) const {
    return transitions_[flat(a, s, next)];
  }

  static constexpr std::size_t flat(int a, int s, int next) {
    return static_cast<std::size_t>((a * kNumStates + s) * kNumStates + next);
  }

  bool operator==(const ArmModel&) const = default;

 private:
  int id_ = 0;
  Tensor transitions_{};
};

/// Returns P^a_{s,1}, which is E[r(s_{t+1}) | s, a] under r(s) = s.
/// Throws std::out_of_range for s outside {0,1} or a outside {0,1,2}.
double expected_next_desirable(const ArmModel& arm, int s, int a);

struct Violation {
  enum class Kind {
    kEntryOutOfRange,   // entry not strictly inside (0,1)
    kRowSum,            // (action, state) row does not sum to 1
    kDesirableOrdering, // P^a_{0,1} >= P^a_{1,1}
    kActionOrdering,    // P^a_{s,1} >= P^{a'}_{s,1} for a < a'
  };
  Kind kind;
  int action = -1;
  int state = -1;
  int next_state = -1;
  int other_action = -1;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(Violation::Kind k) const;
};

ValidationReport validate_structural(const ArmModel& arm);

/// Options for the constructive arm sampler. The two no-act probabilities
/// of reaching state 1 are drawn uniformly from `base` (kept `margin` away
/// from 0 and 1); the message probability adds a uniform increment from
/// `message_increment` and the pull probability a further one from
/// `pull_increment`. Both are clamped below 1 with `margin` headroom.
struct ArmSamplerOptions {
  double margin = 1e-3;
  std::array<double, 2> base{0.2, 0.8};
  std::array<double, 2> message_increment{1e-3, 0.7};
  std::array<double, 2> pull_increment{1e-3, 0.1};

  bool operator==(const ArmSamplerOptions&) const = default;
};

ArmModel sample_arm(std::mt19937_64& rng, int id = 0,
                    const ArmSamplerOptions& options = {});

/// Cost vector [0, psi, 1] on the milli scale.
class CostModel {
 public:
  CostModel() = default;
  explicit CostModel(Milli psi);

  Milli psi() const { return psi_; }
  Milli cost(Action a) const;
  Milli pull() const { return kMilliPerUnit; }
  Milli message() const { return psi_; }

  bool operator==(const CostModel&) const = default;

 private:
  Milli psi_ = 0;
};

Milli total_cost(std::span<const Action> actions, const CostModel& cost);

/// Local reward r(s). Experiments only use r(s) = s.
struct LocalReward {
  double r0 = 0.0;
  double r1 = 1.0;
  double operator()(int s) const { return s ? r1 : r0; }
  double max() const { return r1 > r0 ? r1 : r0; }
};

class Cohort {
 public:
  Cohort(std::vector<ArmModel> arms, CostModel cost, double beta,
         Milli budget, int horizon);

  std::size_t size() const { return arms_.size(); }
  const std::vector<ArmModel>& arms() const { return arms_; }
  const ArmModel& arm(std::size_t i) const { return arms_[i]; }
  const CostModel& cost() const { return cost_; }
  double beta() const { return beta_; }
  Milli budget() const { return budget_; }
  int horizon() const { return horizon_; }

  Cohort with_budget(Milli budget) const;
  Cohort with_psi(Milli psi) const;
  Cohort with_horizon(int horizon) const;

  bool operator==(const Cohort&) const = default;

 private:
  std::vector<ArmModel> arms_;
  CostModel cost_;
  double beta_;
  Milli budget_;
  int horizon_;
};

/// Samples n arms from a single generator seeded with `seed`.
Cohort sample_cohort(std::size_t n, std::uint64_t seed, double beta,
                     Milli budget, Milli psi, int horizon,
                     const ArmSamplerOptions& options = {});

nlohmann::json cohort_to_json(const Cohort& cohort);
Cohort cohort_from_json(const nlohmann::json& doc);

}  // namespace netrmab
