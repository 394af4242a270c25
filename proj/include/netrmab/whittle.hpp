#pragma once

// Whittle indices for each (arm, state, active action) by subsidy bisection
// over the two-action subsidised value function.

#include <array>
#include <iosfwd>
#include <vector>

#include "netrmab/core.hpp"

namespace netrmab {

/// Fixed point of the subsidised two-action Bellman backup for one arm:
///   V(s) = max{ m + r(s) + beta * sum_s' P^0_{s,s'} V(s'),
///               r(s) + beta * sum_s' P^alpha_{s,s'} V(s') }.
struct SubsidizedValue {
  std::array<double, 2> value{};
  std::array<double, 2> passive_q{};
  std::array<double, 2> active_q{};
  int iterations = 0;

  bool active_preferred(int s) const { return active_q[s] > passive_q[s]; }
  bool passive_preferred(int s) const { return passive_q[s] >= active_q[s]; }
};

struct WhittleOptions {
  double vi_tolerance = 1e-9;
  double index_tolerance = 1e-6;
  int max_iterations = 1'000'000;
  int max_bracket_doublings = 40;
  LocalReward reward{};
};

/// Throws std::invalid_argument on a passive `active` action, beta outside
/// (0,1) or non-positive tolerance, and std::runtime_error when the
/// iteration cap is hit.
SubsidizedValue value_iteration(const ArmModel& arm, Action active,
                                double subsidy, double beta, double tolerance,
                                const WhittleOptions& options = {});

/// Infimum subsidy making passivity weakly preferred in state `s`.
double whittle_index(const ArmModel& arm, int s, Action active, double beta,
                     const WhittleOptions& options = {});

/// Precomputed indices. Arm id -1 (the dummy vertex) maps to 0.
class WhittleTable {
 public:
  WhittleTable() = default;
  explicit WhittleTable(std::size_t n) : values_(n) {}

  std::size_t size() const { return values_.size(); }

  double index(int arm, int s, Action active) const;
  void set(int arm, int s, Action active, double value);

  /// Indices of every arm at its current state for one active action.
  std::vector<double> resolve(const StateVector& states, Action active) const;

  /// CSV with columns arm_id,state,action,index (6 decimals).
  void write_csv(std::ostream& os) const;

  bool operator==(const WhittleTable&) const = default;

 private:
  // [arm][state][active - 1]
  std::vector<std::array<std::array<double, 2>, 2>> values_;
};

WhittleTable build_table(const Cohort& cohort,
                         const WhittleOptions& options = {});

}  // namespace netrmab
