#include "netrmab/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace netrmab {

namespace {

void check_active(Action active) {
  if (active == Action::kNoAct) {
    throw std::invalid_argument("active action must be message or pull");
  }
}

}  // namespace

SubsidizedValue value_iteration(const ArmModel& arm, Action active,
                                double subsidy, double beta, double tolerance,
                                const WhittleOptions& options) {
  check_active(active);
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("discount must lie in (0,1)");
  }
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  const int alpha = to_index(active);
  const LocalReward& r = options.reward;

  SubsidizedValue out;
  std::array<double, 2> v{0.0, 0.0};
  for (int it = 1; it <= options.max_iterations; ++it) {
    std::array<double, 2> next{};
    double change = 0.0;
    for (int s = 0; s < kNumStates; ++s) {
      const double passive = subsidy + r(s) +
                             beta * (arm.prob(0, s, 0) * v[0] +
                                     arm.prob(0, s, 1) * v[1]);
      const double act = r(s) + beta * (arm.prob(alpha, s, 0) * v[0] +
                                        arm.prob(alpha, s, 1) * v[1]);
      out.passive_q[s] = passive;
      out.active_q[s] = act;
      next[s] = std::max(passive, act);
      change = std::max(change, std::abs(next[s] - v[s]));
    }
    v = next;
    if (change < tolerance) {
      out.value = v;
      out.iterations = it;
      return out;
    }
  }
  throw std::runtime_error("value iteration did not converge within " +
                           std::to_string(options.max_iterations) +
                           " iterations");
}

double whittle_index(const ArmModel& arm, int s, Action active, double beta,
                     const WhittleOptions& options) {
  check_active(active);
  if (s < 0 || s >= kNumStates) {
    throw std::out_of_range("state index " + std::to_string(s));
  }
  auto passive_at = [&](double m) {
    return value_iteration(arm, active, m, beta, options.vi_tolerance, options)
        .passive_preferred(s);
  };

  if (passive_at(0.0)) return 0.0;

  double lo = 0.0;
  double hi = options.reward.max() / (1.0 - beta);
  int doublings = 0;
  while (!passive_at(hi)) {
    if (++doublings > options.max_bracket_doublings) {
      throw std::invalid_argument(
          "active action preferred at every bracketed subsidy for arm " +
          std::to_string(arm.id()));
    }
    lo = hi;
    hi *= 2.0;
  }
  // Passive preference is monotone in the subsidy, so the predicate flips
  // exactly once inside [lo, hi].
  while (hi - lo > options.index_tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (passive_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double WhittleTable::index(int arm, int s, Action active) const {
  check_active(active);
  if (arm == -1) return 0.0;
  return values_.at(static_cast<std::size_t>(arm))
      .at(static_cast<std::size_t>(s))[to_index(active) - 1];
}

void WhittleTable::set(int arm, int s, Action active, double value) {
  check_active(active);
  values_.at(static_cast<std::size_t>(arm))
      .at(static_cast<std::size_t>(s))[to_index(active) - 1] = value;
}

std::vector<double> WhittleTable::resolve(const StateVector& states,
                                          Action active) const {
  if (states.size() != values_.size()) {
    throw std::invalid_argument("state vector length does not match table");
  }
  std::vector<double> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    out[i] = values_[i][states[i]][to_index(active) - 1];
  }
  return out;
}

void WhittleTable::write_csv(std::ostream& os) const {
  os << "arm_id,state,action,index\n";
  char buf[96];
  for (std::size_t i = 0; i < values_.size(); ++i) {
    for (int s = 0; s < kNumStates; ++s) {
      for (int a = 1; a < kNumActions; ++a) {
        std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.6f\n", i, s, a,
                      values_[i][s][a - 1]);
        os << buf;
      }
    }
  }
  for (int s = 0; s < kNumStates; ++s) {
    for (int a = 1; a < kNumActions; ++a) {
      std::snprintf(buf, sizeof buf, "-1,%d,%d,%.6f\n", s, a, 0.0);
      os << buf;
    }
  }
}

WhittleTable build_table(const Cohort& cohort, const WhittleOptions& options) {
  WhittleTable table(cohort.size());
  for (const auto& arm : cohort.arms()) {
    for (int s = 0; s < kNumStates; ++s) {
      for (Action a : {Action::kMessage, Action::kPull}) {
        try {
          table.set(arm.id(), s, a,
                    whittle_index(arm, s, a, cohort.beta(), options));
        } catch (const std::exception& e) {
          throw std::runtime_error("whittle index failed for arm " +
                                   std::to_string(arm.id()) + ": " + e.what());
        }
      }
    }
  }
  return table;
}

}  // namespace netrmab
