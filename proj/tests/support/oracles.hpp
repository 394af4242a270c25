#pragma once

// Reference computations used only by tests. Each one is written
// independently of the library routine it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "netrmab/core.hpp"
#include "netrmab/graph.hpp"
#include "netrmab/rng.hpp"

namespace oracle {

using netrmab::Action;
using netrmab::ArmModel;
using netrmab::Milli;

// Value of the stationary deterministic policy `pol` (pol[s] true = active)
// in the subsidised two-action problem, solved as a 2x2 linear system.
inline std::array<double, 2> policy_value(const ArmModel& arm, int alpha,
                                          const std::array<bool, 2>& pol,
                                          double m, double beta) {
  double p[2][2];
  double r[2];
  for (int s = 0; s < 2; ++s) {
    const int a = pol[s] ? alpha : 0;
    for (int x = 0; x < 2; ++x) p[s][x] = arm.prob(a, s, x);
    r[s] = s + (pol[s] ? 0.0 : m);
  }
  // (I - beta P) v = r
  const double a11 = 1 - beta * p[0][0];
  const double a12 = -beta * p[0][1];
  const double a21 = -beta * p[1][0];
  const double a22 = 1 - beta * p[1][1];
  const double det = a11 * a22 - a12 * a21;
  return {(r[0] * a22 - a12 * r[1]) / det, (a11 * r[1] - a21 * r[0]) / det};
}

// Optimal values by taking the pointwise best of the four stationary
// deterministic policies (one of them is optimal in a finite MDP).
inline std::array<double, 2> optimal_value(const ArmModel& arm, int alpha,
                                           double m, double beta) {
  std::array<double, 2> best{-1e300, -1e300};
  for (int mask = 0; mask < 4; ++mask) {
    const auto v = policy_value(arm, alpha, {(mask & 1) != 0, (mask & 2) != 0}, m, beta);
    best[0] = std::max(best[0], v[0]);
    best[1] = std::max(best[1], v[1]);
  }
  return best;
}

inline bool passive_weakly_preferred(const ArmModel& arm, int s, int alpha,
                                     double m, double beta) {
  const auto v = optimal_value(arm, alpha, m, beta);
  const double qp = m + s + beta * (arm.prob(0, s, 0) * v[0] + arm.prob(0, s, 1) * v[1]);
  const double qa = s + beta * (arm.prob(alpha, s, 0) * v[0] + arm.prob(alpha, s, 1) * v[1]);
  return qp >= qa - 1e-12;
}

// Smallest grid subsidy k*step at which passivity is weakly preferred.
inline double grid_whittle(const ArmModel& arm, int s, int alpha, double beta,
                           double step = 1e-5, double limit = 100.0) {
  for (long k = 0;; ++k) {
    const double m = static_cast<double>(k) * step;
    if (m > limit || passive_weakly_preferred(arm, s, alpha, m, beta)) return m;
  }
}

// Every assignment in {0,1,2}^n, checked for budget and message coverage.
inline std::vector<std::vector<Action>> brute_feasible(const netrmab::DiGraph& g,
                                                       Milli budget, Milli psi) {
  const int n = g.vertex_count();
  std::vector<std::vector<Action>> out;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    std::vector<Action> a(static_cast<std::size_t>(n));
    long c = code;
    for (int i = n - 1; i >= 0; --i) {
      a[static_cast<std::size_t>(i)] = static_cast<Action>(c % 3);
      c /= 3;
    }
    Milli cost = 0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      if (a[i] == Action::kPull) cost += 1000;
      if (a[i] == Action::kMessage) {
        cost += psi;
        bool covered = false;
        for (int u = 0; u < n; ++u) {
          if (g.has_edge(u, i) && a[u] == Action::kPull) covered = true;
        }
        ok = ok && covered;
      }
    }
    if (ok && cost <= budget) out.push_back(a);
  }
  return out;
}

// Expected number of arms in state 1 after one step.
inline double next_step_reward(const netrmab::Cohort& cohort,
                               const netrmab::StateVector& s,
                               const std::vector<Action>& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += cohort.arm(i).prob(static_cast<int>(a[i]), s[i], 1);
  }
  return sum;
}

// Random instance for feasibility fuzzing.
struct FuzzCase {
  netrmab::Cohort cohort;
  netrmab::DiGraph graph;
};

inline FuzzCase fuzz_case(std::uint64_t seed, int max_n = 30) {
  auto rng = netrmab::make_engine(seed, 0xf022);
  const int n = 1 + static_cast<int>(netrmab::uniform_below(rng, static_cast<std::uint64_t>(max_n)));
  const double density = netrmab::uniform01(rng);
  std::vector<netrmab::Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v && netrmab::uniform01(rng) < density * 0.4) edges.emplace_back(u, v);
    }
  }
  const Milli budget = static_cast<Milli>(netrmab::uniform_below(rng, static_cast<std::uint64_t>(n) * 1000 + 1));
  // Half the cases use round message costs, including 0.
  const Milli psi = netrmab::uniform01(rng) < 0.5
                        ? static_cast<Milli>(250 * netrmab::uniform_below(rng, 4))
                        : static_cast<Milli>(netrmab::uniform_below(rng, 1000));
  auto cohort = netrmab::sample_cohort(static_cast<std::size_t>(n), seed, 0.95, budget, psi, 8);
  return {std::move(cohort), netrmab::DiGraph(n, std::move(edges))};
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  while (b) {
    const std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

// Exact fraction num/den in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  Rational(std::int64_t n = 0, std::int64_t d = 1) : num(n), den(d) { reduce(); }
  void reduce() {
    const std::int64_t g = gcd64(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  Rational operator+(const Rational& o) const {
    return Rational(num * o.den + o.num * den, den * o.den);
  }
  bool operator<=(const Rational& o) const { return num * o.den <= o.num * den; }
};

}  // namespace oracle
