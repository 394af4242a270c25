#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "netrmab/policies.hpp"
#include "netrmab/rng.hpp"
#include "netrmab/sim.hpp"
#include "netrmab/whittle.hpp"
#include "support/oracles.hpp"

using namespace netrmab;

namespace {

constexpr Action N = Action::kNoAct;
constexpr Action M = Action::kMessage;
constexpr Action P = Action::kPull;

int count(const ActionVector& a, Action x) {
  return static_cast<int>(std::count(a.begin(), a.end(), x));
}

StateVector random_states(std::size_t n, std::uint64_t seed) {
  auto rng = make_engine(seed, 0x57);
  StateVector s(n);
  for (auto& x : s) x = static_cast<std::uint8_t>(uniform_below(rng, 2));
  return s;
}

}  // namespace

TEST_SUITE("policies") {

TEST_CASE("feasibility checker") {
  const DiGraph g(3, {{0, 1}});
  const CostModel c(500);
  CHECK_FALSE(feasibility_violation({P, M, N}, g, c, 1500));
  CHECK(feasibility_violation({P, M, N}, g, c, 1499));
  CHECK(feasibility_violation({N, M, N}, g, c, 3000));
  CHECK(feasibility_violation({P, N, M}, g, c, 3000));
  CHECK(feasibility_violation({P, M}, g, c, 3000));
}

TEST_CASE("no-act") {
  CHECK(noact_step(4) == ActionVector(4, N));
}

TEST_CASE("random policies") {
  const DiGraph g = complete_digraph(6);
  const CostModel c(500);
  auto rng = make_engine(1);
  CHECK(random_step(g, 0, c, rng) == ActionVector(6, N));
  CHECK(cw_random_step(g, 0, c, rng) == ActionVector(6, N));

  const DiGraph empty(6, {});
  for (int k = 0; k < 20; ++k) {
    const ActionVector a = random_step(empty, 3000, c, rng);
    CHECK(count(a, P) == 3);
    CHECK(count(a, M) == 0);
  }

  auto r1 = make_engine(9);
  auto r2 = make_engine(9);
  CHECK(random_step(g, 3500, c, r1) == random_step(g, 3500, c, r2));
  CHECK(cw_random_step(g, 3500, c, r1) == cw_random_step(g, 3500, c, r2));
}

TEST_CASE("centrality weighting follows one plus out-degree") {
  // Star: centre 0 points at every leaf. With free messages any first draw
  // is affordable and decides which vertex gets the only pull.
  const int n = 5;
  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) edges.emplace_back(0, v);
  const DiGraph star(n, edges);
  const CostModel free_msg(0);
  auto rng = make_engine(21);
  const int draws = 10000;
  int centre = 0;
  for (int k = 0; k < draws; ++k) {
    const ActionVector a = cw_random_step(star, 1000, free_msg, rng);
    REQUIRE(count(a, P) == 1);
    if (a[0] == P) ++centre;
  }
  // n centre pairs of weight n against n-1 leaf pairs of weight 1.
  const double p = static_cast<double>(n * n) / (n * n + (n - 1));
  const double sd = std::sqrt(draws * p * (1 - p));
  CHECK(std::abs(centre - draws * p) <= 3 * sd);

  // Degree-free graphs are uniform.
  const DiGraph empty(4, {});
  std::vector<int> hits(4, 0);
  for (int k = 0; k < 4000; ++k) {
    const ActionVector a = cw_random_step(empty, 1000, free_msg, rng);
    for (int i = 0; i < 4; ++i) hits[i] += a[i] == P;
  }
  for (int h : hits) CHECK(std::abs(h - 1000) <= 3 * std::sqrt(4000 * 0.25 * 0.75));
}

TEST_CASE("threshold policy") {
  const std::vector<double> w2{0.3, 0.9, 0.1, 0.9};
  CHECK(tw_step(w2, 1500) == ActionVector{N, P, N, N});
  CHECK(tw_step(w2, 2000) == ActionVector{N, P, N, P});
  CHECK(tw_step(w2, 9000) == ActionVector(4, P));
  CHECK(tw_step(w2, 999) == ActionVector(4, N));
}

TEST_CASE("myopic on placeholder-only graphs pulls the largest gains") {
  const Cohort c = sample_cohort(6, 3, 0.95, 2000, 500, 10);
  const StateVector s{0, 1, 0, 1, 1, 0};
  const DiGraph empty(6, {});
  const ActionVector a = myopic_step(empty, 2000, c, s);
  CHECK(count(a, P) == 2);
  std::vector<std::pair<double, int>> gains;
  for (int i = 0; i < 6; ++i) {
    gains.emplace_back(c.arm(i).prob(2, s[i], 1) - c.arm(i).prob(0, s[i], 1), i);
  }
  std::sort(gains.rbegin(), gains.rend());
  CHECK(a[gains[0].second] == P);
  CHECK(a[gains[1].second] == P);
}

TEST_CASE("myopic picks the larger-gain edge") {
  // Arm 0 gains a lot from a pull and arm 1 from a message; arm 2 little.
  const ArmModel big = ArmModel::from_next_desirable(0, {{{0.1, 0.2}, {0.5, 0.6}, {0.9, 0.95}}});
  const ArmModel small = ArmModel::from_next_desirable(2, {{{0.1, 0.2}, {0.15, 0.25}, {0.2, 0.3}}});
  const Cohort c({big, ArmModel(1, big.tensor()), small}, CostModel(500), 0.95, 1500, 10);
  const DiGraph g(3, {{0, 1}, {2, 1}});
  const ActionVector a = myopic_step(g, 1500, c, {0, 0, 0});
  CHECK(a == ActionVector{P, M, N});
}

TEST_CASE("myopic against the brute-force one-step optimum") {
  int exact = 0;
  int total = 0;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto rng = make_engine(seed, 0x3);
    std::vector<Edge> edges;
    for (int u = 0; u < 3; ++u) {
      for (int v = 0; v < 3; ++v) {
        if (u != v && uniform01(rng) < 0.5) edges.emplace_back(u, v);
      }
    }
    const DiGraph g(3, edges);
    const Milli budget = static_cast<Milli>(uniform_below(rng, 3001));
    const Milli psi = static_cast<Milli>(uniform_below(rng, 1000));
    const Cohort c = sample_cohort(3, seed, 0.95, budget, psi, 10);
    const StateVector s = random_states(3, seed);
    double best = -1.0;
    for (const auto& cand : oracle::brute_feasible(g, budget, psi)) {
      best = std::max(best, oracle::next_step_reward(c, s, cand));
    }
    const ActionVector a = myopic_step(g, budget, c, s);
    REQUIRE_FALSE(feasibility_violation(a, g, c.cost(), budget));
    const double got = oracle::next_step_reward(c, s, a);
    CHECK(got <= best + 1e-12);
    const double gap = best - got;
    worst_gap = std::max(worst_gap, gap);
    exact += gap < 1e-12;
    ++total;
  }
  MESSAGE("myopic exact on " << exact << "/" << total << " instances, worst gap " << worst_gap);
  CHECK(exact * 10 >= total * 7);
}

TEST_CASE("feasible joint actions match the exhaustive oracle") {
  const DiGraph single(1, {});
  const auto one = enumerate_feasible(single, 1000, CostModel(500));
  REQUIRE(one.size() == 2);
  CHECK(one[0].actions == ActionVector{N});
  CHECK(one[1].actions == ActionVector{P});

  const DiGraph g(2, {{0, 1}});
  std::vector<ActionVector> got;
  for (const auto& f : enumerate_feasible(g, 1500, CostModel(500))) got.push_back(f.actions);
  std::sort(got.begin(), got.end());
  std::vector<ActionVector> want{{N, N}, {P, N}, {N, P}, {P, M}};
  std::sort(want.begin(), want.end());
  CHECK(got == want);

  const auto zero = enumerate_feasible(complete_digraph(4), 0, CostModel(500));
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].actions == ActionVector(4, N));

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto rng = make_engine(seed, 0x99);
    const int n = 1 + static_cast<int>(uniform_below(rng, 5));
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (u != v && uniform01(rng) < 0.4) edges.emplace_back(u, v);
      }
    }
    const DiGraph h(n, edges);
    const Milli budget = static_cast<Milli>(uniform_below(rng, static_cast<std::uint64_t>(n) * 1000 + 1));
    const Milli psi = static_cast<Milli>(uniform_below(rng, 1000));
    auto oracle_set = oracle::brute_feasible(h, budget, psi);
    std::vector<ActionVector> lib;
    for (const auto& f : enumerate_feasible(h, budget, CostModel(psi))) {
      CHECK(f.cost == total_cost(f.actions, CostModel(psi)));
      lib.push_back(f.actions);
    }
    CHECK(std::is_sorted(lib.begin(), lib.end()));
    std::sort(oracle_set.begin(), oracle_set.end());
    CHECK(lib == oracle_set);
  }
  CHECK_THROWS_AS(enumerate_feasible(DiGraph(11, {}), 1000, CostModel(500)), ResourceGuardError);
}

TEST_CASE("joint MDP transition rows sum to one") {
  const Cohort c = sample_cohort(3, 5, 0.95, 1500, 500, 10);
  const SystemMdp mdp = build_system_mdp(c, complete_digraph(3));
  CHECK(mdp.state_count() == 8);
  for (std::uint32_t s = 0; s < 8; ++s) {
    CHECK(mdp.state_reward(s) == doctest::Approx(__builtin_popcount(s)));
    for (std::size_t j = 0; j < mdp.actions.size(); ++j) {
      double sum = 0;
      for (std::uint32_t x = 0; x < 8; ++x) sum += mdp.transition(s, j, x);
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("exact solver on one arm matches the analytic always-pull value") {
  const Cohort c = sample_cohort(1, 17, 0.9, 1000, 500, 10);
  const SystemMdp mdp = build_system_mdp(c, DiGraph(1, {}));
  const ViSolution sol = vi_solve(mdp, {1e-10, 100000, std::size_t{1} << 26});
  const WhittleTable t = build_table(c);
  for (int s = 0; s < 2; ++s) {
    const bool pulls = mdp.actions[sol.policy[s]].actions[0] == P;
    CHECK(pulls == (t.index(0, s, P) > 0));
  }
  // (I - beta P^2) v = r
  const auto v = oracle::policy_value(c.arm(0), 2, {true, true}, 0.0, 0.9);
  CHECK(sol.value[0] == doctest::Approx(v[0]).epsilon(1e-8));
  CHECK(sol.value[1] == doctest::Approx(v[1]).epsilon(1e-8));
  const double bound = std::ceil(std::log(1e-10 * (1 - 0.9) / (1.0 / (1 - 0.9))) / std::log(0.9));
  CHECK(sol.sweeps <= bound + 1);
}

TEST_CASE("exact solver with no budget is the passive value") {
  const Cohort c = sample_cohort(2, 4, 0.95, 0, 500, 10);
  const SystemMdp mdp = build_system_mdp(c, complete_digraph(2));
  REQUIRE(mdp.actions.size() == 1);
  const ViSolution sol = vi_solve(mdp, {1e-10, 100000, std::size_t{1} << 26});
  const auto v0 = oracle::policy_value(c.arm(0), 2, {false, false}, 0.0, 0.95);
  const auto v1 = oracle::policy_value(c.arm(1), 2, {false, false}, 0.0, 0.95);
  // Independent arms: values add.
  for (std::uint32_t s = 0; s < 4; ++s) {
    CHECK(sol.value[s] == doctest::Approx(v0[s & 1] + v1[(s >> 1) & 1]).epsilon(1e-8));
  }
}

TEST_CASE("exact solver guards its table size") {
  const Cohort c = sample_cohort(4, 4, 0.95, 2000, 500, 10);
  const SystemMdp mdp = build_system_mdp(c, complete_digraph(4));
  CHECK_THROWS_AS(vi_solve(mdp, {1e-6, 1000, 16}), ResourceGuardError);
}

TEST_CASE("exact policy dominates heuristics in discounted return") {
  // Discounted returns from a fixed start, simulated long enough that the
  // truncated tail is below 1e-6.
  const double beta = 0.95;
  const int horizon = 400;
  for (std::uint64_t inst = 0; inst < 3; ++inst) {
    const int n = 2 + static_cast<int>(inst);
    const Cohort c = sample_cohort(static_cast<std::size_t>(n), 100 + inst, beta, 1500, 500, horizon);
    const DiGraph g = inst == 0 ? DiGraph(n, {}) : complete_digraph(n);
    const WhittleTable table = build_table(c);
    const SystemMdp mdp = build_system_mdp(c, g);
    const ViSolution sol = vi_solve(mdp);
    for (PolicyKind kind : {PolicyKind::kTw, PolicyKind::kGreta, PolicyKind::kMyopic}) {
      std::vector<double> returns;
      std::uint32_t start = 0;
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        PolicySpec spec;
        spec.kind = kind;
        auto pol = make_policy(spec, c, g);
        const EpisodeResult r = run_episode(c, g, table, *pol, seed, {InitialStates::kAllZero, true});
        double ret = 0;
        double disc = 1;
        for (const auto& s : r.states) {
          ret += disc * std::count(s.begin(), s.end(), 1);
          disc *= beta;
        }
        returns.push_back(ret);
      }
      const Summary sum = summarize(returns);
      CHECK(sum.mean <= sol.value[start] + sum.ci95);
    }
  }
}

TEST_CASE("policy names round trip") {
  for (const char* name : {"noact", "random", "cwrandom", "myopic", "tw", "greta", "vi"}) {
    CHECK(policy_name(parse_policy_kind(name)) == name);
  }
  CHECK_THROWS(parse_policy_kind("oracle"));
}

TEST_CASE("every policy is feasible on fuzzed instances") {
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    const auto fc = oracle::fuzz_case(seed, 9);
    const WhittleTable table = build_table(fc.cohort);
    for (PolicyKind kind : {PolicyKind::kNoAct, PolicyKind::kRandom, PolicyKind::kCwRandom,
                            PolicyKind::kMyopic, PolicyKind::kTw, PolicyKind::kGreta}) {
      PolicySpec spec;
      spec.kind = kind;
      auto pol = make_policy(spec, fc.cohort, fc.graph);
      try {
        run_episode(fc.cohort, fc.graph, table, *pol, seed);
      } catch (const FeasibilityViolation&) {
        ++violations;
      }
    }
  }
  CHECK(violations == 0);
}

}  // TEST_SUITE
