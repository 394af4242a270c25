#include "netrmab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netrmab/greta.hpp"
#include "netrmab/rng.hpp"

namespace netrmab {

std::optional<std::string> feasibility_violation(const ActionVector& a,
                                                 const DiGraph& g,
                                                 const CostModel& cost,
                                                 Milli budget) {
  if (a.size() != static_cast<std::size_t>(g.vertex_count())) {
    return "assignment covers " + std::to_string(a.size()) + " of " +
           std::to_string(g.vertex_count()) + " arms";
  }
  const Milli spent = total_cost(a, cost);
  if (spent > budget) {
    return "cost " + std::to_string(spent) + " exceeds budget " +
           std::to_string(budget) + " (milli)";
  }
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (a[v] != Action::kMessage) continue;
    const auto in = g.in_neighbors(v);
    const bool covered = std::any_of(in.begin(), in.end(), [&](int u) {
      return a[u] == Action::kPull;
    });
    if (!covered) {
      return "arm " + std::to_string(v) + " is messaged without a pulled in-neighbor";
    }
  }
  return std::nullopt;
}

ActionVector noact_step(std::size_t n) {
  return ActionVector(n, Action::kNoAct);
}

namespace {

// Pull u, message v and prune the graph as the heuristic does after a pull.
void apply_edge(AugmentedGraph& live, ActionVector& a, int u, int v) {
  a[u] = Action::kPull;
  if (v != kDummy && a[v] == Action::kNoAct) a[v] = Action::kMessage;
  live.remove_in_edges(u);
  live.remove_edge(u, kDummy);
  live.remove_edge(u, v);
}

ActionVector random_edges(const DiGraph& g, Milli budget, const CostModel& cost,
                          std::mt19937_64& rng, bool weighted) {
  ActionVector a(static_cast<std::size_t>(g.vertex_count()), Action::kNoAct);
  AugmentedGraph live(g);
  std::vector<Edge> pool;
  std::vector<double> weight;
  for (;;) {
    pool.clear();
    weight.clear();
    live.for_each_live_edge([&](int u, int v) {
      if (!changes_assignment(u, v, a) || get_cost(u, v, a, cost) > budget) {
        return;
      }
      pool.emplace_back(u, v);
      if (weighted) weight.push_back(1.0 + g.out_degree(u));
    });
    if (pool.empty()) break;

    std::size_t pick = 0;
    if (weighted) {
      const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      double target = uniform01(rng) * total;
      pick = pool.size() - 1;
      for (std::size_t k = 0; k < pool.size(); ++k) {
        target -= weight[k];
        if (target < 0.0) {
          pick = k;
          break;
        }
      }
    } else {
      pick = uniform_below(rng, pool.size());
    }
    const auto [u, v] = pool[pick];
    budget -= get_cost(u, v, a, cost);
    apply_edge(live, a, u, v);
  }
  return a;
}

}  // namespace

ActionVector random_step(const DiGraph& g, Milli budget, const CostModel& cost,
                         std::mt19937_64& rng) {
  return random_edges(g, budget, cost, rng, false);
}

ActionVector cw_random_step(const DiGraph& g, Milli budget,
                            const CostModel& cost, std::mt19937_64& rng) {
  return random_edges(g, budget, cost, rng, true);
}

ActionVector myopic_step(const DiGraph& g, Milli budget, const Cohort& cohort,
                         const StateVector& states, bool raw) {
  const CostModel& cost = cohort.cost();
  ActionVector a(static_cast<std::size_t>(g.vertex_count()), Action::kNoAct);
  AugmentedGraph live(g);
  auto p1 = [&](int arm, Action act) {
    return cohort.arm(arm).prob(act, states[arm], 1);
  };
  auto score = [&](int u, int v) {
    double s = 0.0;
    if (a[u] != Action::kPull) {
      s += raw ? p1(u, Action::kPull) : p1(u, Action::kPull) - p1(u, a[u]);
    }
    if (v != kDummy && a[v] == Action::kNoAct) {
      s += raw ? p1(v, Action::kMessage)
               : p1(v, Action::kMessage) - p1(v, Action::kNoAct);
    }
    return s;
  };
  for (;;) {
    bool found = false;
    double best_score = 0.0;
    Edge best{0, 0};
    live.for_each_live_edge([&](int u, int v) {
      if (!changes_assignment(u, v, a) || get_cost(u, v, a, cost) > budget) {
        return;
      }
      const double s = score(u, v);
      if (!found || s > best_score) {
        found = true;
        best_score = s;
        best = {u, v};
      }
    });
    if (!found) break;
    budget -= get_cost(best.first, best.second, a, cost);
    apply_edge(live, a, best.first, best.second);
  }
  return a;
}

ActionVector tw_step(const std::vector<double>& w2, Milli budget) {
  ActionVector a(w2.size(), Action::kNoAct);
  const auto k = std::min<std::size_t>(
      static_cast<std::size_t>(std::max<Milli>(budget, 0) / kMilliPerUnit),
      w2.size());
  std::vector<int> order(w2.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k),
                    order.end(), [&](int x, int y) {
                      return w2[x] != w2[y] ? w2[x] > w2[y] : x < y;
                    });
  for (std::size_t i = 0; i < k; ++i) a[order[i]] = Action::kPull;
  return a;
}

std::vector<FeasibleJointAction> enumerate_feasible(const DiGraph& g,
                                                    Milli budget,
                                                    const CostModel& cost) {
  const int n = g.vertex_count();
  if (n > kMaxEnumerationArms) {
    throw ResourceGuardError("joint-action enumeration is limited to " +
                             std::to_string(kMaxEnumerationArms) + " arms, got " +
                             std::to_string(n));
  }
  std::vector<FeasibleJointAction> out;
  ActionVector a(static_cast<std::size_t>(n), Action::kNoAct);
  auto recurse = [&](auto&& self, int i, Milli spent) -> void {
    if (i == n) {
      if (!feasibility_violation(a, g, cost, budget)) out.push_back({a, spent});
      return;
    }
    for (int d = 0; d < kNumActions; ++d) {
      const Action act = action_from_index(d);
      const Milli c = spent + cost.cost(act);
      if (c > budget) continue;
      a[i] = act;
      self(self, i + 1, c);
    }
    a[i] = Action::kNoAct;
  };
  recurse(recurse, 0, 0);
  return out;
}

double SystemMdp::state_reward(std::uint32_t mask) const {
  double r = 0.0;
  for (std::size_t i = 0; i < arms.size(); ++i) r += reward((mask >> i) & 1U);
  return r;
}

double SystemMdp::transition(std::uint32_t from, std::size_t action,
                             std::uint32_t to) const {
  double p = 1.0;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    p *= arms[i].prob(actions[action].actions[i], (from >> i) & 1U,
                      (to >> i) & 1U);
  }
  return p;
}

SystemMdp build_system_mdp(const Cohort& cohort, const DiGraph& g) {
  if (static_cast<int>(cohort.size()) != g.vertex_count()) {
    throw std::invalid_argument("graph and cohort sizes differ");
  }
  SystemMdp mdp;
  mdp.arms = cohort.arms();
  mdp.actions = enumerate_feasible(g, cohort.budget(), cohort.cost());
  mdp.beta = cohort.beta();
  return mdp;
}

ViSolution vi_solve(const SystemMdp& mdp, const ViOptions& options) {
  const std::size_t n = mdp.arm_count();
  if (n > static_cast<std::size_t>(kMaxEnumerationArms)) {
    throw ResourceGuardError("joint MDP is limited to " +
                             std::to_string(kMaxEnumerationArms) + " arms");
  }
  const std::size_t states = mdp.state_count();
  const std::size_t acts = mdp.actions.size();
  if (acts == 0) throw std::invalid_argument("no feasible joint actions");
  if (states * acts > options.max_state_actions) {
    throw ResourceGuardError("state-action table of " +
                             std::to_string(states * acts) +
                             " entries exceeds the limit of " +
                             std::to_string(options.max_state_actions));
  }
  if (!(mdp.beta > 0.0 && mdp.beta < 1.0)) {
    throw std::invalid_argument("discount must lie in (0,1)");
  }

  // Consecutive actions in lexicographic order share a prefix; contracting
  // arm 0 first lets each action reuse the partial expectations of the
  // previous one down to the shared depth.
  std::vector<std::size_t> shared(acts, 0);
  for (std::size_t j = 1; j < acts; ++j) {
    std::size_t k = 0;
    while (k < n && mdp.actions[j].actions[k] == mdp.actions[j - 1].actions[k]) ++k;
    shared[j] = k;
  }
  // prob[i][a][s][next]
  std::vector<std::array<std::array<std::array<double, 2>, 2>, 3>> prob(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < kNumActions; ++a) {
      for (int s = 0; s < kNumStates; ++s) {
        for (int x = 0; x < kNumStates; ++x) prob[i][a][s][x] = mdp.arms[i].prob(a, s, x);
      }
    }
  }
  std::vector<double> reward(states);
  for (std::size_t s = 0; s < states; ++s) {
    reward[s] = mdp.state_reward(static_cast<std::uint32_t>(s));
  }
  std::vector<std::vector<double>> buf(n + 1);
  for (std::size_t k = 1; k <= n; ++k) buf[k].resize(std::size_t{1} << (n - k));

  // Calls visit(j, q) for every action j in order at state s under V.
  auto sweep_state = [&](std::size_t s, const std::vector<double>& v,
                         auto&& visit) {
    buf[0] = v;
    for (std::size_t j = 0; j < acts; ++j) {
      const auto& act = mdp.actions[j].actions;
      for (std::size_t k = (j == 0 ? 0 : shared[j]); k < n; ++k) {
        const auto& p = prob[k][to_index(act[k])][(s >> k) & 1U];
        const auto& in = buf[k];
        auto& out = buf[k + 1];
        for (std::size_t r = 0; r < out.size(); ++r) {
          out[r] = p[0] * in[2 * r] + p[1] * in[2 * r + 1];
        }
      }
      visit(j, reward[s] + mdp.beta * buf[n][0]);
    }
  };

  ViSolution sol;
  sol.value.assign(states, 0.0);
  std::vector<double> next(states);
  for (;;) {
    if (++sol.sweeps > options.max_sweeps) {
      throw std::runtime_error("value iteration exceeded the sweep limit");
    }
    double change = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      double best = -1.0;
      sweep_state(s, sol.value, [&](std::size_t, double q) { best = std::max(best, q); });
      next[s] = best;
      change = std::max(change, std::abs(best - sol.value[s]));
    }
    sol.value.swap(next);
    if (change < options.tolerance) break;
  }

  sol.policy.assign(states, 0);
  for (std::size_t s = 0; s < states; ++s) {
    double best = 0.0;
    sweep_state(s, sol.value, [&](std::size_t j, double q) {
      if (j == 0 || q > best) {
        best = q;
        sol.policy[s] = j;
      }
    });
  }
  return sol;
}

std::uint32_t state_mask(const StateVector& states) {
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i]) mask |= 1U << i;
  }
  return mask;
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "noact") return PolicyKind::kNoAct;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "cwrandom") return PolicyKind::kCwRandom;
  if (name == "myopic") return PolicyKind::kMyopic;
  if (name == "tw") return PolicyKind::kTw;
  if (name == "greta") return PolicyKind::kGreta;
  if (name == "vi") return PolicyKind::kVi;
  throw std::invalid_argument("unknown policy '" + name + "'");
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kNoAct: return "noact";
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kCwRandom: return "cwrandom";
    case PolicyKind::kMyopic: return "myopic";
    case PolicyKind::kTw: return "tw";
    case PolicyKind::kGreta: return "greta";
    case PolicyKind::kVi: return "vi";
  }
  return "unknown";
}

namespace {

class NoActPolicy final : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kNoAct; }
  ActionVector act(const StepContext& ctx) override {
    return noact_step(ctx.states.size());
  }
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(bool weighted) : weighted_(weighted) {}
  PolicyKind kind() const override {
    return weighted_ ? PolicyKind::kCwRandom : PolicyKind::kRandom;
  }
  void begin_episode(std::uint64_t seed) override {
    rng_ = make_engine(seed, weighted_ ? 0xc3a7d : 0x7a4d0);
  }
  ActionVector act(const StepContext& ctx) override {
    return weighted_ ? cw_random_step(ctx.graph, ctx.cohort.budget(),
                                      ctx.cohort.cost(), rng_)
                     : random_step(ctx.graph, ctx.cohort.budget(),
                                   ctx.cohort.cost(), rng_);
  }

 private:
  bool weighted_;
  std::mt19937_64 rng_{make_engine(0)};
};

class MyopicPolicy final : public Policy {
 public:
  explicit MyopicPolicy(bool raw) : raw_(raw) {}
  PolicyKind kind() const override { return PolicyKind::kMyopic; }
  ActionVector act(const StepContext& ctx) override {
    return myopic_step(ctx.graph, ctx.cohort.budget(), ctx.cohort, ctx.states,
                       raw_);
  }

 private:
  bool raw_;
};

class TwPolicy final : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kTw; }
  ActionVector act(const StepContext& ctx) override {
    return tw_step(ctx.table.resolve(ctx.states, Action::kPull),
                   ctx.cohort.budget());
  }
};

class GretaPolicy final : public Policy {
 public:
  explicit GretaPolicy(std::ostream* trace) : trace_(trace) {}
  PolicyKind kind() const override { return PolicyKind::kGreta; }
  ActionVector act(const StepContext& ctx) override {
    GretaTrace trace;
    ActionVector a = greta_step(
        ctx.graph, ctx.cohort.budget(), ctx.cohort.cost(),
        ctx.table.resolve(ctx.states, Action::kMessage),
        ctx.table.resolve(ctx.states, Action::kPull), trace_ ? &trace : nullptr);
    if (trace_) write_trace_rows(*trace_, ctx.t, trace);
    return a;
  }

 private:
  std::ostream* trace_;
};

class ViPolicy final : public Policy {
 public:
  ViPolicy(const Cohort& cohort, const DiGraph& graph, const ViOptions& options)
      : mdp_(build_system_mdp(cohort, graph)), solution_(vi_solve(mdp_, options)) {}
  PolicyKind kind() const override { return PolicyKind::kVi; }
  ActionVector act(const StepContext& ctx) override {
    return mdp_.actions[solution_.policy[state_mask(ctx.states)]].actions;
  }

 private:
  SystemMdp mdp_;
  ViSolution solution_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Cohort& cohort,
                                    const DiGraph& graph) {
  switch (spec.kind) {
    case PolicyKind::kNoAct: return std::make_unique<NoActPolicy>();
    case PolicyKind::kRandom: return std::make_unique<RandomPolicy>(false);
    case PolicyKind::kCwRandom: return std::make_unique<RandomPolicy>(true);
    case PolicyKind::kMyopic: return std::make_unique<MyopicPolicy>(spec.myopic_raw);
    case PolicyKind::kTw: return std::make_unique<TwPolicy>();
    case PolicyKind::kGreta: return std::make_unique<GretaPolicy>(spec.greta_trace);
    case PolicyKind::kVi:
      return std::make_unique<ViPolicy>(cohort, graph, spec.vi);
  }
  throw std::invalid_argument("unknown policy kind");
}

}  // namespace netrmab
