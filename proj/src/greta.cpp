#include "netrmab/greta.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace netrmab {

namespace {

bool unacted(const ActionVector& a, int v) {
  // The dummy's own action is never tracked, so it stays a valid message
  // target for every source.
  return v == kDummy || a[static_cast<std::size_t>(v)] == Action::kNoAct;
}

Upgrades diff(const ActionVector& from, const ActionVector& to) {
  Upgrades out;
  for (std::size_t v = 0; v < from.size(); ++v) {
    if (from[v] != to[v]) out.emplace_back(static_cast<int>(v), to[v]);
  }
  return out;
}

}  // namespace

Milli get_cost(int u, int v, const ActionVector& a, const CostModel& cost) {
  const Action au = a[static_cast<std::size_t>(u)];
  Milli cu = 0;
  if (au == Action::kNoAct) cu = cost.pull();
  if (au == Action::kMessage) cu = cost.pull() - cost.message();
  Milli cv = cost.message();
  if (v == kDummy || a[static_cast<std::size_t>(v)] == Action::kMessage) cv = 0;
  return cu + cv;
}

ChunkResult pull_only(const AugmentedGraph& g, int b,
                      const std::vector<double>& w2, const ActionVector& a) {
  ChunkResult res;
  res.candidate = a;
  std::vector<int> pool;
  for (int u = 0; u < g.vertex_count(); ++u) {
    if (g.placeholder_live(u)) pool.push_back(u);
  }
  const auto take = static_cast<std::size_t>(
      std::clamp(b, 0, static_cast<int>(pool.size())));
  std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(take),
                    pool.end(), [&](int x, int y) {
                      return w2[x] != w2[y] ? w2[x] > w2[y] : x < y;
                    });
  for (std::size_t i = 0; i < take; ++i) {
    res.candidate[pool[i]] = Action::kPull;
    res.nu += w2[pool[i]];
  }
  return res;
}

namespace {

// Fills f for the given targets; `scratch` is reused across calls.
void fill_edge_indices(int u, const std::vector<int>& targets, Milli b,
                       Milli psi, const std::vector<double>& w1,
                       const std::vector<double>& w2, std::vector<double>& f,
                       std::vector<double>& scratch) {
  f.resize(targets.size());
  if (targets.empty()) return;
  std::size_t n_msgs = targets.size();
  if (psi > 0) {
    n_msgs = std::min(n_msgs, static_cast<std::size_t>(std::max<Milli>(b, 0) / psi));
  }
  scratch.resize(targets.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    scratch[k] = index_at(w1, targets[k]);
    if (scratch[k] > scratch[best]) best = k;
  }
  const double pull = w2[static_cast<std::size_t>(u)];
  for (std::size_t k = 0; k < targets.size(); ++k) f[k] = pull + scratch[k];

  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<long>(n_msgs),
                    scratch.end(), std::greater<>());
  double top = 0.0;
  for (std::size_t k = 0; k < n_msgs; ++k) top += scratch[k];
  f[best] = pull + top;
}

}  // namespace

std::vector<double> edge_indices(int u, const std::vector<int>& targets,
                                 Milli b, Milli psi,
                                 const std::vector<double>& w1,
                                 const std::vector<double>& w2) {
  std::vector<double> f;
  std::vector<double> scratch;
  fill_edge_indices(u, targets, b, psi, w1, w2, f, scratch);
  return f;
}

ChunkResult msg_pull(const AugmentedGraph& g, Milli b, const CostModel& cost,
                     const ActionVector& a, const std::vector<double>& w1,
                     const std::vector<double>& w2) {
  ChunkResult res;
  res.candidate = a;
  AugmentedGraph local = g;
  std::vector<int> targets;
  std::vector<double> f;
  std::vector<double> scratch;
  for (;;) {
    bool found = false;
    double best_f = 0.0;
    Edge best{0, 0};
    for (int u = 0; u < local.vertex_count(); ++u) {
      targets.clear();
      local.for_each_live_out(u, [&](int v) {
        if (unacted(res.candidate, v)) targets.push_back(v);
      });
      if (targets.empty()) continue;
      fill_edge_indices(u, targets, b, cost.psi(), w1, w2, f, scratch);
      // Sources ascend and targets ascend with the dummy first, so a strict
      // comparison keeps the smallest (u, v) among equal values.
      for (std::size_t k = 0; k < targets.size(); ++k) {
        if (found && !(f[k] > best_f)) continue;
        if (get_cost(u, targets[k], res.candidate, cost) > b) continue;
        found = true;
        best_f = f[k];
        best = {u, targets[k]};
      }
    }
    if (!found) break;
    const Upgrades h{{best.first, Action::kPull}, {best.second, Action::kMessage}};
    b = mod_acts(local, cost, h, res.candidate, b);
    update_graph(local, h, {best});
    res.nu += best_f;
    res.consumed.push_back(best);
    ++res.iterations;
  }
  return res;
}

Milli mod_acts(const AugmentedGraph& g, const CostModel& cost,
               const Upgrades& upgrades, ActionVector& a, Milli budget) {
  for (const auto& [v, act] : upgrades) {
    if (v == kDummy) continue;
    Action& slot = a[static_cast<std::size_t>(v)];
    const Action prev = slot;
    if (act == Action::kMessage) {
      if (prev == Action::kNoAct) budget -= cost.message();
      slot = std::max(prev, Action::kMessage);
    } else if (act == Action::kPull) {
      if (prev == Action::kNoAct) budget -= cost.pull();
      if (prev == Action::kMessage) budget -= cost.pull() - cost.message();
      slot = Action::kPull;
      if (cost.psi() == 0) {
        g.for_each_live_out(v, [&](int w) {
          if (w != kDummy && a[w] == Action::kNoAct) a[w] = Action::kMessage;
        });
      }
    }
    if (budget < 0) {
      throw std::logic_error("upgrade of vertex " + std::to_string(v) +
                             " exceeds the remaining budget");
    }
  }
  return budget;
}

void update_graph(AugmentedGraph& g, const Upgrades& chosen,
                  const std::vector<Edge>& consumed) {
  for (const auto& [v, act] : chosen) {
    if (act != Action::kPull || v == kDummy) continue;
    g.remove_in_edges(v);
    g.remove_edge(v, kDummy);
  }
  for (const auto& [u, v] : consumed) g.remove_edge(u, v);
}

bool any_affordable(const AugmentedGraph& g, const ActionVector& a,
                    const CostModel& cost, Milli b) {
  for (int u = 0; u < g.vertex_count(); ++u) {
    bool hit = false;
    g.for_each_live_out(u, [&](int v) {
      if (hit || !changes_assignment(u, v, a)) return;
      if (get_cost(u, v, a, cost) <= b) hit = true;
    });
    if (hit) return true;
  }
  return false;
}

ActionVector greta_step(const DiGraph& g, Milli budget, const CostModel& cost,
                        const std::vector<double>& w1,
                        const std::vector<double>& w2, GretaTrace* trace) {
  const auto n = static_cast<std::size_t>(g.vertex_count());
  if (w1.size() != n || w2.size() != n) {
    throw std::invalid_argument("index vectors do not match the graph size");
  }
  if (budget < 0) throw std::invalid_argument("budget must be >= 0");
  ActionVector a(n, Action::kNoAct);
  AugmentedGraph live(g);
  Milli remaining = budget;
  int chunk_index = 0;
  while (!live.empty() && any_affordable(live, a, cost, remaining)) {
    const Milli b = std::min<Milli>(remaining, 2 * kMilliPerUnit);
    ChunkResult po = pull_only(live, static_cast<int>(b / kMilliPerUnit), w2, a);
    ChunkResult mp = msg_pull(live, b, cost, a, w1, w2);
    const bool use_mp = !(po.nu >= mp.nu);
    const ChunkResult& chosen = use_mp ? mp : po;
    Upgrades up = diff(a, chosen.candidate);
    if (up.empty()) break;

    if (trace) {
      GretaChunk c;
      c.index = chunk_index;
      c.chunk_budget = b;
      c.live_edges = live.live_edge_count();
      c.nu_pull_only = po.nu;
      c.nu_msg_pull = mp.nu;
      c.msg_pull_committed = use_mp;
      c.mp_iterations = mp.iterations;
      c.committed = up;
      trace->chunks.push_back(std::move(c));
    }
    remaining = mod_acts(live, cost, up, a, remaining);
    update_graph(live, up, use_mp ? mp.consumed : std::vector<Edge>{});
    ++chunk_index;
  }
  return a;
}

void write_trace_header(std::ostream& os) {
  os << "t,vertex,action,chunk_index,committed_nu,branch\n";
}

void write_trace_rows(std::ostream& os, int t, const GretaTrace& trace) {
  char buf[160];
  for (const auto& c : trace.chunks) {
    const double nu = c.msg_pull_committed ? c.nu_msg_pull : c.nu_pull_only;
    for (const auto& [v, act] : c.committed) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.6f,%s\n", t, v,
                    to_index(act), c.index, nu,
                    c.msg_pull_committed ? "msg_pull" : "pull_only");
      os << buf;
    }
  }
}

}  // namespace netrmab
