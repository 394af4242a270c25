#pragma once

// Graph-aware Whittle heuristic: per-timestep construction of a budget- and
// neighborhood-feasible action vector by comparing, chunk by chunk, the best
// pull-only allocation against the best pull-and-message edge allocation.

#include <iosfwd>
#include <utility>
#include <vector>

#include "netrmab/core.hpp"
#include "netrmab/graph.hpp"

namespace netrmab {

/// Vertex upgrades applied in order. The dummy vertex may appear as a message
/// target; it is accepted and ignored.
using Upgrades = std::vector<std::pair<int, Action>>;

/// One vertex's index with the dummy vertex mapped to 0.
inline double index_at(const std::vector<double>& w, int v) {
  return v == kDummy ? 0.0 : w[static_cast<std::size_t>(v)];
}

/// False for edges from an already pulled source into the dummy or an acted
/// target: selecting them would cost nothing and change nothing.
inline bool changes_assignment(int u, int v, const ActionVector& a) {
  if (a[static_cast<std::size_t>(u)] != Action::kPull) return true;
  return v != kDummy && a[static_cast<std::size_t>(v)] == Action::kNoAct;
}

/// Cost of pulling u and messaging v on top of the current assignment.
Milli get_cost(int u, int v, const ActionVector& a, const CostModel& cost);

struct ChunkResult {
  ActionVector candidate;     // full assignment after the chunk's upgrades
  double nu = 0.0;            // cumulative subsidy
  std::vector<Edge> consumed; // selected (pull, message) edges
  int iterations = 0;         // selection rounds
};

/// Top-b (b <= 2 in practice) not-yet-pulled vertices by pull index.
ChunkResult pull_only(const AugmentedGraph& g, int b,
                      const std::vector<double>& w2, const ActionVector& a);

/// Edge values for source u over its unacted out-neighbors `targets` (the
/// dummy included), in the order given. The best-message neighbor absorbs
/// the top n_msgs message values.
std::vector<double> edge_indices(int u, const std::vector<int>& targets,
                                 Milli b, Milli psi,
                                 const std::vector<double>& w1,
                                 const std::vector<double>& w2);

/// Greedy pull-and-message selection on a local copy of `g` with chunk
/// budget b.
ChunkResult msg_pull(const AugmentedGraph& g, Milli b, const CostModel& cost,
                     const ActionVector& a, const std::vector<double>& w1,
                     const std::vector<double>& w2);

/// Applies upgrades to `a` and returns the remaining budget. Costs are
/// charged against each vertex's action before its upgrade. With free
/// messages, a pull also messages every unacted live out-neighbor. Throws
/// std::logic_error when the budget would go negative.
Milli mod_acts(const AugmentedGraph& g, const CostModel& cost,
               const Upgrades& upgrades, ActionVector& a, Milli budget);

/// Removes in-edges and the placeholder of every pulled vertex in `chosen`,
/// then every edge in `consumed`.
void update_graph(AugmentedGraph& g, const Upgrades& chosen,
                  const std::vector<Edge>& consumed);

/// True when some live edge would still change the assignment and costs at
/// most b.
bool any_affordable(const AugmentedGraph& g, const ActionVector& a,
                    const CostModel& cost, Milli b);

struct GretaChunk {
  int index = 0;
  Milli chunk_budget = 0;
  std::size_t live_edges = 0;  // |E'| when the chunk started
  double nu_pull_only = 0.0;
  double nu_msg_pull = 0.0;
  bool msg_pull_committed = false;
  int mp_iterations = 0;
  Upgrades committed;
};

struct GretaTrace {
  std::vector<GretaChunk> chunks;
};

/// One timestep of the heuristic on arm-space graph `g` with indices already
/// resolved at the current states.
ActionVector greta_step(const DiGraph& g, Milli budget, const CostModel& cost,
                        const std::vector<double>& w1,
                        const std::vector<double>& w2,
                        GretaTrace* trace = nullptr);

/// Columns t,vertex,action,chunk_index,committed_nu,branch.
void write_trace_header(std::ostream& os);
void write_trace_rows(std::ostream& os, int t, const GretaTrace& trace);

}  // namespace netrmab
