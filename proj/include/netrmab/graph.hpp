#pragma once

// Directed graphs, the augmented graph with the dummy vertex, stochastic
// block model generation and arm-to-vertex mappings.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "netrmab/core.hpp"

namespace netrmab {

/// The placeholder vertex added by augmentation. Sorts before every real
/// vertex.
inline constexpr int kDummy = -1;

using Edge = std::pair<int, int>;

/// Immutable simple digraph over [0, n) with sorted out- and in-adjacency.
class DiGraph {
 public:
  DiGraph() = default;
  /// Rejects self-loops, duplicates and endpoints outside [0, n).
  DiGraph(int n, std::vector<Edge> edges);

  int vertex_count() const { return n_; }
  std::size_t edge_count() const { return out_targets_.size(); }

  std::span<const int> out_neighbors(int u) const;
  std::span<const int> in_neighbors(int v) const;
  int out_degree(int u) const {
    return out_offsets_[u + 1] - out_offsets_[u];
  }
  bool has_edge(int u, int v) const;

  /// Position of (u, v) in the out-adjacency array, or -1.
  int edge_position(int u, int v) const;
  int out_offset(int u) const { return out_offsets_[u]; }
  /// For each in-adjacency slot, the matching out-adjacency position.
  std::span<const int> in_edge_positions(int v) const;

  /// All edges in (u, v) lexicographic order.
  std::vector<Edge> edges() const;

  /// "n=<|V|>" header then one "u v" line per edge.
  void write_edge_list(std::ostream& os) const;
  static DiGraph read_edge_list(std::istream& is);

  bool operator==(const DiGraph& o) const {
    return n_ == o.n_ && out_offsets_ == o.out_offsets_ &&
           out_targets_ == o.out_targets_;
  }

 private:
  int n_ = 0;
  std::vector<int> out_offsets_{0};
  std::vector<int> out_targets_;
  std::vector<int> in_offsets_{0};
  std::vector<int> in_sources_;
  std::vector<int> in_positions_;
};

/// Complete digraph on n vertices (both directions of every pair).
DiGraph complete_digraph(int n);

/// G' = (V + {-1}, E + {(u,-1)}) with a mutable live-edge set. The base
/// edge set is never modified; deletions only clear live flags.
class AugmentedGraph {
 public:
  explicit AugmentedGraph(const DiGraph& base);

  const DiGraph& base() const { return *base_; }
  int vertex_count() const { return base_->vertex_count(); }
  std::size_t live_edge_count() const { return live_count_; }
  bool empty() const { return live_count_ == 0; }

  bool is_live(int u, int v) const;
  bool placeholder_live(int u) const { return placeholder_[u] != 0; }

  /// Removes (u, v) when live. Removing an absent edge is a no-op.
  void remove_edge(int u, int v);
  /// Removes every live edge terminating in v.
  void remove_in_edges(int v);

  /// Calls f(v) for every live out-edge (u, v), dummy first then ascending.
  template <typename F>
  void for_each_live_out(int u, F&& f) const {
    if (placeholder_[u]) f(kDummy);
    const auto targets = base_->out_neighbors(u);
    const int off = base_->out_offset(u);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      if (live_[off + k]) f(targets[k]);
    }
  }

  /// Calls f(u, v) for every live edge in (u, v) order.
  template <typename F>
  void for_each_live_edge(F&& f) const {
    for (int u = 0; u < vertex_count(); ++u) {
      for_each_live_out(u, [&](int v) { f(u, v); });
    }
  }

  std::vector<Edge> live_edges() const;

 private:
  const DiGraph* base_;
  std::vector<std::uint8_t> live_;
  std::vector<std::uint8_t> placeholder_;
  std::size_t live_count_ = 0;
};

AugmentedGraph construct_augmented(const DiGraph& g);

/// Augmentation from a raw edge list. Rejects lists already containing the
/// dummy vertex (an augmented graph cannot be augmented again); the
/// returned graph's base is stored in `storage`.
AugmentedGraph construct_augmented(int n, const std::vector<Edge>& edges,
                                   DiGraph& storage);

/// Directed SBM over contiguous blocks: each ordered pair (u, v), u != v,
/// gets an edge independently with p_in inside a block, p_out across.
DiGraph sbm_generate(const std::vector<int>& block_sizes, double p_in,
                     double p_out, std::mt19937_64& rng);

/// Uniformly random subset of the complete digraph with
/// round(fraction * n(n-1)) edges. fraction = 1 yields the complete graph
/// regardless of the generator state.
DiGraph random_edge_subset(int n, double fraction, std::mt19937_64& rng);

/// Bijection between arms and vertices plus the block of every vertex.
/// Blocks occupy contiguous vertex ranges in block order.
class ArmVertexMapping {
 public:
  ArmVertexMapping(std::vector<int> vertex_of_arm, std::vector<int> block_sizes);

  int size() const { return static_cast<int>(vertex_of_arm_.size()); }
  int vertex(int arm) const { return arm == kDummy ? kDummy : vertex_of_arm_[arm]; }
  int arm(int vertex) const { return vertex == kDummy ? kDummy : arm_of_vertex_[vertex]; }
  int block_of_vertex(int vertex) const { return block_of_vertex_[vertex]; }
  const std::vector<int>& block_sizes() const { return block_sizes_; }

  /// Relabels a vertex-space graph into arm space: (i, j) is an arm edge iff
  /// (vertex(i), vertex(j)) is a graph edge.
  DiGraph pull_back(const DiGraph& vertex_graph) const;

 private:
  std::vector<int> vertex_of_arm_;
  std::vector<int> arm_of_vertex_;
  std::vector<int> block_sizes_;
  std::vector<int> block_of_vertex_;
};

/// ceil(n/10) blocks whose sizes differ by at most one, and a uniformly
/// random bijection.
ArmVertexMapping map_random(int n, std::mt19937_64& rng);

struct KMeansResult {
  std::vector<int> labels;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding, run until assignments stop
/// changing. An empty cluster is re-seeded on the point farthest from its
/// current centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::mt19937_64& rng, int max_iterations = 1000);

/// Within-cluster sum of squares for an arbitrary labelling.
double within_cluster_ss(const std::vector<std::vector<double>>& points,
                         const std::vector<int>& labels, int k);

/// Each arm as its flattened 12-entry transition tensor.
std::vector<std::vector<double>> flatten_arms(const Cohort& cohort);

/// k-means over flattened tensors; block sizes are cluster cardinalities and
/// each cluster's arms fill its block in ascending arm id.
ArmVertexMapping map_by_cluster(const Cohort& cohort, int k,
                                std::mt19937_64& rng);

}  // namespace netrmab
