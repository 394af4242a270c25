#include "netrmab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "netrmab/rng.hpp"

namespace netrmab {

DiGraph::DiGraph(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 0) throw std::invalid_argument("vertex count must be >= 0");
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw std::invalid_argument("edge (" + std::to_string(u) + "," +
                                  std::to_string(v) + ") outside [0," +
                                  std::to_string(n) + ")");
    }
    if (u == v) {
      throw std::invalid_argument("self-loop at " + std::to_string(u));
    }
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("duplicate edge");
  }

  out_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  in_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [u, v] : edges) {
    ++out_offsets_[u + 1];
    ++in_offsets_[v + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(),
                   out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

  out_targets_.resize(edges.size());
  in_sources_.resize(edges.size());
  in_positions_.resize(edges.size());
  std::vector<int> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  // Edges are sorted by (u, v), so out slots fill in order and in slots
  // receive ascending sources.
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [u, v] = edges[k];
    out_targets_[k] = v;
    const int slot = in_fill[v]++;
    in_sources_[slot] = u;
    in_positions_[slot] = static_cast<int>(k);
  }
}

std::span<const int> DiGraph::out_neighbors(int u) const {
  return {out_targets_.data() + out_offsets_[u],
          static_cast<std::size_t>(out_offsets_[u + 1] - out_offsets_[u])};
}

std::span<const int> DiGraph::in_neighbors(int v) const {
  return {in_sources_.data() + in_offsets_[v],
          static_cast<std::size_t>(in_offsets_[v + 1] - in_offsets_[v])};
}

std::span<const int> DiGraph::in_edge_positions(int v) const {
  return {in_positions_.data() + in_offsets_[v],
          static_cast<std::size_t>(in_offsets_[v + 1] - in_offsets_[v])};
}

int DiGraph::edge_position(int u, int v) const {
  if (u < 0 || u >= n_) return -1;
  const auto nb = out_neighbors(u);
  const auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return -1;
  return out_offsets_[u] + static_cast<int>(it - nb.begin());
}

bool DiGraph::has_edge(int u, int v) const { return edge_position(u, v) >= 0; }

std::vector<Edge> DiGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(out_targets_.size());
  for (int u = 0; u < n_; ++u) {
    for (int v : out_neighbors(u)) out.emplace_back(u, v);
  }
  return out;
}

void DiGraph::write_edge_list(std::ostream& os) const {
  os << "n=" << n_ << '\n';
  for (int u = 0; u < n_; ++u) {
    for (int v : out_neighbors(u)) os << u << ' ' << v << '\n';
  }
}

DiGraph DiGraph::read_edge_list(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("n=", 0) != 0) {
    throw std::invalid_argument("edge list must start with 'n=<count>'");
  }
  const int n = std::stoi(line.substr(2));
  std::vector<Edge> edges;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int u = 0;
    int v = 0;
    if (!(ls >> u >> v)) {
      throw std::invalid_argument("malformed edge line: " + line);
    }
    edges.emplace_back(u, v);
  }
  return DiGraph(n, std::move(edges));
}

DiGraph complete_digraph(int n) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0));
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v) edges.emplace_back(u, v);
    }
  }
  return DiGraph(n, std::move(edges));
}

AugmentedGraph::AugmentedGraph(const DiGraph& base)
    : base_(&base),
      live_(base.edge_count(), 1),
      placeholder_(static_cast<std::size_t>(base.vertex_count()), 1),
      live_count_(base.edge_count() +
                  static_cast<std::size_t>(base.vertex_count())) {}

bool AugmentedGraph::is_live(int u, int v) const {
  if (u < 0 || u >= vertex_count()) return false;
  if (v == kDummy) return placeholder_[u] != 0;
  const int pos = base_->edge_position(u, v);
  return pos >= 0 && live_[pos] != 0;
}

void AugmentedGraph::remove_edge(int u, int v) {
  if (u < 0 || u >= vertex_count()) return;
  if (v == kDummy) {
    if (placeholder_[u]) {
      placeholder_[u] = 0;
      --live_count_;
    }
    return;
  }
  const int pos = base_->edge_position(u, v);
  if (pos >= 0 && live_[pos]) {
    live_[pos] = 0;
    --live_count_;
  }
}

void AugmentedGraph::remove_in_edges(int v) {
  if (v < 0 || v >= vertex_count()) return;
  for (int pos : base_->in_edge_positions(v)) {
    if (live_[pos]) {
      live_[pos] = 0;
      --live_count_;
    }
  }
}

std::vector<Edge> AugmentedGraph::live_edges() const {
  std::vector<Edge> out;
  out.reserve(live_count_);
  for_each_live_edge([&](int u, int v) { out.emplace_back(u, v); });
  return out;
}

AugmentedGraph construct_augmented(const DiGraph& g) {
  return AugmentedGraph(g);
}

AugmentedGraph construct_augmented(int n, const std::vector<Edge>& edges,
                                   DiGraph& storage) {
  for (const auto& [u, v] : edges) {
    if (u == kDummy || v == kDummy) {
      throw std::invalid_argument(
          "edge list already contains the dummy vertex");
    }
  }
  storage = DiGraph(n, edges);
  return AugmentedGraph(storage);
}

DiGraph sbm_generate(const std::vector<int>& block_sizes, double p_in,
                     double p_out, std::mt19937_64& rng) {
  if (block_sizes.empty()) throw std::invalid_argument("no blocks given");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw std::invalid_argument("edge probabilities must lie in [0,1]");
  }
  std::vector<int> block;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] <= 0) {
      throw std::invalid_argument("block sizes must be positive");
    }
    block.insert(block.end(), static_cast<std::size_t>(block_sizes[b]),
                 static_cast<int>(b));
  }
  const int n = static_cast<int>(block.size());
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      const double p = block[u] == block[v] ? p_in : p_out;
      // One draw per ordered pair keeps the stream layout independent of p.
      if (uniform01(rng) < p) edges.emplace_back(u, v);
    }
  }
  return DiGraph(n, std::move(edges));
}

DiGraph random_edge_subset(int n, double fraction, std::mt19937_64& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("edge fraction must lie in [0,1]");
  }
  if (fraction == 1.0) return complete_digraph(n);
  std::vector<Edge> all = complete_digraph(n).edges();
  const auto keep = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(all.size())));
  // Partial Fisher-Yates: the first `keep` slots are a uniform subset.
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + uniform_below(rng, all.size() - i);
    std::swap(all[i], all[j]);
  }
  all.resize(keep);
  return DiGraph(n, std::move(all));
}

ArmVertexMapping::ArmVertexMapping(std::vector<int> vertex_of_arm,
                                   std::vector<int> block_sizes)
    : vertex_of_arm_(std::move(vertex_of_arm)),
      arm_of_vertex_(vertex_of_arm_.size(), -1),
      block_sizes_(std::move(block_sizes)) {
  const int n = static_cast<int>(vertex_of_arm_.size());
  for (int i = 0; i < n; ++i) {
    const int v = vertex_of_arm_[i];
    if (v < 0 || v >= n || arm_of_vertex_[v] != -1) {
      throw std::invalid_argument("arm-to-vertex map is not a bijection");
    }
    arm_of_vertex_[v] = i;
  }
  for (std::size_t b = 0; b < block_sizes_.size(); ++b) {
    if (block_sizes_[b] <= 0) {
      throw std::invalid_argument("block sizes must be positive");
    }
    block_of_vertex_.insert(block_of_vertex_.end(),
                            static_cast<std::size_t>(block_sizes_[b]),
                            static_cast<int>(b));
  }
  if (static_cast<int>(block_of_vertex_.size()) != n) {
    throw std::invalid_argument("block sizes do not sum to the arm count");
  }
}

DiGraph ArmVertexMapping::pull_back(const DiGraph& vertex_graph) const {
  if (vertex_graph.vertex_count() != size()) {
    throw std::invalid_argument("graph and mapping sizes differ");
  }
  std::vector<Edge> edges;
  edges.reserve(vertex_graph.edge_count());
  for (const auto& [u, v] : vertex_graph.edges()) {
    edges.emplace_back(arm_of_vertex_[u], arm_of_vertex_[v]);
  }
  return DiGraph(size(), std::move(edges));
}

ArmVertexMapping map_random(int n, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("need at least one arm");
  const int blocks = (n + 9) / 10;
  std::vector<int> sizes(static_cast<std::size_t>(blocks), n / blocks);
  for (int b = 0; b < n % blocks; ++b) ++sizes[b];

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return ArmVertexMapping(std::move(perm), std::move(sizes));
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    d += x * x;
  }
  return d;
}

}  // namespace

double within_cluster_ss(const std::vector<std::vector<double>>& points,
                         const std::vector<int>& labels, int k) {
  if (points.empty()) return 0.0;
  const std::size_t dim = points.front().size();
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                        std::vector<double>(dim, 0.0));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[labels[i]];
    for (std::size_t d = 0; d < dim; ++d) sums[labels[i]][d] += points[i][d];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (auto& x : sums[c]) x /= counts[c];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += sq_dist(points[i], sums[labels[i]]);
  }
  return total;
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::mt19937_64& rng, int max_iterations) {
  const int n = static_cast<int>(points.size());
  if (k < 1 || k > n) throw std::invalid_argument("need 1 <= k <= n");
  const std::size_t dim = points.front().size();

  KMeansResult res;
  // k-means++ seeding.
  res.centroids.push_back(points[uniform_below(rng, static_cast<std::uint64_t>(n))]);
  std::vector<double> d2(static_cast<std::size_t>(n));
  while (static_cast<int>(res.centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = sq_dist(points[i], res.centroids.front());
      for (const auto& c : res.centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    int pick = 0;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n)));
    }
    res.centroids.push_back(points[pick]);
  }

  res.labels.assign(static_cast<std::size_t>(n), -1);
  for (int it = 1; it <= max_iterations; ++it) {
    res.iterations = it;
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], res.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], res.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.labels[i] != best) {
        res.labels[i] = best;
        changed = true;
      }
    }

    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                          std::vector<double>(dim, 0.0));
    for (int i = 0; i < n; ++i) {
      ++counts[res.labels[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[res.labels[i]][d] += points[i][d];
    }
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (auto& x : sums[c]) x /= counts[c];
        res.centroids[c] = std::move(sums[c]);
      }
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Move the empty centroid onto the point worst served by its cluster.
      int far = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (counts[res.labels[i]] <= 1) continue;
        const double d = sq_dist(points[i], res.centroids[res.labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) break;
      --counts[res.labels[far]];
      res.labels[far] = c;
      counts[c] = 1;
      res.centroids[c] = points[far];
      reseeded = true;
    }
    if (!changed && !reseeded) break;
  }
  res.inertia = within_cluster_ss(points, res.labels, k);
  return res;
}

std::vector<std::vector<double>> flatten_arms(const Cohort& cohort) {
  std::vector<std::vector<double>> points;
  points.reserve(cohort.size());
  for (const auto& arm : cohort.arms()) {
    points.emplace_back(arm.tensor().begin(), arm.tensor().end());
  }
  return points;
}

ArmVertexMapping map_by_cluster(const Cohort& cohort, int k,
                                std::mt19937_64& rng) {
  const int n = static_cast<int>(cohort.size());
  if (k < 1 || k > n) throw std::invalid_argument("need 1 <= k <= n");
  const KMeansResult km = kmeans(flatten_arms(cohort), k, rng);

  std::vector<int> sizes;
  std::vector<int> vertex_of_arm(static_cast<std::size_t>(n), -1);
  int next_vertex = 0;
  for (int c = 0; c < k; ++c) {
    int members = 0;
    for (int i = 0; i < n; ++i) {
      if (km.labels[i] == c) {
        vertex_of_arm[i] = next_vertex++;
        ++members;
      }
    }
    if (members > 0) sizes.push_back(members);
  }
  return ArmVertexMapping(std::move(vertex_of_arm), std::move(sizes));
}

}  // namespace netrmab
