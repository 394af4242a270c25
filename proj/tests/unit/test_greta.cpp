#include <doctest.h>

#include <sstream>

#include "netrmab/greta.hpp"
#include "netrmab/policies.hpp"
#include "netrmab/rng.hpp"
#include "netrmab/whittle.hpp"
#include "support/oracles.hpp"

using namespace netrmab;

namespace {

constexpr Action N = Action::kNoAct;
constexpr Action M = Action::kMessage;
constexpr Action P = Action::kPull;

}  // namespace

TEST_SUITE("greta") {

TEST_CASE("cost of pulling u and messaging v") {
  const CostModel c(500);
  CHECK(get_cost(0, 1, {N, N}, c) == 1500);
  CHECK(get_cost(0, kDummy, {M, N}, c) == 500);
  CHECK(get_cost(0, 1, {P, M}, c) == 0);
  CHECK(get_cost(0, 1, {P, N}, c) == 500);
  CHECK(get_cost(0, 1, {M, M}, c) == 500);
}

TEST_CASE("pull-only picks the top indices among unpulled vertices") {
  const DiGraph base(3, {});
  AugmentedGraph g(base);
  const std::vector<double> w2{0.9, 0.7, 0.4};
  const ChunkResult r = pull_only(g, 2, w2, {N, N, N});
  CHECK(r.candidate == ActionVector{P, P, N});
  CHECK(r.nu == doctest::Approx(1.6));

  const ChunkResult none = pull_only(g, 0, w2, {N, N, N});
  CHECK(none.candidate == ActionVector{N, N, N});
  CHECK(none.nu == 0.0);

  g.remove_edge(0, kDummy);
  g.remove_edge(1, kDummy);
  const ChunkResult one = pull_only(g, 2, w2, {P, P, N});
  CHECK(one.candidate == ActionVector{P, P, P});
  CHECK(one.nu == doctest::Approx(0.4));
}

TEST_CASE("edge values: the best-message edge absorbs the affordable neighbourhood") {
  // u = 0 with W2 = 0.8; neighbours 1 (W1 0.3), 2 (W1 0.2) and the dummy.
  const std::vector<double> w1{0.0, 0.3, 0.2};
  const std::vector<double> w2{0.8, 0.0, 0.0};
  const auto f = edge_indices(0, {kDummy, 1, 2}, 2000, 500, w1, w2);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == doctest::Approx(0.8));
  CHECK(f[1] == doctest::Approx(1.3));
  CHECK(f[2] == doctest::Approx(1.0));

  // A tight chunk only affords one message: n_msgs = 1.
  const auto g = edge_indices(0, {kDummy, 1, 2}, 500, 500, w1, w2);
  CHECK(g[1] == doctest::Approx(1.1));

  // Free messages take the whole neighbourhood regardless of b.
  const auto h = edge_indices(0, {kDummy, 1, 2}, 0, 0, w1, w2);
  CHECK(h[1] == doctest::Approx(1.3));

  const auto d = edge_indices(0, {kDummy}, 2000, 500, w1, w2);
  CHECK(d == std::vector<double>{0.8});
}

TEST_CASE("msg-pull on placeholder-only graphs pulls sequentially") {
  const DiGraph base(4, {});
  AugmentedGraph g(base);
  const std::vector<double> w1(4, 0.0);
  const std::vector<double> w2{0.1, 0.9, 0.5, 0.3};
  const ChunkResult r = msg_pull(g, 2000, CostModel(500), {N, N, N, N}, w1, w2);
  CHECK(r.candidate == ActionVector{N, P, P, N});
  CHECK(r.nu == doctest::Approx(1.4));
}

TEST_CASE("msg-pull selects the pull-message edge first") {
  const DiGraph base(2, {{0, 1}});
  AugmentedGraph g(base);
  const std::vector<double> w1{0.0, 0.2};
  const std::vector<double> w2{0.5, 0.0};
  const CostModel cost(500);
  const ChunkResult r = msg_pull(g, 2000, cost, {N, N}, w1, w2);
  REQUIRE_FALSE(r.consumed.empty());
  CHECK(r.consumed.front() == Edge{0, 1});
  CHECK(2000 - get_cost(0, 1, {N, N}, cost) == 500);
  CHECK(r.nu == doctest::Approx(0.7));

  // With exactly the pair's cost the chunk stops after it.
  const ChunkResult tight = msg_pull(g, 1500, cost, {N, N}, w1, w2);
  CHECK(tight.candidate == ActionVector{P, M});
  CHECK(tight.consumed == std::vector<Edge>{{0, 1}});
  CHECK(tight.nu == doctest::Approx(0.7));
}

TEST_CASE("msg-pull with a chunk below one pull returns nothing") {
  const DiGraph base(2, {{0, 1}});
  AugmentedGraph g(base);
  const ChunkResult r = msg_pull(g, 400, CostModel(500), {N, N}, {0.1, 0.2}, {0.5, 0.6});
  CHECK(r.candidate == ActionVector{N, N});
  CHECK(r.nu == 0.0);
  CHECK(r.consumed.empty());
  CHECK(r.iterations == 0);
}

TEST_CASE("action updates charge against the previous action") {
  const DiGraph base(4, {{0, 1}, {0, 2}, {0, 3}});
  AugmentedGraph g(base);
  {
    ActionVector a{N, N, N, N};
    CHECK(mod_acts(g, CostModel(500), {{0, P}}, a, 3000) == 2000);
    CHECK(a[0] == P);
  }
  {
    ActionVector a{M, N, N, N};
    CHECK(mod_acts(g, CostModel(500), {{0, P}}, a, 3000) == 2500);
  }
  {
    ActionVector a{N, N, N, N};
    CHECK(mod_acts(g, CostModel(0), {{0, P}}, a, 3000) == 2000);
    CHECK(a == ActionVector{P, M, M, M});
  }
  {
    ActionVector a{N, N, N, N};
    CHECK(mod_acts(g, CostModel(500), {{0, P}, {1, M}, {kDummy, M}}, a, 1500) == 0);
    CHECK(a == ActionVector{P, M, N, N});
  }
  {
    ActionVector a{N, N, N, N};
    CHECK_THROWS_AS(mod_acts(g, CostModel(500), {{0, P}}, a, 999), std::logic_error);
  }
}

TEST_CASE("graph update removes in-edges and the placeholder of pulled vertices") {
  const DiGraph base(4, {{1, 0}, {2, 0}, {0, 3}});
  AugmentedGraph g(base);
  const std::size_t before = g.live_edge_count();
  update_graph(g, {{0, P}}, {});
  CHECK(g.live_edge_count() == before - 3);
  CHECK(g.is_live(0, 3));

  AugmentedGraph h(base);
  update_graph(h, {}, {});
  CHECK(h.live_edge_count() == before);
  update_graph(h, {{1, M}}, {{0, 3}});
  CHECK(h.live_edge_count() == before - 1);

  AugmentedGraph all(base);
  update_graph(all, {{0, P}, {1, P}, {2, P}, {3, P}}, {});
  for (int u = 0; u < 4; ++u) CHECK_FALSE(all.placeholder_live(u));
}

TEST_CASE("two-vertex example prefers pull plus message") {
  const DiGraph g(2, {{0, 1}});
  const std::vector<double> w1{0.2, 0.4};
  const std::vector<double> w2{0.5, 0.3};
  GretaTrace trace;
  const ActionVector a = greta_step(g, 1500, CostModel(500), w1, w2, &trace);
  CHECK(a == ActionVector{P, M});
  REQUIRE(trace.chunks.size() == 1);
  CHECK(trace.chunks[0].nu_pull_only == doctest::Approx(0.5));
  CHECK(trace.chunks[0].nu_msg_pull == doctest::Approx(0.9));
  CHECK(trace.chunks[0].msg_pull_committed);
}

TEST_CASE("zero budget gives no action") {
  const DiGraph g = complete_digraph(5);
  const std::vector<double> w(5, 0.5);
  CHECK(greta_step(g, 0, CostModel(500), w, w) == ActionVector(5, N));
}

TEST_CASE("edgeless graphs reduce to the threshold policy") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto rng = make_engine(seed, 0x7e);
    const int n = 1 + static_cast<int>(uniform_below(rng, 40));
    std::vector<double> w1(n);
    std::vector<double> w2(n);
    for (int i = 0; i < n; ++i) {
      w1[i] = uniform01(rng);
      w2[i] = w1[i] + uniform01(rng);
    }
    const Milli budget = 1000 * static_cast<Milli>(uniform_below(rng, static_cast<std::uint64_t>(n) + 2));
    const Milli psi = static_cast<Milli>(uniform_below(rng, 1000));
    const DiGraph g(n, {});
    CHECK(greta_step(g, budget, CostModel(psi), w1, w2) == tw_step(w2, budget));
  }
}

TEST_CASE("fuzzed heuristic output is feasible and trace invariants hold") {
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto fc = oracle::fuzz_case(seed);
    const WhittleTable table = build_table(fc.cohort);
    auto rng = make_engine(seed, 0x51);
    StateVector s(fc.cohort.size());
    for (auto& x : s) x = static_cast<std::uint8_t>(uniform_below(rng, 2));
    GretaTrace trace;
    const ActionVector a =
        greta_step(fc.graph, fc.cohort.budget(), fc.cohort.cost(),
                   table.resolve(s, Action::kMessage), table.resolve(s, Action::kPull), &trace);
    if (feasibility_violation(a, fc.graph, fc.cohort.cost(), fc.cohort.budget())) ++violations;
    ActionVector running(a.size(), N);
    for (const auto& ch : trace.chunks) {
      if (ch.msg_pull_committed) CHECK(ch.nu_msg_pull > ch.nu_pull_only);
      for (const auto& [v, act] : ch.committed) {
        if (v == kDummy) continue;
        CHECK(static_cast<int>(act) >= static_cast<int>(running[v]));
        running[v] = act;
      }
    }
    if (fc.cohort.cost().psi() == 0) {
      for (int u = 0; u < fc.graph.vertex_count(); ++u) {
        if (a[u] != P) continue;
        for (int v : fc.graph.out_neighbors(u)) CHECK(a[v] != N);
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("trace rows") {
  const DiGraph g(2, {{0, 1}});
  GretaTrace trace;
  greta_step(g, 1500, CostModel(500), {0.2, 0.4}, {0.5, 0.3}, &trace);
  std::ostringstream os;
  write_trace_header(os);
  write_trace_rows(os, 3, trace);
  CHECK(os.str() ==
        "t,vertex,action,chunk_index,committed_nu,branch\n"
        "3,0,2,0,0.900000,msg_pull\n"
        "3,1,1,0,0.900000,msg_pull\n");
}

}  // TEST_SUITE
