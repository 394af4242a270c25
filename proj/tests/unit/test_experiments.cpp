#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "netrmab/experiments.hpp"

using namespace netrmab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig tiny(ExperimentKind kind) {
  ExperimentConfig c = default_config(kind);
  c.n = std::min(c.n, 12);
  c.horizon = 15;
  c.seed_count = 3;
  if (kind == ExperimentKind::kEdgeDensity) {
    c.densities = {0.0, 0.5, 1.0};
    c.edge_seeds = {0, 1};
  }
  if (kind == ExperimentKind::kOptimalComparison) c.n = 4;
  return c;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("default grids") {
  const auto opt = default_config(ExperimentKind::kOptimalComparison);
  CHECK(opt.n == 8);
  CHECK(opt.budgets == std::vector<Milli>{1000, 1500, 2000, 2500, 3000});
  CHECK(opt.graph == GraphKind::kComplete);
  CHECK(expand_cells(opt).size() == 5);

  const auto t2 = default_config(ExperimentKind::kPolicyTable);
  CHECK(t2.policies.size() == 6);
  CHECK(t2.seeds().size() == 50);
  CHECK(expand_cells(t2).size() == 2);

  const auto psi = default_config(ExperimentKind::kSensitivityPsi);
  CHECK(psi.psis == std::vector<Milli>{0, 250, 500, 750, 900});
  CHECK(psi.budgets == std::vector<Milli>{6000});

  const auto ed = default_config(ExperimentKind::kEdgeDensity);
  CHECK(ed.seed_count == 30);
  CHECK(expand_cells(ed).size() == 66);

  const auto topo = default_config(ExperimentKind::kSensitivityTopology);
  CHECK(topo.sbm.front().p_in == 0.0);
  CHECK(topo.sbm.front().p_out == 0.0);
}

TEST_CASE("config json round trip") {
  for (const auto& [kind, name] :
       std::vector<std::pair<ExperimentKind, std::string>>{
           {ExperimentKind::kOptimalComparison, "optimal_comparison"},
           {ExperimentKind::kPolicyTable, "policy_table"},
           {ExperimentKind::kSensitivityBudget, "sensitivity_budget"},
           {ExperimentKind::kSensitivityPsi, "sensitivity_psi"},
           {ExperimentKind::kSensitivityTopology, "sensitivity_topology"},
           {ExperimentKind::kEdgeDensity, "edge_density"}}) {
    CHECK(experiment_name(kind) == name);
    ExperimentConfig c = default_config(kind);
    c.beta = 0.9;
    c.sampler.base = {0.25, 0.75};
    c.myopic_raw = true;
    CHECK(config_from_json(config_to_json(c)) == c);
    CHECK(config_hash(c) == config_hash(config_from_json(config_to_json(c))));
  }
  ExperimentConfig a = default_config(ExperimentKind::kPolicyTable);
  ExperimentConfig b = a;
  b.seed_count = 49;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("partial configs take the experiment defaults") {
  const auto c = config_from_json(nlohmann::json{{"experiment", "sensitivity_budget"}, {"seed_count", 4}});
  ExperimentConfig want = default_config(ExperimentKind::kSensitivityBudget);
  want.seed_count = 4;
  CHECK(c == want);
}

TEST_CASE("bad configs are rejected") {
  using nlohmann::json;
  CHECK_THROWS_AS(config_from_json(json{{"n", 5}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "nope"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"psi_milli", {1000}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"B_milli", json::array()}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"B_milli", {-1}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"policies", {"tw", "tw"}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"mappings", {"spiral"}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"n", "ten"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"}, {"beta", 1.0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "policy_table"},
                                        {"sbm", {{{"p_in", 1.5}, {"p_out", 0.1}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("instances depend only on cell and seed") {
  const auto c = default_config(ExperimentKind::kPolicyTable);
  const auto cells = expand_cells(c);
  const Instance a = build_instance(c, cells[0], 4);
  const Instance b = build_instance(c, cells[0], 4);
  CHECK(a.cohort == b.cohort);
  CHECK(a.graph == b.graph);
  const Instance other = build_instance(c, cells[1], 4);
  CHECK(other.cohort.arms() == a.cohort.arms());

  const auto ed = default_config(ExperimentKind::kEdgeDensity);
  const auto ecells = expand_cells(ed);
  // density 1.0 for any edge seed is the complete graph
  for (const auto& cell : ecells) {
    if (cell.density == 1.0) {
      CHECK(build_instance(ed, cell, 0).graph.edge_count() == 100u * 99u);
    }
    if (cell.density == 0.0) {
      CHECK(build_instance(ed, cell, 0).graph.edge_count() == 0u);
    }
  }
}

TEST_CASE("optimal-comparison archive has one row per budget and policy") {
  const auto c = tiny(ExperimentKind::kOptimalComparison);
  const auto res = run_experiment(c, 1);
  const auto rows = result_rows(res);
  CHECK(rows.size() == c.budgets.size() * 4);
  for (const auto& r : rows) {
    CHECK(r.max_spend <= r.budget);
    CHECK(r.config_hash == res.hash);
  }
}

TEST_CASE("archives are byte-identical across reruns and worker counts") {
  for (ExperimentKind kind :
       {ExperimentKind::kPolicyTable, ExperimentKind::kSensitivityPsi,
        ExperimentKind::kSensitivityTopology, ExperimentKind::kEdgeDensity,
        ExperimentKind::kOptimalComparison, ExperimentKind::kSensitivityBudget}) {
    const auto c = tiny(kind);
    const fs::path root = fs::temp_directory_path() / ("netrmab_test_" + experiment_name(kind));
    fs::remove_all(root);
    write_archive(run_experiment(c, 1), root / "a");
    write_archive(run_experiment(c, 3), root / "b");
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;
      CHECK(slurp(entry.path()) == slurp(root / "b" / name));
      ++compared;
    }
    CHECK(compared >= 3);
    const auto manifest = nlohmann::json::parse(slurp(root / "a" / "manifest.json"));
    CHECK(manifest.at("config_hash") == config_hash(c));
    CHECK(config_from_json(manifest.at("config")) == c);
    fs::remove_all(root);
  }
}

TEST_CASE("policy table benefit rows") {
  const auto c = tiny(ExperimentKind::kPolicyTable);
  const auto res = run_experiment(c, 1);
  const auto rows = benefit_rows(res);
  CHECK(rows.size() == 2 * 6);
  for (const auto& r : rows) {
    if (r.policy == "greta") {
      CHECK(r.benefit.paired.mean == 100.0);
      CHECK(r.benefit.paired.ci95 == 0.0);
    }
    if (r.policy == "noact") CHECK(r.benefit.paired.mean == 0.0);
  }
}

TEST_CASE("resource guard propagates from the exact policy") {
  auto c = tiny(ExperimentKind::kOptimalComparison);
  c.n = 11;
  c.seed_count = 1;
  CHECK_THROWS_AS(run_experiment(c, 1), ResourceGuardError);
}

}  // TEST_SUITE
