// Command-line runner for the experiment grids.
//
// Exit codes: 0 success, 1 configuration error, 2 feasibility violation,
// 3 resource guard.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netrmab/experiments.hpp"
#include "netrmab/greta.hpp"
#include "netrmab/whittle.hpp"

namespace {

using namespace netrmab;

struct Options {
  std::string config;
  std::string out;
  std::string policies;
  unsigned workers = 0;
  int seeds = 0;
  bool quiet = false;
  bool trace = false;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ExperimentConfig resolve(ExperimentKind kind, const Options& o) {
  ExperimentConfig c = o.config.empty() ? default_config(kind) : load_config(o.config);
  if (!o.config.empty() && c.kind != kind) {
    throw ConfigError("config describes '" + experiment_name(c.kind) +
                      "' but the subcommand runs '" + experiment_name(kind) + "'");
  }
  if (!o.policies.empty()) c.policies = split(o.policies);
  if (o.seeds > 0) c.seed_count = o.seeds;
  validate(c);
  return c;
}

int run(ExperimentKind kind, const Options& o) {
  const ExperimentConfig c = resolve(kind, o);
  const std::string out = o.out.empty() ? "results/" + experiment_name(kind) : o.out;
  Progress progress;
  if (!o.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\rseeds %zu/%zu", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  }
  const ExperimentResult res = run_experiment(c, o.workers, progress);
  write_archive(res, out);
  for (const auto& row : result_rows(res)) {
    if (row.max_spend > row.budget) {
      throw FeasibilityViolation("row " + row.tag + " spent beyond its budget");
    }
  }
  if (!o.quiet) {
    std::printf("%s: %zu cells x %zu seeds, config %s -> %s\n",
                experiment_name(kind).c_str(), res.cells.size(), res.seeds.size(),
                res.hash.c_str(), out.c_str());
  }
  return 0;
}

// Materialises the first (cell, seed) instance of a config for inspection.
int run_validate(const Options& o) {
  ExperimentConfig c;
  if (o.config.empty()) {
    c = default_config(ExperimentKind::kPolicyTable);
  } else {
    c = load_config(o.config);
  }
  if (!o.policies.empty()) c.policies = split(o.policies);
  validate(c);
  const std::filesystem::path out = o.out.empty() ? "results/validate" : o.out;
  std::filesystem::create_directories(out);

  const Cell cell = expand_cells(c).front();
  const std::uint64_t seed = c.seeds().front();
  const Instance inst = build_instance(c, cell, seed);

  std::size_t bad_arms = 0;
  for (const auto& arm : inst.cohort.arms()) {
    if (!validate_structural(arm).ok()) ++bad_arms;
  }
  if (bad_arms) {
    throw ConfigError(std::to_string(bad_arms) + " sampled arms break the structural constraints");
  }

  std::ofstream(out / "cohort.json") << cohort_to_json(inst.cohort).dump(2) << '\n';
  {
    std::ofstream g(out / "graph.txt");
    inst.graph.write_edge_list(g);
  }
  const WhittleTable table = build_table(inst.cohort);
  {
    std::ofstream w(out / "whittle.csv");
    table.write_csv(w);
  }
  if (o.trace) {
    std::ofstream tr(out / "greta_trace.csv");
    write_trace_header(tr);
    PolicySpec spec;
    spec.kind = PolicyKind::kGreta;
    spec.greta_trace = &tr;
    auto policy = make_policy(spec, inst.cohort, inst.graph);
    run_episode(inst.cohort, inst.graph, table, *policy, seed, {c.init, false});
  }
  std::printf("config %s valid: n=%d, %zu edges, cell %s, seed %llu -> %s\n",
              config_hash(c).c_str(), c.n, inst.graph.edge_count(), cell.tag().c_str(),
              static_cast<unsigned long long>(seed), out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked restless bandit experiments"};
  app.require_subcommand(1);

  Options opts;
  struct Sub {
    const char* name;
    const char* help;
    ExperimentKind kind;
  };
  const Sub subs[] = {
      {"optimal", "heuristic vs exact policy on a small complete graph", ExperimentKind::kOptimalComparison},
      {"table2", "intervention benefit of every policy under both mappings", ExperimentKind::kPolicyTable},
      {"sweep-budget", "reward as the budget grows", ExperimentKind::kSensitivityBudget},
      {"sweep-psi", "reward as the message cost grows", ExperimentKind::kSensitivityPsi},
      {"sweep-topology", "reward across assortative and disassortative SBMs", ExperimentKind::kSensitivityTopology},
      {"edge-density", "heuristic vs threshold policy on random edge subsets", ExperimentKind::kEdgeDensity},
  };

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--config", opts.config, "JSON config; defaults to the built-in grid");
    sc->add_option("--out", opts.out, "output directory");
    sc->add_option("--policies", opts.policies, "comma-separated policy subset");
    sc->add_option("--workers", opts.workers, "worker threads (0 = all cores)");
    sc->add_option("--seeds", opts.seeds, "override the number of simulation seeds");
    sc->add_flag("-q,--quiet", opts.quiet, "suppress progress output");
  };

  std::vector<std::pair<CLI::App*, ExperimentKind>> experiments;
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    add_common(sc);
    experiments.emplace_back(sc, s.kind);
  }
  auto* val = app.add_subcommand("validate", "check a config and dump its first instance");
  add_common(val);
  val->add_flag("--trace", opts.trace, "also write the heuristic's per-chunk trace");

  CLI11_PARSE(app, argc, argv);

  try {
    if (val->parsed()) return run_validate(opts);
    for (const auto& [sc, kind] : experiments) {
      if (sc->parsed()) return run(kind, opts);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const FeasibilityViolation& e) {
    std::fprintf(stderr, "feasibility violation: %s\n", e.what());
    return 2;
  } catch (const ResourceGuardError& e) {
    std::fprintf(stderr, "resource guard: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
