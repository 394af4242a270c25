#pragma once

// Experiment configurations, the grid runner and result archives.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrmab/core.hpp"
#include "netrmab/sim.hpp"

namespace netrmab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  kOptimalComparison,
  kPolicyTable,
  kSensitivityBudget,
  kSensitivityPsi,
  kSensitivityTopology,
  kEdgeDensity,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

enum class GraphKind { kSbm, kComplete, kEdgeSubset };

struct SbmParams {
  double p_in = 0.0;
  double p_out = 0.0;
  std::string series;  // curve label in topology sweeps

  bool operator==(const SbmParams&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kPolicyTable;
  int n = 100;
  int horizon = 120;
  double beta = 0.95;
  std::vector<Milli> budgets{10000};
  std::vector<Milli> psis{500};
  GraphKind graph = GraphKind::kSbm;
  std::vector<SbmParams> sbm{{0.2, 0.05, ""}};
  std::vector<double> densities;            // edge-subset graphs only
  std::vector<std::uint64_t> edge_seeds;    // edge-subset graphs only
  std::vector<std::string> mappings{"random"};
  std::uint64_t seed_start = 0;
  int seed_count = 50;
  std::vector<std::string> policies{"noact", "tw", "greta"};
  InitialStates init = InitialStates::kUniform;
  ArmSamplerOptions sampler{};
  bool myopic_raw = false;
  double vi_tolerance = 1e-6;

  bool operator==(const ExperimentConfig&) const = default;

  std::vector<std::uint64_t> seeds() const;
};

/// The grid each experiment runs by default.
ExperimentConfig default_config(ExperimentKind kind);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Missing keys take the experiment's defaults. Throws ConfigError on
/// unknown keys, bad types or out-of-range values.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// One point of the hyperparameter grid.
struct Cell {
  Milli budget = 0;
  Milli psi = 0;
  SbmParams sbm{};
  std::string mapping;
  double density = -1.0;        // edge-subset graphs only
  std::int64_t edge_seed = -1;  // edge-subset graphs only

  std::string tag() const;
};

std::vector<Cell> expand_cells(const ExperimentConfig& config);

/// Per-seed rewards of every configured policy on one cell.
struct CellResult {
  Cell cell;
  std::vector<std::string> policies;
  std::vector<std::vector<double>> rewards;  // [policy][seed]
  std::vector<Milli> max_spend;              // [policy]

  /// Rewards of a policy, or nullptr when it was not run.
  const std::vector<double>* find(const std::string& policy) const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string hash;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;
  std::vector<std::uint64_t> seeds;
  std::vector<CellResult> cells;
};

/// Problem instance for one (cell, seed).
struct Instance {
  Cohort cohort;
  DiGraph graph;  // arm space
};

Instance build_instance(const ExperimentConfig& config, const Cell& cell,
                        std::uint64_t seed);

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every cell. Seeds are spread over `workers` threads (0 = hardware
/// concurrency) and reduced in seed order. Propagates FeasibilityViolation
/// and ResourceGuardError.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                unsigned workers = 0,
                                const Progress& progress = {});

/// results.csv, per_seed.csv, the experiment's pivot CSVs and SVG charts,
/// and manifest.json.
void write_archive(const ExperimentResult& result,
                   const std::filesystem::path& out_dir);

/// Rows of results.csv in file order.
std::vector<ResultRow> result_rows(const ExperimentResult& result);

struct BenefitRow {
  std::string tag;
  std::string mapping;
  std::string policy;
  BenefitSummary benefit;
  Summary reward;
};

/// Intervention benefit of every policy against NoAct and the heuristic on
/// each cell; empty unless both reference policies were run.
std::vector<BenefitRow> benefit_rows(const ExperimentResult& result);

}  // namespace netrmab
