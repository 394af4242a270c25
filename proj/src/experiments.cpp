#include "netrmab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "netrmab/graph.hpp"
#include "netrmab/rng.hpp"
#include "netrmab/svg.hpp"
#include "netrmab/whittle.hpp"

namespace netrmab {

using nlohmann::json;

namespace {

constexpr std::uint64_t kGraphSalt = 0x5b3a0001ULL;
constexpr std::uint64_t kEdgeSalt = 0xed6e0002ULL;
constexpr std::uint64_t kEdgeMapSalt = 0x3a9c0003ULL;

const std::vector<std::pair<ExperimentKind, std::string>> kKindNames = {
    {ExperimentKind::kOptimalComparison, "optimal_comparison"},
    {ExperimentKind::kPolicyTable, "policy_table"},
    {ExperimentKind::kSensitivityBudget, "sensitivity_budget"},
    {ExperimentKind::kSensitivityPsi, "sensitivity_psi"},
    {ExperimentKind::kSensitivityTopology, "sensitivity_topology"},
    {ExperimentKind::kEdgeDensity, "edge_density"},
};

std::string graph_name(GraphKind g) {
  switch (g) {
    case GraphKind::kSbm: return "sbm";
    case GraphKind::kComplete: return "complete";
    case GraphKind::kEdgeSubset: return "edge_subset";
  }
  return "sbm";
}

GraphKind parse_graph(const std::string& name) {
  if (name == "sbm") return GraphKind::kSbm;
  if (name == "complete") return GraphKind::kComplete;
  if (name == "edge_subset") return GraphKind::kEdgeSubset;
  throw ConfigError("unknown graph kind '" + name + "'");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

template <typename T>
T take(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "policy_table";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < seed_count; ++k) out.push_back(seed_start + static_cast<std::uint64_t>(k));
  return out;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kOptimalComparison:
      c.n = 8;
      c.budgets = {1000, 1500, 2000, 2500, 3000};
      c.psis = {500};
      c.graph = GraphKind::kComplete;
      c.sbm.clear();
      c.mappings = {"random"};
      c.policies = {"vi", "greta", "tw", "noact"};
      break;
    case ExperimentKind::kPolicyTable:
      c.budgets = {10000};
      c.psis = {500};
      c.sbm = {{0.2, 0.05, ""}};
      c.mappings = {"random", "by_cluster"};
      c.policies = {"greta", "myopic", "tw", "cwrandom", "random", "noact"};
      break;
    case ExperimentKind::kSensitivityBudget:
      c.budgets = {5000, 10000, 15000};
      c.psis = {500};
      c.sbm = {{0.25, 0.05, ""}};
      c.mappings = {"by_cluster"};
      c.policies = {"greta", "tw", "myopic", "noact"};
      break;
    case ExperimentKind::kSensitivityPsi:
      c.budgets = {6000};
      c.psis = {0, 250, 500, 750, 900};
      c.sbm = {{0.25, 0.05, ""}};
      c.mappings = {"by_cluster"};
      c.policies = {"greta", "tw", "myopic", "noact"};
      break;
    case ExperimentKind::kSensitivityTopology:
      c.budgets = {10000};
      c.psis = {500};
      c.sbm.clear();
      for (const char* series : {"assortative", "disassortative"}) {
        c.sbm.push_back({0.0, 0.0, series});
        for (int k = 1; k <= 5; ++k) {
          const double p = 0.1 * k;
          if (std::string(series) == "assortative") {
            c.sbm.push_back({p, 0.1, series});
          } else {
            c.sbm.push_back({0.1, p, series});
          }
        }
      }
      c.mappings = {"by_cluster"};
      c.policies = {"greta", "tw", "myopic", "noact"};
      break;
    case ExperimentKind::kEdgeDensity:
      c.budgets = {10000};
      c.psis = {500};
      c.graph = GraphKind::kEdgeSubset;
      c.sbm.clear();
      for (int k = 0; k <= 10; ++k) c.densities.push_back(k / 10.0);
      c.edge_seeds = {0, 1, 2, 3, 4, 5};
      c.mappings = {"random"};
      c.seed_count = 30;
      c.policies = {"greta", "tw"};
      break;
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json sbm = json::array();
  for (const auto& p : c.sbm) {
    sbm.push_back({{"p_in", p.p_in}, {"p_out", p.p_out}, {"series", p.series}});
  }
  return json{
      {"experiment", experiment_name(c.kind)},
      {"n", c.n},
      {"T", c.horizon},
      {"beta", c.beta},
      {"B_milli", c.budgets},
      {"psi_milli", c.psis},
      {"graph", graph_name(c.graph)},
      {"sbm", sbm},
      {"densities", c.densities},
      {"edge_seeds", c.edge_seeds},
      {"mappings", c.mappings},
      {"seed_start", c.seed_start},
      {"seed_count", c.seed_count},
      {"policies", c.policies},
      {"initial_states", initial_states_name(c.init)},
      {"sampler",
       {{"margin", c.sampler.margin},
        {"base", c.sampler.base},
        {"message_increment", c.sampler.message_increment},
        {"pull_increment", c.sampler.pull_increment}}},
      {"myopic_raw", c.myopic_raw},
      {"vi_tolerance", c.vi_tolerance},
  };
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("experiment")) throw ConfigError("config needs an 'experiment' key");
  ExperimentConfig c = default_config(parse_experiment_kind(take<std::string>(doc, "experiment")));

  static const std::set<std::string> known = {
      "experiment", "n", "T", "beta", "B_milli", "psi_milli", "graph", "sbm",
      "densities", "edge_seeds", "mappings", "seed_start", "seed_count",
      "policies", "initial_states", "sampler", "myopic_raw", "vi_tolerance"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  if (doc.contains("n")) c.n = take<int>(doc, "n");
  if (doc.contains("T")) c.horizon = take<int>(doc, "T");
  if (doc.contains("beta")) c.beta = take<double>(doc, "beta");
  if (doc.contains("B_milli")) c.budgets = take<std::vector<Milli>>(doc, "B_milli");
  if (doc.contains("psi_milli")) c.psis = take<std::vector<Milli>>(doc, "psi_milli");
  if (doc.contains("graph")) c.graph = parse_graph(take<std::string>(doc, "graph"));
  if (doc.contains("sbm")) {
    const json& arr = doc.at("sbm");
    if (!arr.is_array()) throw ConfigError("config key 'sbm' must be an array");
    c.sbm.clear();
    for (const auto& e : arr) {
      if (!e.is_object()) throw ConfigError("sbm entries must be objects");
      for (const auto& [key, _] : e.items()) {
        if (key != "p_in" && key != "p_out" && key != "series") {
          throw ConfigError("unknown sbm key '" + key + "'");
        }
      }
      SbmParams p;
      p.p_in = take<double>(e, "p_in");
      p.p_out = take<double>(e, "p_out");
      if (e.contains("series")) p.series = take<std::string>(e, "series");
      c.sbm.push_back(p);
    }
  }
  if (doc.contains("densities")) c.densities = take<std::vector<double>>(doc, "densities");
  if (doc.contains("edge_seeds")) c.edge_seeds = take<std::vector<std::uint64_t>>(doc, "edge_seeds");
  if (doc.contains("mappings")) c.mappings = take<std::vector<std::string>>(doc, "mappings");
  if (doc.contains("seed_start")) c.seed_start = take<std::uint64_t>(doc, "seed_start");
  if (doc.contains("seed_count")) c.seed_count = take<int>(doc, "seed_count");
  if (doc.contains("policies")) c.policies = take<std::vector<std::string>>(doc, "policies");
  if (doc.contains("initial_states")) {
    try {
      c.init = parse_initial_states(take<std::string>(doc, "initial_states"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("sampler")) {
    const json& s = doc.at("sampler");
    if (!s.is_object()) throw ConfigError("config key 'sampler' must be an object");
    for (const auto& [key, _] : s.items()) {
      if (key != "margin" && key != "base" && key != "message_increment" &&
          key != "pull_increment") {
        throw ConfigError("unknown sampler key '" + key + "'");
      }
    }
    if (s.contains("margin")) c.sampler.margin = take<double>(s, "margin");
    if (s.contains("base")) c.sampler.base = take<std::array<double, 2>>(s, "base");
    if (s.contains("message_increment")) {
      c.sampler.message_increment = take<std::array<double, 2>>(s, "message_increment");
    }
    if (s.contains("pull_increment")) {
      c.sampler.pull_increment = take<std::array<double, 2>>(s, "pull_increment");
    }
  }
  if (doc.contains("myopic_raw")) c.myopic_raw = take<bool>(doc, "myopic_raw");
  if (doc.contains("vi_tolerance")) c.vi_tolerance = take<double>(doc, "vi_tolerance");
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& why) { throw ConfigError(why); };
  if (c.n < 1) fail("n must be positive");
  if (c.horizon < 1) fail("T must be positive");
  if (!(c.beta > 0.0 && c.beta < 1.0)) fail("beta must lie in (0,1)");
  if (c.budgets.empty()) fail("B_milli list is empty");
  for (Milli b : c.budgets) {
    if (b < 0) fail("B_milli entries must be non-negative");
  }
  if (c.psis.empty()) fail("psi_milli list is empty");
  for (Milli p : c.psis) {
    if (p < 0 || p >= kMilliPerUnit) fail("psi_milli entries must lie in [0,1000)");
  }
  switch (c.graph) {
    case GraphKind::kSbm:
      if (c.sbm.empty()) fail("sbm list is empty");
      for (const auto& p : c.sbm) {
        if (!(p.p_in >= 0 && p.p_in <= 1 && p.p_out >= 0 && p.p_out <= 1)) {
          fail("sbm probabilities must lie in [0,1]");
        }
      }
      break;
    case GraphKind::kEdgeSubset:
      if (c.densities.empty()) fail("densities list is empty");
      if (c.edge_seeds.empty()) fail("edge_seeds list is empty");
      for (double d : c.densities) {
        if (!(d >= 0 && d <= 1)) fail("densities must lie in [0,1]");
      }
      break;
    case GraphKind::kComplete:
      break;
  }
  if (c.mappings.empty()) fail("mappings list is empty");
  for (const auto& m : c.mappings) {
    if (m != "random" && m != "by_cluster") fail("unknown mapping '" + m + "'");
  }
  if (c.seed_count < 1) fail("seed_count must be positive");
  if (c.policies.empty()) fail("policies list is empty");
  std::set<std::string> seen;
  for (const auto& p : c.policies) {
    try {
      parse_policy_kind(p);
    } catch (const std::exception&) {
      fail("unknown policy '" + p + "'");
    }
    if (!seen.insert(p).second) fail("policy '" + p + "' listed twice");
  }
  const auto& s = c.sampler;
  if (!(s.margin > 0 && s.margin < 0.1)) fail("sampler margin must lie in (0,0.1)");
  for (const auto* r : {&s.base, &s.message_increment, &s.pull_increment}) {
    if (!((*r)[0] >= 0 && (*r)[0] <= (*r)[1] && (*r)[1] <= 1)) {
      fail("sampler ranges must satisfy 0 <= lo <= hi <= 1");
    }
  }
  if (s.base[1] - s.base[0] < s.margin) fail("sampler base range narrower than margin");
  if (!(c.vi_tolerance > 0)) fail("vi_tolerance must be positive");
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Cell::tag() const {
  std::ostringstream os;
  os << "map=" << mapping << ";B=" << budget << ";psi=" << psi;
  if (edge_seed >= 0) {
    os << ";edge_seed=" << edge_seed << ";density=" << short_num(density);
  } else {
    os << ";pin=" << short_num(sbm.p_in) << ";pout=" << short_num(sbm.p_out);
  }
  if (!sbm.series.empty()) os << ";series=" << sbm.series;
  return os.str();
}

std::vector<Cell> expand_cells(const ExperimentConfig& c) {
  std::vector<Cell> out;
  auto add_grid = [&](Cell base) {
    for (Milli b : c.budgets) {
      for (Milli p : c.psis) {
        base.budget = b;
        base.psi = p;
        out.push_back(base);
      }
    }
  };
  switch (c.graph) {
    case GraphKind::kComplete: {
      Cell cell;
      cell.mapping = "complete";
      cell.sbm = {1.0, 1.0, ""};
      add_grid(cell);
      break;
    }
    case GraphKind::kSbm:
      for (const auto& m : c.mappings) {
        for (const auto& p : c.sbm) {
          Cell cell;
          cell.mapping = m;
          cell.sbm = p;
          add_grid(cell);
        }
      }
      break;
    case GraphKind::kEdgeSubset:
      for (const auto& m : c.mappings) {
        for (std::uint64_t es : c.edge_seeds) {
          for (double d : c.densities) {
            Cell cell;
            cell.mapping = m;
            cell.sbm = {d, d, ""};
            cell.density = d;
            cell.edge_seed = static_cast<std::int64_t>(es);
            add_grid(cell);
          }
        }
      }
      break;
  }
  return out;
}

const std::vector<double>* CellResult::find(const std::string& policy) const {
  for (std::size_t p = 0; p < policies.size(); ++p) {
    if (policies[p] == policy) return &rewards[p];
  }
  return nullptr;
}

namespace {

int block_count(int n) { return (n + 9) / 10; }

ArmVertexMapping make_mapping(const std::string& kind, const Cohort& cohort,
                              std::mt19937_64& rng) {
  const int n = static_cast<int>(cohort.size());
  if (kind == "by_cluster") return map_by_cluster(cohort, std::min(block_count(n), n), rng);
  return map_random(n, rng);
}

DiGraph build_graph(const ExperimentConfig& c, const Cell& cell,
                    const Cohort& cohort, std::uint64_t seed) {
  switch (c.graph) {
    case GraphKind::kComplete:
      return complete_digraph(c.n);
    case GraphKind::kSbm: {
      auto rng = make_engine(seed, kGraphSalt);
      const ArmVertexMapping mapping = make_mapping(cell.mapping, cohort, rng);
      const DiGraph vg = sbm_generate(mapping.block_sizes(), cell.sbm.p_in, cell.sbm.p_out, rng);
      return mapping.pull_back(vg);
    }
    case GraphKind::kEdgeSubset: {
      // The edge set and its placement depend only on the edge seed.
      const auto es = static_cast<std::uint64_t>(cell.edge_seed);
      auto edge_rng = make_engine(es, kEdgeSalt);
      const DiGraph vg = random_edge_subset(c.n, cell.density, edge_rng);
      if (cell.mapping == "by_cluster") {
        auto map_rng = make_engine(seed, kEdgeMapSalt);
        return make_mapping(cell.mapping, cohort, map_rng).pull_back(vg);
      }
      auto map_rng = make_engine(es, kEdgeMapSalt);
      return map_random(c.n, map_rng).pull_back(vg);
    }
  }
  return DiGraph(c.n, {});
}

}  // namespace

Instance build_instance(const ExperimentConfig& c, const Cell& cell,
                        std::uint64_t seed) {
  Cohort cohort = sample_cohort(static_cast<std::size_t>(c.n), seed, c.beta,
                                cell.budget, cell.psi, c.horizon, c.sampler);
  DiGraph g = build_graph(c, cell, cohort, seed);
  return Instance{std::move(cohort), std::move(g)};
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers,
                                const Progress& progress) {
  validate(config);
  ExperimentResult res;
  res.config = config;
  res.hash = config_hash(config);
  res.seeds = config.seeds();
  res.started_at = utc_now();

  const std::vector<Cell> cells = expand_cells(config);
  std::vector<PolicySpec> specs;
  for (const auto& name : config.policies) {
    PolicySpec spec;
    spec.kind = parse_policy_kind(name);
    spec.myopic_raw = config.myopic_raw;
    spec.vi.tolerance = config.vi_tolerance;
    specs.push_back(spec);
  }
  const std::size_t np = specs.size();
  const std::size_t ns = res.seeds.size();

  res.cells.resize(cells.size());
  std::vector<std::vector<std::vector<Milli>>> spend(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    res.cells[c].cell = cells[c];
    res.cells[c].policies = config.policies;
    res.cells[c].rewards.assign(np, std::vector<double>(ns, 0.0));
    spend[c].assign(np, std::vector<Milli>(ns, 0));
  }

  const EpisodeOptions options{config.init, false};
  // One task per seed: the cohort and its index table depend only on the
  // seed, so they are built once and shared by every cell.
  auto run_seed = [&](std::size_t k) {
    const std::uint64_t seed = res.seeds[k];
    const Cohort base = sample_cohort(static_cast<std::size_t>(config.n), seed,
                                      config.beta, 0, 0, config.horizon, config.sampler);
    const WhittleTable table = build_table(base);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cohort cohort = base.with_budget(cells[c].budget).with_psi(cells[c].psi);
      const DiGraph graph = build_graph(config, cells[c], cohort, seed);
      for (std::size_t p = 0; p < np; ++p) {
        auto policy = make_policy(specs[p], cohort, graph);
        const EpisodeResult r = run_episode(cohort, graph, table, *policy, seed, options);
        res.cells[c].rewards[p][k] = r.reward;
        spend[c][p][k] = r.max_spend;
      }
    }
  };

  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(ns, 1)));
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::exception_ptr failure;
  std::mutex mutex;
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < ns;) {
      try {
        run_seed(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure) failure = std::current_exception();
        next = ns;
        return;
      }
      std::lock_guard<std::mutex> lock(mutex);
      ++done;
      if (progress) progress(done, ns);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    res.cells[c].max_spend.assign(np, 0);
    for (std::size_t p = 0; p < np; ++p) {
      for (Milli m : spend[c][p]) {
        res.cells[c].max_spend[p] = std::max(res.cells[c].max_spend[p], m);
      }
    }
  }
  res.finished_at = utc_now();
  return res;
}

std::vector<ResultRow> result_rows(const ExperimentResult& res) {
  std::vector<ResultRow> rows;
  for (const auto& cr : res.cells) {
    for (std::size_t p = 0; p < cr.policies.size(); ++p) {
      ResultRow row;
      row.policy = cr.policies[p];
      row.mapping = cr.cell.mapping;
      row.budget = cr.cell.budget;
      row.psi = cr.cell.psi;
      row.p_in = cr.cell.sbm.p_in;
      row.p_out = cr.cell.sbm.p_out;
      row.n = res.config.n;
      row.horizon = res.config.horizon;
      row.summary = summarize(cr.rewards[p]);
      row.config_hash = res.hash;
      row.max_spend = cr.max_spend[p];
      row.tag = cr.cell.tag();
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<BenefitRow> benefit_rows(const ExperimentResult& res) {
  std::vector<BenefitRow> rows;
  for (const auto& cr : res.cells) {
    const auto* noact = cr.find("noact");
    const auto* gh = cr.find("greta");
    if (!noact || !gh) continue;
    for (std::size_t p = 0; p < cr.policies.size(); ++p) {
      BenefitRow row;
      row.tag = cr.cell.tag();
      row.mapping = cr.cell.mapping;
      row.policy = cr.policies[p];
      row.benefit = paired_benefit(cr.rewards[p], *noact, *gh);
      row.reward = summarize(cr.rewards[p]);
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text,
                std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  written.push_back(path.filename().string());
}

// Key columns plus <policy>_mean,<policy>_ci95 per policy, one row per cell.
struct Pivot {
  std::vector<std::string> key_names;
  std::ostringstream body;

  void header(const std::vector<std::string>& policies) {
    for (const auto& k : key_names) body << k << ',';
    for (const auto& p : policies) body << p << "_mean," << p << "_ci95,";
    body << "config_hash\n";
  }
  void row(const std::vector<std::string>& keys, const CellResult& cr,
           const std::string& hash) {
    for (const auto& k : keys) body << k << ',';
    for (const auto& r : cr.rewards) {
      const Summary s = summarize(r);
      body << fixed6(s.mean) << ',' << fixed6(s.ci95) << ',';
    }
    body << hash << '\n';
  }
};

// One line per policy over the cells selected by `pick`, x from `xval`.
template <typename Pick, typename X>
svg::LineChart line_chart(const ExperimentResult& res, const std::string& title,
                          const std::string& x_label, Pick pick, X xval) {
  svg::LineChart chart;
  chart.title = title;
  chart.x_label = x_label;
  chart.y_label = "mean cumulative reward";
  for (std::size_t p = 0; p < res.config.policies.size(); ++p) {
    svg::Series s;
    s.label = res.config.policies[p];
    for (const auto& cr : res.cells) {
      if (!pick(cr.cell)) continue;
      const Summary sum = summarize(cr.rewards[p]);
      s.x.push_back(xval(cr.cell));
      s.y.push_back(sum.mean);
      s.err.push_back(sum.ci95);
    }
    chart.series.push_back(std::move(s));
  }
  return chart;
}

void write_pivots(const ExperimentResult& res, const std::filesystem::path& dir,
                  std::vector<std::string>& written) {
  const auto& cfg = res.config;
  const auto& hash = res.hash;
  auto units = [](Milli m) { return from_milli(m); };
  switch (cfg.kind) {
    case ExperimentKind::kOptimalComparison: {
      Pivot pv{{"mapping", "B_milli", "psi_milli"}, {}};
      pv.header(cfg.policies);
      for (const auto& cr : res.cells) {
        pv.row({cr.cell.mapping, std::to_string(cr.cell.budget), std::to_string(cr.cell.psi)}, cr, hash);
      }
      write_file(dir / "optimal.csv", pv.body.str(), written);
      for (Milli psi : cfg.psis) {
        auto chart = line_chart(
            res, "Mean reward by budget, psi=" + short_num(units(psi)), "budget B",
            [&](const Cell& c) { return c.psi == psi; },
            [&](const Cell& c) { return units(c.budget); });
        write_file(dir / ("optimal_psi" + std::to_string(psi) + ".svg"), svg::render(chart), written);
      }
      // Paired heuristic-minus-threshold gap per budget.
      const auto* gh_any = res.cells.empty() ? nullptr : res.cells.front().find("greta");
      const auto* tw_any = res.cells.empty() ? nullptr : res.cells.front().find("tw");
      if (gh_any && tw_any) {
        std::ostringstream os;
        os << "mapping,B_milli,psi_milli,gap_mean,gap_ci95,config_hash\n";
        for (const auto& cr : res.cells) {
          const auto& g = *cr.find("greta");
          const auto& t = *cr.find("tw");
          std::vector<double> d(g.size());
          for (std::size_t k = 0; k < g.size(); ++k) d[k] = g[k] - t[k];
          const Summary s = summarize(d);
          os << cr.cell.mapping << ',' << cr.cell.budget << ',' << cr.cell.psi << ','
             << fixed6(s.mean) << ',' << fixed6(s.ci95) << ',' << hash << '\n';
        }
        write_file(dir / "optimal_gap.csv", os.str(), written);
      }
      break;
    }
    case ExperimentKind::kPolicyTable: {
      const auto rows = benefit_rows(res);
      std::ostringstream os;
      os << "mapping,B_milli,psi_milli,pin,pout,policy,ib_mean,ib_ci95,ib_of_means,"
            "ib_undefined_seeds,mean_R,ci95,config_hash\n";
      std::size_t i = 0;
      for (const auto& cr : res.cells) {
        if (!cr.find("noact") || !cr.find("greta")) continue;
        for (std::size_t p = 0; p < cr.policies.size(); ++p, ++i) {
          const auto& r = rows[i];
          os << r.mapping << ',' << cr.cell.budget << ',' << cr.cell.psi << ','
             << fixed6(cr.cell.sbm.p_in) << ',' << fixed6(cr.cell.sbm.p_out) << ','
             << r.policy << ',' << fixed6(r.benefit.paired.mean) << ','
             << fixed6(r.benefit.paired.ci95) << ','
             << (r.benefit.of_means ? fixed6(*r.benefit.of_means) : std::string("nan")) << ','
             << r.benefit.undefined << ',' << fixed6(r.reward.mean) << ','
             << fixed6(r.reward.ci95) << ',' << hash << '\n';
        }
      }
      write_file(dir / "table2.csv", os.str(), written);
      if (!rows.empty()) {
        svg::BarChart chart;
        chart.title = "Intervention benefit by mapping";
        chart.y_label = "intervention benefit (%)";
        chart.labels = cfg.policies;
        std::size_t j = 0;
        for (const auto& cr : res.cells) {
          if (!cr.find("noact") || !cr.find("greta")) continue;
          chart.groups.push_back(cr.cell.mapping);
          std::vector<double> v;
          std::vector<double> e;
          for (std::size_t p = 0; p < cr.policies.size(); ++p, ++j) {
            v.push_back(rows[j].benefit.paired.mean);
            e.push_back(rows[j].benefit.paired.ci95);
          }
          chart.values.push_back(v);
          chart.errors.push_back(e);
        }
        write_file(dir / "table2.svg", svg::render(chart), written);
      }
      break;
    }
    case ExperimentKind::kSensitivityBudget:
    case ExperimentKind::kSensitivityPsi:
    case ExperimentKind::kSensitivityTopology: {
      const bool budget = cfg.kind == ExperimentKind::kSensitivityBudget;
      const bool psi = cfg.kind == ExperimentKind::kSensitivityPsi;
      const std::string stem = budget ? "sweep_budget" : psi ? "sweep_psi" : "sweep_topology";
      Pivot pv{{"mapping", "series", "B_milli", "psi_milli", "pin", "pout"}, {}};
      pv.header(cfg.policies);
      for (const auto& cr : res.cells) {
        pv.row({cr.cell.mapping, cr.cell.sbm.series, std::to_string(cr.cell.budget),
                std::to_string(cr.cell.psi), fixed6(cr.cell.sbm.p_in), fixed6(cr.cell.sbm.p_out)},
               cr, hash);
      }
      write_file(dir / (stem + ".csv"), pv.body.str(), written);
      std::set<std::pair<std::string, std::string>> groups;
      for (const auto& cr : res.cells) groups.insert({cr.cell.mapping, cr.cell.sbm.series});
      for (const auto& [mapping, series] : groups) {
        auto pick = [&](const Cell& c) { return c.mapping == mapping && c.sbm.series == series; };
        svg::LineChart chart;
        if (budget) {
          chart = line_chart(res, "Mean reward by budget (" + mapping + ")", "budget B", pick,
                             [&](const Cell& c) { return units(c.budget); });
        } else if (psi) {
          chart = line_chart(res, "Mean reward by message cost (" + mapping + ")",
                             "message cost psi", pick,
                             [&](const Cell& c) { return units(c.psi); });
        } else {
          chart = line_chart(res, "Mean reward, " + series + " SBM (" + mapping + ")",
                             "max(p_in, p_out)", pick,
                             [](const Cell& c) { return std::max(c.sbm.p_in, c.sbm.p_out); });
        }
        std::string name = stem + "_" + mapping;
        if (!series.empty()) name += "_" + series;
        write_file(dir / (name + ".svg"), svg::render(chart), written);
      }
      break;
    }
    case ExperimentKind::kEdgeDensity: {
      Pivot pv{{"mapping", "edge_seed", "density", "B_milli", "psi_milli"}, {}};
      pv.header(cfg.policies);
      for (const auto& cr : res.cells) {
        pv.row({cr.cell.mapping, std::to_string(cr.cell.edge_seed), fixed6(cr.cell.density),
                std::to_string(cr.cell.budget), std::to_string(cr.cell.psi)},
               cr, hash);
      }
      write_file(dir / "edge_density.csv", pv.body.str(), written);
      std::set<std::pair<std::string, std::int64_t>> groups;
      for (const auto& cr : res.cells) groups.insert({cr.cell.mapping, cr.cell.edge_seed});
      for (const auto& [mapping, es] : groups) {
        auto chart = line_chart(
            res, "Mean reward by edge density, edge seed " + std::to_string(es),
            "fraction of complete-graph edges",
            [&](const Cell& c) { return c.mapping == mapping && c.edge_seed == es; },
            [](const Cell& c) { return c.density; });
        write_file(dir / ("edge_density_" + mapping + "_seed" + std::to_string(es) + ".svg"),
                   svg::render(chart), written);
      }
      break;
    }
  }
}

}  // namespace

void write_archive(const ExperimentResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;

  std::ostringstream results;
  write_result_header(results);
  for (const auto& row : result_rows(res)) write_result_row(results, row);
  write_file(dir / "results.csv", results.str(), written);

  std::ostringstream per_seed;
  per_seed << "tag,policy,seed,R,config_hash\n";
  for (const auto& cr : res.cells) {
    const std::string tag = cr.cell.tag();
    for (std::size_t p = 0; p < cr.policies.size(); ++p) {
      for (std::size_t k = 0; k < res.seeds.size(); ++k) {
        per_seed << tag << ',' << cr.policies[p] << ',' << res.seeds[k] << ','
                 << fixed6(cr.rewards[p][k]) << ',' << res.hash << '\n';
      }
    }
  }
  write_file(dir / "per_seed.csv", per_seed.str(), written);

  write_pivots(res, dir, written);

  json manifest{
      {"experiment", experiment_name(res.config.kind)},
      {"config", config_to_json(res.config)},
      {"config_hash", res.hash},
      {"version", NETRMAB_VERSION},
      {"started_at", res.started_at},
      {"finished_at", res.finished_at},
      {"seeds", res.seeds.size()},
      {"cells", res.cells.size()},
      {"files", written},
  };
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace netrmab
