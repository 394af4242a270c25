#include "netrmab/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "netrmab/rng.hpp"

namespace netrmab {

namespace {

constexpr std::uint64_t kInitialStream = 0x1417a1ULL << 32;

}  // namespace

InitialStates parse_initial_states(const std::string& name) {
  if (name == "uniform") return InitialStates::kUniform;
  if (name == "all0") return InitialStates::kAllZero;
  if (name == "all1") return InitialStates::kAllOne;
  throw std::invalid_argument("unknown initial-state mode '" + name + "'");
}

std::string initial_states_name(InitialStates init) {
  switch (init) {
    case InitialStates::kUniform: return "uniform";
    case InitialStates::kAllZero: return "all0";
    case InitialStates::kAllOne: return "all1";
  }
  return "uniform";
}

double transition_uniform(std::uint64_t seed, int arm, int t) {
  return counter_uniform(seed, static_cast<std::uint64_t>(arm),
                         static_cast<std::uint64_t>(t));
}

StateVector initial_states(std::size_t n, std::uint64_t seed, InitialStates init) {
  StateVector s(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    switch (init) {
      case InitialStates::kUniform:
        s[i] = counter_uniform(seed, kInitialStream + i, 0) < 0.5 ? 1 : 0;
        break;
      case InitialStates::kAllZero: s[i] = 0; break;
      case InitialStates::kAllOne: s[i] = 1; break;
    }
  }
  return s;
}

EpisodeResult run_episode(const Cohort& cohort, const DiGraph& graph,
                          const WhittleTable& table, Policy& policy,
                          std::uint64_t seed, const EpisodeOptions& options) {
  const std::size_t n = cohort.size();
  if (static_cast<std::size_t>(graph.vertex_count()) != n || table.size() != n) {
    throw std::invalid_argument("cohort, graph and index table sizes differ");
  }
  EpisodeResult res;
  res.seed = seed;
  StateVector s = initial_states(n, seed, options.init);
  policy.begin_episode(seed);
  for (int t = 0; t < cohort.horizon(); ++t) {
    for (auto x : s) res.reward += x;
    const StepContext ctx{t, s, cohort, graph, table};
    ActionVector a = policy.act(ctx);
    if (auto why = feasibility_violation(a, graph, cohort.cost(), cohort.budget())) {
      throw FeasibilityViolation("policy " + policy_name(policy.kind()) +
                                 " seed " + std::to_string(seed) + " t " +
                                 std::to_string(t) + ": " + *why);
    }
    res.max_spend = std::max(res.max_spend, total_cost(a, cohort.cost()));
    StateVector next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = static_cast<std::uint8_t>(
          transition(cohort.arm(i), s[i], a[i],
                     transition_uniform(seed, static_cast<int>(i), t)));
    }
    if (options.keep_trajectory) {
      res.states.push_back(s);
      res.actions.push_back(std::move(a));
    }
    s = std::move(next);
  }
  return res;
}

Summary summarize(const std::vector<double>& values) {
  Summary out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  out.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
  return out;
}

BatchResult run_batch(const Cohort& cohort, const DiGraph& graph,
                      const WhittleTable& table, const PolicySpec& spec,
                      const std::vector<std::uint64_t>& seeds,
                      const EpisodeOptions& options, unsigned workers) {
  BatchResult out;
  out.policy = policy_name(spec.kind);
  out.seeds = seeds;
  out.rewards.assign(seeds.size(), 0.0);
  std::vector<Milli> spend(seeds.size(), 0);

  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(seeds.size(), 1)));
  EpisodeOptions opts = options;
  opts.keep_trajectory = false;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      auto policy = make_policy(spec, cohort, graph);
      for (std::size_t k; (k = next.fetch_add(1)) < seeds.size();) {
        const EpisodeResult r = run_episode(cohort, graph, table, *policy, seeds[k], opts);
        out.rewards[k] = r.reward;
        spend[k] = r.max_spend;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = seeds.size();
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

  out.summary = summarize(out.rewards);
  for (Milli m : spend) out.max_spend = std::max(out.max_spend, m);
  return out;
}

std::optional<double> intervention_benefit(double e_pi, double e_noact,
                                           double e_gh) {
  const double denom = e_gh - e_noact;
  if (denom == 0.0) return std::nullopt;
  return 100.0 * (e_pi - e_noact) / denom;
}

BenefitSummary paired_benefit(const std::vector<double>& pi,
                              const std::vector<double>& noact,
                              const std::vector<double>& gh) {
  if (pi.size() != noact.size() || pi.size() != gh.size()) {
    throw std::invalid_argument("paired benefit needs equal-length seed lists");
  }
  BenefitSummary out;
  std::vector<double> per_seed;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (auto ib = intervention_benefit(pi[k], noact[k], gh[k])) {
      per_seed.push_back(*ib);
    } else {
      ++out.undefined;
    }
  }
  out.paired = summarize(per_seed);
  out.of_means = intervention_benefit(summarize(pi).mean, summarize(noact).mean,
                                      summarize(gh).mean);
  return out;
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

void write_result_header(std::ostream& os) {
  os << "policy,mapping,B_milli,psi_milli,p_in,p_out,n,T,mean_R,ci95,n_seeds,"
        "config_hash,max_spend_milli,tag\n";
}

void write_result_row(std::ostream& os, const ResultRow& row) {
  os << row.policy << ',' << row.mapping << ',' << row.budget << ','
     << row.psi << ',' << fixed6(row.p_in) << ',' << fixed6(row.p_out) << ','
     << row.n << ',' << row.horizon << ',' << fixed6(row.summary.mean) << ','
     << fixed6(row.summary.ci95) << ',' << row.summary.count << ','
     << row.config_hash << ',' << row.max_spend << ',' << row.tag << '\n';
}

}  // namespace netrmab
