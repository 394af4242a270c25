#include "netrmab/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "netrmab/rng.hpp"

namespace netrmab {

Milli to_milli(double units) {
  const double scaled = units * static_cast<double>(kMilliPerUnit);
  const double rounded = std::round(scaled);
  if (!std::isfinite(scaled) || std::abs(scaled - rounded) > 1e-6) {
    throw std::invalid_argument("amount " + std::to_string(units) +
                                " is not representable in milli-units");
  }
  return static_cast<Milli>(rounded);
}

double from_milli(Milli m) {
  return static_cast<double>(m) / static_cast<double>(kMilliPerUnit);
}

Action action_from_index(int a) {
  if (a < 0 || a >= kNumActions) {
    throw std::out_of_range("action index " + std::to_string(a));
  }
  return static_cast<Action>(a);
}

ArmModel::ArmModel(int id, const Tensor& transitions)
    : id_(id), transitions_(transitions) {}

ArmModel ArmModel::from_next_desirable(
    int id, const std::array<std::array<double, 2>, 3>& to_one) {
  Tensor t{};
  for (int a = 0; a < kNumActions; ++a) {
    for (int s = 0; s < kNumStates; ++s) {
      t[flat(a, s, 1)] = to_one[a][s];
      t[flat(a, s, 0)] = 1.0 - to_one[a][s];
    }
  }
  return ArmModel(id, t);
}

double expected_next_desirable(const ArmModel& arm, int s, int a) {
  if (s < 0 || s >= kNumStates) {
    throw std::out_of_range("state index " + std::to_string(s));
  }
  if (a < 0 || a >= kNumActions) {
    throw std::out_of_range("action index " + std::to_string(a));
  }
  return arm.prob(a, s, 1);
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kEntryOutOfRange:
      os << "entry P^" << action << "_{" << state << "," << next_state
         << "} outside (0,1)";
      break;
    case Kind::kRowSum:
      os << "row P^" << action << "_{" << state << ",*} does not sum to 1";
      break;
    case Kind::kDesirableOrdering:
      os << "P^" << action << "_{0,1} >= P^" << action << "_{1,1}";
      break;
    case Kind::kActionOrdering:
      os << "P^" << action << "_{" << state << ",1} >= P^" << other_action
         << "_{" << state << ",1}";
      break;
  }
  return os.str();
}

bool ValidationReport::has(Violation::Kind k) const {
  return std::any_of(violations.begin(), violations.end(),
                     [k](const Violation& v) { return v.kind == k; });
}

ValidationReport validate_structural(const ArmModel& arm) {
  using Kind = Violation::Kind;
  ValidationReport report;
  auto& out = report.violations;
  for (int a = 0; a < kNumActions; ++a) {
    for (int s = 0; s < kNumStates; ++s) {
      double row = 0.0;
      for (int n = 0; n < kNumStates; ++n) {
        const double p = arm.prob(a, s, n);
        row += p;
        if (!(p > 0.0 && p < 1.0)) {
          out.push_back({Kind::kEntryOutOfRange, a, s, n, -1});
        }
      }
      if (!(std::abs(row - 1.0) <= 1e-12)) {
        out.push_back({Kind::kRowSum, a, s, -1, -1});
      }
    }
    if (!(arm.prob(a, 0, 1) < arm.prob(a, 1, 1))) {
      out.push_back({Kind::kDesirableOrdering, a, -1, -1, -1});
    }
  }
  for (int a = 0; a < kNumActions; ++a) {
    for (int b = a + 1; b < kNumActions; ++b) {
      for (int s = 0; s < kNumStates; ++s) {
        if (!(arm.prob(a, s, 1) < arm.prob(b, s, 1))) {
          out.push_back({Kind::kActionOrdering, a, s, -1, b});
        }
      }
    }
  }
  return report;
}

ArmModel sample_arm(std::mt19937_64& rng, int id,
                    const ArmSamplerOptions& options) {
  const double m = options.margin;
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
  };
  // Ranges that force ties after clamping would reject forever.
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double lo = std::max(m, options.base[0]);
    const double hi = std::min(1.0 - 3.0 * m, options.base[1]);
    double p0 = uniform(lo, hi);
    double p1 = uniform(lo, hi);
    if (p0 > p1) std::swap(p0, p1);
    if (p1 - p0 < m) continue;

    std::array<std::array<double, 2>, 3> to_one{};
    to_one[0] = {p0, p1};
    for (int a = 1; a < kNumActions; ++a) {
      const auto& range = a == 1 ? options.message_increment
                                 : options.pull_increment;
      const double ceiling = 1.0 - static_cast<double>(kNumActions - a) * m;
      for (int s = 0; s < kNumStates; ++s) {
        const double inc = uniform(std::max(m, range[0]), std::max(m, range[1]));
        to_one[a][s] = std::min(to_one[a - 1][s] + inc, ceiling);
      }
    }
    // Clamping can tie the two states of one action; redraw when it does.
    ArmModel arm = ArmModel::from_next_desirable(id, to_one);
    if (validate_structural(arm).ok()) return arm;
  }
  throw std::invalid_argument("sampler ranges cannot produce a valid arm");
}

CostModel::CostModel(Milli psi) : psi_(psi) {
  if (psi < 0 || psi >= kMilliPerUnit) {
    throw std::invalid_argument("message cost must lie in [0, 1000) milli");
  }
}

Milli CostModel::cost(Action a) const {
  switch (a) {
    case Action::kNoAct:
      return 0;
    case Action::kMessage:
      return psi_;
    case Action::kPull:
      return kMilliPerUnit;
  }
  return 0;
}

Milli total_cost(std::span<const Action> actions, const CostModel& cost) {
  Milli total = 0;
  for (Action a : actions) total += cost.cost(a);
  return total;
}

Cohort::Cohort(std::vector<ArmModel> arms, CostModel cost, double beta,
               Milli budget, int horizon)
    : arms_(std::move(arms)),
      cost_(cost),
      beta_(beta),
      budget_(budget),
      horizon_(horizon) {
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (arms_[i].id() != static_cast<int>(i)) {
      throw std::invalid_argument("arm ids must be 0..n-1 in order");
    }
  }
  if (!(beta_ > 0.0 && beta_ < 1.0)) {
    throw std::invalid_argument("discount must lie in (0,1)");
  }
  if (budget_ < 0) throw std::invalid_argument("budget must be >= 0");
  if (horizon_ < 0) throw std::invalid_argument("horizon must be >= 0");
}

Cohort Cohort::with_budget(Milli budget) const {
  return Cohort(arms_, cost_, beta_, budget, horizon_);
}

Cohort Cohort::with_psi(Milli psi) const {
  return Cohort(arms_, CostModel(psi), beta_, budget_, horizon_);
}

Cohort Cohort::with_horizon(int horizon) const {
  return Cohort(arms_, cost_, beta_, budget_, horizon);
}

Cohort sample_cohort(std::size_t n, std::uint64_t seed, double beta,
                     Milli budget, Milli psi, int horizon,
                     const ArmSamplerOptions& options) {
  auto rng = make_engine(seed, 0xc0407);
  std::vector<ArmModel> arms;
  arms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    arms.push_back(sample_arm(rng, static_cast<int>(i), options));
  }
  return Cohort(std::move(arms), CostModel(psi), beta, budget, horizon);
}

nlohmann::json cohort_to_json(const Cohort& cohort) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& arm : cohort.arms()) {
    nlohmann::json tensor = nlohmann::json::array();
    for (int a = 0; a < kNumActions; ++a) {
      nlohmann::json rows = nlohmann::json::array();
      for (int s = 0; s < kNumStates; ++s) {
        rows.push_back({arm.prob(a, s, 0), arm.prob(a, s, 1)});
      }
      tensor.push_back(std::move(rows));
    }
    arms.push_back(std::move(tensor));
  }
  return {{"beta", cohort.beta()},
          {"budget_milli", cohort.budget()},
          {"psi_milli", cohort.cost().psi()},
          {"horizon", cohort.horizon()},
          {"arms", std::move(arms)}};
}

Cohort cohort_from_json(const nlohmann::json& doc) {
  std::vector<ArmModel> arms;
  const auto& list = doc.at("arms");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& tensor = list[i];
    if (tensor.size() != kNumActions) {
      throw std::invalid_argument("arm tensor must have 3 action slices");
    }
    ArmModel::Tensor t{};
    for (int a = 0; a < kNumActions; ++a) {
      const auto& rows = tensor[a];
      if (rows.size() != kNumStates) {
        throw std::invalid_argument("action slice must have 2 rows");
      }
      for (int s = 0; s < kNumStates; ++s) {
        if (rows[s].size() != kNumStates) {
          throw std::invalid_argument("row must have 2 entries");
        }
        for (int n = 0; n < kNumStates; ++n) {
          t[ArmModel::flat(a, s, n)] = rows[s][n].get<double>();
        }
      }
    }
    arms.emplace_back(static_cast<int>(i), t);
  }
  return Cohort(std::move(arms), CostModel(doc.at("psi_milli").get<Milli>()),
                doc.at("beta").get<double>(),
                doc.at("budget_milli").get<Milli>(),
                doc.at("horizon").get<int>());
}

}  // namespace netrmab
