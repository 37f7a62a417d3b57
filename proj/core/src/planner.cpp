#include "edgesplit/planner.hpp"

#include <cmath>

#include "edgesplit/error.hpp"
#include "edgesplit/kv_text.hpp"

namespace edgesplit {

Objective Objective::weighted(double weight_time) {
  if (!(weight_time >= 0.0 && weight_time <= 1.0)) {
    throw InvalidArgument("time weight must be in [0, 1]");
  }
  return {ObjectiveKind::kWeighted, weight_time, 1.0 - weight_time};
}

ObjectiveKind parse_objective(std::string_view name) {
  if (name == "min_time") return ObjectiveKind::kMinTime;
  if (name == "min_energy") return ObjectiveKind::kMinEnergy;
  if (name == "weighted") return ObjectiveKind::kWeighted;
  throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

namespace {

double objective_value(const Objective& objective, double time_ratio,
                       double energy_ratio) {
  switch (objective.kind) {
    case ObjectiveKind::kMinTime:
      return time_ratio;
    case ObjectiveKind::kMinEnergy:
      return energy_ratio;
    case ObjectiveKind::kWeighted:
      return objective.weight_time * time_ratio + objective.weight_energy * energy_ratio;
  }
  return time_ratio;
}

void check_objective(const Objective& objective) {
  if (objective.kind != ObjectiveKind::kWeighted) return;
  if (objective.weight_time < 0.0 || objective.weight_energy < 0.0 ||
      std::abs(objective.weight_time + objective.weight_energy - 1.0) > 1e-12) {
    throw InvalidArgument("objective weights must be >= 0 and sum to 1");
  }
}

}  // namespace

PlanDecision optimal_containers(const PerfModel& time, const PerfModel& energy,
                                const PerfModel* power, const Objective& objective,
                                const Constraints& constraints,
                                const DeviceProfile& device) {
  check_objective(objective);
  if (constraints.max_containers < 1) throw InvalidArgument("max_containers must be >= 1");
  if (constraints.max_containers > device.max_containers) {
    throw InvalidArgument("max_containers exceeds the device limit of " +
                          std::to_string(device.max_containers));
  }
  if (constraints.power_cap && power == nullptr) {
    throw InvalidArgument("a power cap needs a power model");
  }
  if (constraints.marginal_gain_epsilon && !(*constraints.marginal_gain_epsilon > 0.0)) {
    throw InvalidArgument("marginal gain epsilon must be > 0");
  }

  PlanDecision decision;
  decision.candidate_limit = constraints.max_containers;
  if (constraints.marginal_gain_epsilon) {
    decision.candidate_limit = marginal_gain_cutoff(
        [&](std::size_t n) {
          const double x = static_cast<double>(n);
          return objective_value(objective, predict(time, x), predict(energy, x));
        },
        *constraints.marginal_gain_epsilon, constraints.max_containers);
  }

  std::optional<std::size_t> best;
  for (std::size_t n = 1; n <= decision.candidate_limit; ++n) {
    const double x = static_cast<double>(n);
    Prediction p;
    p.n = n;
    p.time_ratio = predict(time, x);
    p.energy_ratio = predict(energy, x);
    p.power_ratio = power ? predict(*power, x) : p.energy_ratio / p.time_ratio;
    p.time_s = device.ref_time * p.time_ratio;
    p.energy_j = device.ref_energy * p.energy_ratio;
    p.power_w = device.ref_power * p.power_ratio;
    p.objective = objective_value(objective, p.time_ratio, p.energy_ratio);
    p.feasible = !(constraints.power_cap && p.power_w > *constraints.power_cap);
    decision.evaluated.push_back(p);
    if (p.feasible && (!best || p.objective < decision.evaluated[*best].objective)) {
      best = decision.evaluated.size() - 1;
    }
  }
  if (!best) throw DataError("no container count satisfies the constraints");
  decision.chosen = decision.evaluated[*best];

  const PerfModel* objective_model = nullptr;
  if (objective.kind == ObjectiveKind::kMinTime) objective_model = &time;
  if (objective.kind == ObjectiveKind::kMinEnergy) objective_model = &energy;
  if (objective_model) {
    if (const auto* q = std::get_if<QuadraticModel>(objective_model); q && q->a > 0.0) {
      decision.continuous_minimizer = -q->b / (2.0 * q->a);
    }
  }
  return decision;
}

std::size_t marginal_gain_cutoff(const std::function<double(std::size_t)>& curve,
                                 double epsilon, std::size_t max_containers) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (max_containers < 1) throw InvalidArgument("max_containers must be >= 1");
  for (std::size_t n = 1; n < max_containers; ++n) {
    if (curve(n) - curve(n + 1) < epsilon) return n;
  }
  return max_containers;
}

std::size_t marginal_gain_cutoff(const PerfModel& model, double epsilon,
                                 std::size_t max_containers) {
  return marginal_gain_cutoff(
      [&](std::size_t n) { return predict(model, static_cast<double>(n)); }, epsilon,
      max_containers);
}

MetricSeries series_from_points(std::span<const DataPoint> points) {
  MetricSeries series;
  for (const DataPoint& p : points) {
    if (!(p.x >= 1.0) || p.x != std::floor(p.x)) {
      throw DataError("container counts must be positive integers");
    }
    const auto n = static_cast<std::size_t>(p.x);
    if (!series.emplace(n, p.y).second) {
      throw DataError("duplicate container count " + std::to_string(n));
    }
  }
  return series;
}

MetricSeries series_from_model(const PerfModel& model, std::size_t max_containers) {
  MetricSeries series;
  for (std::size_t n = 1; n <= max_containers; ++n) {
    series[n] = predict(model, static_cast<double>(n));
  }
  return series;
}

const SavingsRow* SavingsReport::row(std::size_t n) const {
  for (const SavingsRow& r : rows) {
    if (r.n == n) return &r;
  }
  return nullptr;
}

SavingsReport savings_report(const std::optional<MetricSeries>& time,
                             const std::optional<MetricSeries>& energy,
                             const std::optional<MetricSeries>& power,
                             std::size_t max_containers) {
  if (!time && !energy && !power) throw InvalidArgument("no metric series given");
  const auto base = [](const std::optional<MetricSeries>& s,
                       const char* what) -> std::optional<double> {
    if (!s) return std::nullopt;
    const auto it = s->find(1);
    if (it == s->end()) {
      throw DataError(std::string(what) + " series has no n=1 benchmark row");
    }
    if (!(it->second > 0.0)) {
      throw DataError(std::string(what) + " benchmark value must be > 0");
    }
    return it->second;
  };
  const auto t1 = base(time, "time");
  const auto e1 = base(energy, "energy");
  const auto p1 = base(power, "power");

  const auto ratio = [](const std::optional<MetricSeries>& s, std::optional<double> ref,
                        std::size_t n) -> std::optional<double> {
    if (!s) return std::nullopt;
    const auto it = s->find(n);
    if (it == s->end()) return std::nullopt;
    return n == 1 ? 1.0 : it->second / *ref;
  };

  SavingsReport report;
  for (std::size_t n = 1; n <= max_containers; ++n) {
    SavingsRow row;
    row.n = n;
    row.time_ratio = ratio(time, t1, n);
    row.energy_ratio = ratio(energy, e1, n);
    row.power_ratio = ratio(power, p1, n);
    if (!row.time_ratio && !row.energy_ratio && !row.power_ratio) continue;
    if (row.time_ratio) row.time_saving_pct = (1.0 - *row.time_ratio) * 100.0;
    if (row.energy_ratio) row.energy_saving_pct = (1.0 - *row.energy_ratio) * 100.0;
    if (row.power_ratio) row.power_increase_pct = (*row.power_ratio - 1.0) * 100.0;
    report.rows.push_back(row);
  }
  return report;
}

std::string to_csv(const SavingsReport& report) {
  std::string out = "n,time_saving_pct,energy_saving_pct,power_increase_pct\n";
  const auto field = [](const std::optional<double>& v) {
    return v ? format_exact(*v) : std::string();
  };
  for (const SavingsRow& r : report.rows) {
    out += std::to_string(r.n) + ',' + field(r.time_saving_pct) + ',' +
           field(r.energy_saving_pct) + ',' + field(r.power_increase_pct) + '\n';
  }
  return out;
}

}  // namespace edgesplit
