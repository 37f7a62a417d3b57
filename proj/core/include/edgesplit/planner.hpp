#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgesplit/device.hpp"
#include "edgesplit/modelfit.hpp"

namespace edgesplit {

enum class ObjectiveKind { kMinTime, kMinEnergy, kWeighted };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kMinTime;
  // Used only by kWeighted; both >= 0 and summing to 1.
  double weight_time = 0.5;
  double weight_energy = 0.5;

  static Objective min_time() { return {ObjectiveKind::kMinTime, 1.0, 0.0}; }
  static Objective min_energy() { return {ObjectiveKind::kMinEnergy, 0.0, 1.0}; }
  static Objective weighted(double weight_time);
};

ObjectiveKind parse_objective(std::string_view name);

struct Constraints {
  std::size_t max_containers = 1;
  std::optional<double> power_cap;              // watts, absolute
  std::optional<double> marginal_gain_epsilon;  // on normalized metrics
};

inline constexpr double kDefaultMarginalGainEpsilon = 0.02;

struct Prediction {
  std::size_t n = 0;
  double objective = 0.0;
  double time_ratio = 0.0;
  double energy_ratio = 0.0;
  double power_ratio = 0.0;
  double time_s = 0.0;
  double energy_j = 0.0;
  double power_w = 0.0;
  bool feasible = true;
};

struct PlanDecision {
  Prediction chosen;
  std::vector<Prediction> evaluated;  // n = 1..candidate_limit
  std::size_t candidate_limit = 0;
  // Vertex of a convex quadratic objective model; informational only.
  std::optional<double> continuous_minimizer;
};

// Exhaustive integer search over n = 1..max_containers. n whose predicted
// absolute power exceeds the cap is skipped; ties go to the smaller n.
// `power` may be null when no power cap is set, in which case the power ratio
// is derived as energy_ratio / time_ratio.
PlanDecision optimal_containers(const PerfModel& time, const PerfModel& energy,
                                const PerfModel* power, const Objective& objective,
                                const Constraints& constraints,
                                const DeviceProfile& device);

// Smallest n whose next step improves the curve by less than epsilon, or
// max_containers when it never flattens.
std::size_t marginal_gain_cutoff(const std::function<double(std::size_t)>& curve,
                                 double epsilon, std::size_t max_containers);
std::size_t marginal_gain_cutoff(const PerfModel& model, double epsilon,
                                 std::size_t max_containers);

// Metric value per container count.
using MetricSeries = std::map<std::size_t, double>;

MetricSeries series_from_points(std::span<const DataPoint> points);
MetricSeries series_from_model(const PerfModel& model, std::size_t max_containers);

struct SavingsRow {
  std::size_t n = 0;
  std::optional<double> time_ratio;
  std::optional<double> energy_ratio;
  std::optional<double> power_ratio;
  std::optional<double> time_saving_pct;
  std::optional<double> energy_saving_pct;
  std::optional<double> power_increase_pct;
};

struct SavingsReport {
  std::vector<SavingsRow> rows;
  const SavingsRow* row(std::size_t n) const;
};

// Percentages relative to each series' own n = 1 value.
SavingsReport savings_report(const std::optional<MetricSeries>& time,
                             const std::optional<MetricSeries>& energy,
                             const std::optional<MetricSeries>& power,
                             std::size_t max_containers);

// `n,time_saving_pct,energy_saving_pct,power_increase_pct`; absent metrics
// leave the field empty.
std::string to_csv(const SavingsReport& report);

}  // namespace edgesplit
