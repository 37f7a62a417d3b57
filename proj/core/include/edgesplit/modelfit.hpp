#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgesplit/metrics.hpp"

namespace edgesplit {

struct DataPoint {
  double x = 0.0;  // container count, or cores for single-container scaling
  double y = 0.0;
  friend bool operator==(const DataPoint&, const DataPoint&) = default;
};

// a*x^2 + b*x + c
struct QuadraticModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double rmse = 0.0;
  friend bool operator==(const QuadraticModel&, const QuadraticModel&) = default;
};

// floor + amp * exp(-rate * x). amp may be negative for rising curves such as
// average power.
struct SaturatingExpModel {
  double amp = 0.0;
  double rate = 0.0;
  double floor = 0.0;
  double rmse = 0.0;
  bool degenerate = false;  // data had no spread; amp is ~0
  friend bool operator==(const SaturatingExpModel&, const SaturatingExpModel&) = default;
};

using PerfModel = std::variant<QuadraticModel, SaturatingExpModel>;

enum class ModelFamily { kQuadratic, kExponential, kAuto };

ModelFamily parse_family(std::string_view name);
std::string_view family_name(const PerfModel& model);

struct NormalizedMetrics {
  double time_ratio = 0.0;
  double energy_ratio = 0.0;
  double power_ratio = 0.0;
};

// Largest tolerated |energy_ratio - time_ratio * power_ratio|.
inline constexpr double kEnergyIdentityTolerance = 0.01;

NormalizedMetrics normalize_metrics(const RunMetrics& run, const RunMetrics& reference);

// Least squares through the 3x3 normal equations. Needs >= 3 distinct x.
QuadraticModel fit_quadratic(std::span<const DataPoint> points);

// Separable least squares: for each candidate rate the best (amp, floor) is a
// closed-form 2x2 solve, so only the rate is searched (log grid over
// [0.01, 10], then golden-section). Needs >= 4 distinct x.
SaturatingExpModel fit_saturating_exp(std::span<const DataPoint> points);

// Fits both families and keeps the lower rmse (quadratic wins ties).
PerfModel fit_model(std::span<const DataPoint> points, ModelFamily family);

double predict(const QuadraticModel& m, double x);
double predict(const SaturatingExpModel& m, double x);
double predict(const PerfModel& m, double x);

double rmse(const PerfModel& m, std::span<const DataPoint> points);

// Model plus the absolute value its ratios are relative to.
struct FittedModel {
  PerfModel model;
  double reference_value = 1.0;
  std::string reference_unit = "ratio";
  friend bool operator==(const FittedModel&, const FittedModel&) = default;
};

// Key-value model file. Coefficients are written in shortest round-trip form,
// so reading a written file yields bit-identical doubles.
std::string to_text(const FittedModel& model);
FittedModel fitted_model_from_text(const std::string& text);

// CSV with header `x,value`.
std::vector<DataPoint> points_from_csv(const std::string& text);
std::string to_csv(std::span<const DataPoint> points);

}  // namespace edgesplit
