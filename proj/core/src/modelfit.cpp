#include "edgesplit/modelfit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "edgesplit/error.hpp"
#include "edgesplit/kv_text.hpp"

namespace edgesplit {

namespace {

void check_points(std::span<const DataPoint> points) {
  for (const DataPoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DataError("data point has a non-finite coordinate");
    }
    if (!(p.x > 0.0)) throw DataError("data point x must be > 0");
  }
}

std::size_t distinct_x(std::span<const DataPoint> points) {
  std::set<double> xs;
  for (const DataPoint& p : points) xs.insert(p.x);
  return xs.size();
}

// Solves a 3x3 system by Gaussian elimination with partial pivoting.
std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> m) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (m[pivot][col] == 0.0) throw DataError("normal equations are singular");
    std::swap(m[col], m[pivot]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
    }
  }
  std::array<double, 3> x{};
  for (int r = 2; r >= 0; --r) {
    double acc = m[r][3];
    for (int k = r + 1; k < 3; ++k) acc -= m[r][k] * x[k];
    x[r] = acc / m[r][r];
  }
  return x;
}

struct LinearFit {
  double amp = 0.0;
  double floor = 0.0;
  double sse = 0.0;
};

// Best (amp, floor) for a fixed rate, in centered form.
LinearFit solve_for_rate(std::span<const DataPoint> points, double rate) {
  const double n = static_cast<double>(points.size());
  double g_mean = 0.0;
  double y_mean = 0.0;
  for (const DataPoint& p : points) {
    g_mean += std::exp(-rate * p.x);
    y_mean += p.y;
  }
  g_mean /= n;
  y_mean /= n;
  double sgg = 0.0;
  double sgy = 0.0;
  for (const DataPoint& p : points) {
    const double dg = std::exp(-rate * p.x) - g_mean;
    sgg += dg * dg;
    sgy += dg * (p.y - y_mean);
  }
  LinearFit fit;
  fit.amp = sgg > 0.0 ? sgy / sgg : 0.0;
  fit.floor = y_mean - fit.amp * g_mean;
  for (const DataPoint& p : points) {
    const double r = p.y - (fit.floor + fit.amp * std::exp(-rate * p.x));
    fit.sse += r * r;
  }
  return fit;
}

constexpr double kRateMin = 0.01;
constexpr double kRateMax = 10.0;
constexpr int kRateGridSize = 400;
constexpr double kGoldenTolerance = 1e-10;

}  // namespace

ModelFamily parse_family(std::string_view name) {
  if (name == "quadratic") return ModelFamily::kQuadratic;
  if (name == "exp") return ModelFamily::kExponential;
  if (name == "auto") return ModelFamily::kAuto;
  throw InvalidArgument("unknown model family '" + std::string(name) + "'");
}

std::string_view family_name(const PerfModel& model) {
  return std::holds_alternative<QuadraticModel>(model) ? "quadratic" : "exp";
}

NormalizedMetrics normalize_metrics(const RunMetrics& run, const RunMetrics& reference) {
  if (!(reference.wall_time > 0.0) || !(reference.energy > 0.0) ||
      !(reference.avg_power > 0.0)) {
    throw InvalidArgument("reference time, energy and power must all be > 0");
  }
  NormalizedMetrics out{run.wall_time / reference.wall_time,
                        run.energy / reference.energy,
                        run.avg_power / reference.avg_power};
  if (!(out.time_ratio > 0.0) || !(out.energy_ratio > 0.0) || !(out.power_ratio > 0.0)) {
    throw DataError("run metrics must all be > 0");
  }
  if (std::abs(out.energy_ratio - out.time_ratio * out.power_ratio) >
      kEnergyIdentityTolerance) {
    throw DataError("normalized energy disagrees with time x power by more than 0.01");
  }
  return out;
}

QuadraticModel fit_quadratic(std::span<const DataPoint> points) {
  check_points(points);
  if (points.size() < 3 || distinct_x(points) < 3) {
    throw DataError("quadratic fit needs at least 3 distinct x values");
  }
  // Sums of x^k for k = 0..4 and x^k * y for k = 0..2.
  std::array<double, 5> sx{};
  std::array<double, 3> sxy{};
  for (const DataPoint& p : points) {
    double xk = 1.0;
    for (int k = 0; k < 5; ++k) {
      sx[k] += xk;
      if (k < 3) sxy[k] += xk * p.y;
      xk *= p.x;
    }
  }
  // Unknown order (a, b, c) pairs with powers (2, 1, 0).
  const std::array<std::array<double, 4>, 3> normal{{
      {sx[4], sx[3], sx[2], sxy[2]},
      {sx[3], sx[2], sx[1], sxy[1]},
      {sx[2], sx[1], sx[0], sxy[0]},
  }};
  auto coef = solve3(normal);

  // One step of iterative refinement against the unfactored system.
  std::array<std::array<double, 4>, 3> correction = normal;
  for (int r = 0; r < 3; ++r) {
    correction[r][3] = normal[r][3] - (normal[r][0] * coef[0] + normal[r][1] * coef[1] +
                                       normal[r][2] * coef[2]);
  }
  const auto delta = solve3(correction);
  for (int i = 0; i < 3; ++i) coef[i] += delta[i];

  QuadraticModel m{coef[0], coef[1], coef[2], 0.0};
  m.rmse = rmse(PerfModel{m}, points);
  return m;
}

SaturatingExpModel fit_saturating_exp(std::span<const DataPoint> points) {
  check_points(points);
  if (points.size() < 4 || distinct_x(points) < 4) {
    throw DataError("exponential fit needs at least 4 distinct x values");
  }

  const double log_lo = std::log(kRateMin);
  const double step = (std::log(kRateMax) - log_lo) / (kRateGridSize - 1);
  std::vector<double> grid(kRateGridSize);
  int best = 0;
  double best_sse = 0.0;
  for (int i = 0; i < kRateGridSize; ++i) {
    grid[i] = std::exp(log_lo + step * i);
    const double sse = solve_for_rate(points, grid[i]).sse;
    if (i == 0 || sse < best_sse) {
      best = i;
      best_sse = sse;
    }
  }

  double lo = grid[std::max(best - 1, 0)];
  double hi = grid[std::min(best + 1, kRateGridSize - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = solve_for_rate(points, x1).sse;
  double f2 = solve_for_rate(points, x2).sse;
  while (hi - lo > kGoldenTolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = solve_for_rate(points, x1).sse;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = solve_for_rate(points, x2).sse;
    }
  }
  double rate = 0.5 * (lo + hi);
  LinearFit fit = solve_for_rate(points, rate);
  if (fit.sse > best_sse) {
    rate = grid[best];
    fit = solve_for_rate(points, rate);
  }

  SaturatingExpModel m;
  m.amp = fit.amp;
  m.rate = rate;
  m.floor = fit.floor;
  m.rmse = std::sqrt(fit.sse / static_cast<double>(points.size()));
  const auto [ymin, ymax] = std::minmax_element(
      points.begin(), points.end(),
      [](const DataPoint& a, const DataPoint& b) { return a.y < b.y; });
  m.degenerate = ymin->y == ymax->y;
  if (m.degenerate) m.amp = 0.0;
  return m;
}

PerfModel fit_model(std::span<const DataPoint> points, ModelFamily family) {
  switch (family) {
    case ModelFamily::kQuadratic:
      return fit_quadratic(points);
    case ModelFamily::kExponential:
      return fit_saturating_exp(points);
    case ModelFamily::kAuto:
      break;
  }
  const QuadraticModel quad = fit_quadratic(points);
  if (distinct_x(points) < 4) return quad;
  const SaturatingExpModel expo = fit_saturating_exp(points);
  if (expo.rmse < quad.rmse) return expo;
  return quad;
}

double predict(const QuadraticModel& m, double x) { return (m.a * x + m.b) * x + m.c; }

double predict(const SaturatingExpModel& m, double x) {
  return m.floor + m.amp * std::exp(-m.rate * x);
}

double predict(const PerfModel& m, double x) {
  return std::visit([x](const auto& model) { return predict(model, x); }, m);
}

double rmse(const PerfModel& m, std::span<const DataPoint> points) {
  if (points.empty()) return 0.0;
  double sse = 0.0;
  for (const DataPoint& p : points) {
    const double r = p.y - predict(m, p.x);
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(points.size()));
}

std::string to_text(const FittedModel& fm) {
  KvDocument doc;
  doc.set("family", std::string(family_name(fm.model)));
  if (const auto* q = std::get_if<QuadraticModel>(&fm.model)) {
    doc.set("coeff_a", q->a);
    doc.set("coeff_b", q->b);
    doc.set("coeff_c", q->c);
    doc.set("rmse", q->rmse);
  } else {
    const auto& e = std::get<SaturatingExpModel>(fm.model);
    doc.set("amp", e.amp);
    doc.set("rate", e.rate);
    doc.set("floor", e.floor);
    doc.set("rmse", e.rmse);
    doc.set("degenerate", std::string(e.degenerate ? "1" : "0"));
  }
  doc.set("reference_value", fm.reference_value);
  doc.set("reference_unit", fm.reference_unit);
  return doc.to_string();
}

FittedModel fitted_model_from_text(const std::string& text) {
  const KvDocument doc = KvDocument::parse(text);
  FittedModel fm;
  const std::string& family = doc.get("family");
  if (family == "quadratic") {
    fm.model = QuadraticModel{doc.get_double("coeff_a"), doc.get_double("coeff_b"),
                              doc.get_double("coeff_c"), doc.get_double("rmse")};
  } else if (family == "exp") {
    SaturatingExpModel e;
    e.amp = doc.get_double("amp");
    e.rate = doc.get_double("rate");
    e.floor = doc.get_double("floor");
    e.rmse = doc.get_double("rmse");
    e.degenerate = doc.contains("degenerate") && doc.get("degenerate") == "1";
    if (!(e.rate > 0.0)) throw DataError("exponential model rate must be > 0");
    fm.model = e;
  } else {
    throw DataError("unknown model family '" + family + "'");
  }
  fm.reference_value = doc.get_double("reference_value");
  fm.reference_unit = doc.get("reference_unit");
  return fm;
}

std::vector<DataPoint> points_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<DataPoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "x,value") throw DataError("points file: expected header 'x,value'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw DataError("missing comma");
      points.push_back({parse_double(line.substr(0, comma)),
                        parse_double(line.substr(comma + 1))});
    } catch (const DataError&) {
      throw DataError("points file: parse error at line " + std::to_string(line_no));
    }
  }
  if (points.empty()) throw DataError("points file: no data rows");
  check_points(points);
  return points;
}

std::string to_csv(std::span<const DataPoint> points) {
  std::string out = "x,value\n";
  for (const DataPoint& p : points) {
    out += format_exact(p.x) + ',' + format_exact(p.y) + '\n';
  }
  return out;
}

}  // namespace edgesplit
