#include <gtest/gtest.h>

#include <random>

#include "edgesplit/device.hpp"
#include "edgesplit/error.hpp"
#include "edgesplit/planner.hpp"

namespace edgesplit {
namespace {

const PerfModel kTx2Time = QuadraticModel{0.026, -0.21, 1.17, 0};
const PerfModel kTx2Energy = QuadraticModel{0.015, -0.12, 1.10, 0};
const PerfModel kTx2Power = QuadraticModel{-0.016, 0.12, 0.90, 0};
const PerfModel kOrinTime = SaturatingExpModel{1.77, 0.98, 0.33, 0, false};
const PerfModel kOrinEnergy = SaturatingExpModel{1.14, 1.03, 0.59, 0, false};
const PerfModel kOrinPower = SaturatingExpModel{-1.24, 0.38, 1.85, 0, false};

DeviceProfile tx2() { return *bundled_profile("tx2"); }
DeviceProfile orin() { return *bundled_profile("orin"); }

// Exhaustive oracle: first index of the minimum over n = 1..max.
std::size_t argmin_oracle(const PerfModel& m, std::size_t max) {
  std::size_t best = 1;
  for (std::size_t n = 2; n <= max; ++n) {
    if (predict(m, double(n)) < predict(m, double(best))) best = n;
  }
  return best;
}

TEST(OptimalContainersTest, Tx2MinTimeIsFour) {
  const auto d = optimal_containers(kTx2Time, kTx2Energy, &kTx2Power,
                                    Objective::min_time(), {6, {}, {}}, tx2());
  EXPECT_EQ(d.chosen.n, argmin_oracle(kTx2Time, 6));
  EXPECT_EQ(d.chosen.n, 4u);
  EXPECT_NEAR(d.chosen.objective, 0.746, 1e-12);
  EXPECT_NEAR(d.chosen.time_s, 325.0 * 0.746, 1e-9);
  ASSERT_TRUE(d.continuous_minimizer);
  EXPECT_NEAR(*d.continuous_minimizer, 0.21 / 0.052, 1e-12);
  EXPECT_EQ(d.evaluated.size(), 6u);
}

TEST(OptimalContainersTest, Tx2MinEnergyIsFour) {
  const auto d = optimal_containers(kTx2Time, kTx2Energy, &kTx2Power,
                                    Objective::min_energy(), {6, {}, {}}, tx2());
  EXPECT_EQ(d.chosen.n, 4u);
}

TEST(OptimalContainersTest, OrinMinEnergyIsTwelve) {
  const auto d = optimal_containers(kOrinTime, kOrinEnergy, &kOrinPower,
                                    Objective::min_energy(), {12, {}, {}}, orin());
  EXPECT_EQ(d.chosen.n, 12u);
  EXPECT_FALSE(d.continuous_minimizer);
}

TEST(OptimalContainersTest, ConstantModelTiesToOne) {
  const QuadraticModel flat{0, 0, 0.8, 0};
  const auto d = optimal_containers(flat, flat, nullptr, Objective::min_time(),
                                    {6, {}, {}}, tx2());
  EXPECT_EQ(d.chosen.n, 1u);
}

TEST(OptimalContainersTest, PowerCapExcludesHungryCounts) {
  // Orin power ratio rises with n; 13 W * ratio(n) <= 20 W keeps n <= 3.
  const auto d = optimal_containers(kOrinTime, kOrinEnergy, &kOrinPower,
                                    Objective::min_time(), {12, 20.0, {}}, orin());
  EXPECT_EQ(d.chosen.n, 3u);
  for (const Prediction& p : d.evaluated) {
    EXPECT_EQ(p.feasible, p.power_w <= 20.0);
  }
  EXPECT_THROW(optimal_containers(kOrinTime, kOrinEnergy, &kOrinPower,
                                  Objective::min_time(), {12, 1.0, {}}, orin()),
               DataError);
  EXPECT_THROW(optimal_containers(kOrinTime, kOrinEnergy, nullptr, Objective::min_time(),
                                  {12, 20.0, {}}, orin()),
               InvalidArgument);
}

TEST(OptimalContainersTest, EpsilonCapsCandidates) {
  const auto d = optimal_containers(kOrinTime, kOrinEnergy, &kOrinPower,
                                    Objective::min_energy(), {12, {}, 0.02}, orin());
  EXPECT_EQ(d.candidate_limit, 4u);
  EXPECT_EQ(d.chosen.n, 4u);
}

TEST(OptimalContainersTest, WeightedBlendsNormalizedMetrics) {
  const auto d = optimal_containers(kTx2Time, kTx2Energy, &kTx2Power,
                                    Objective::weighted(0.3), {6, {}, {}}, tx2());
  for (const Prediction& p : d.evaluated) {
    EXPECT_DOUBLE_EQ(p.objective, 0.3 * p.time_ratio + 0.7 * p.energy_ratio);
    EXPECT_LE(d.chosen.objective, p.objective);
  }
  EXPECT_THROW(Objective::weighted(1.5), InvalidArgument);
  Objective bad{ObjectiveKind::kWeighted, 0.6, 0.6};
  EXPECT_THROW(optimal_containers(kTx2Time, kTx2Energy, nullptr, bad, {6, {}, {}}, tx2()),
               InvalidArgument);
}

TEST(OptimalContainersTest, RejectsRangeBeyondDevice) {
  EXPECT_THROW(optimal_containers(kTx2Time, kTx2Energy, nullptr, Objective::min_time(),
                                  {7, {}, {}}, tx2()),
               InvalidArgument);
  EXPECT_THROW(optimal_containers(kTx2Time, kTx2Energy, nullptr, Objective::min_time(),
                                  {0, {}, {}}, tx2()),
               InvalidArgument);
}

TEST(OptimalContainersTest, ChoiceIsNeverBeatenByAFeasibleAlternative) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-0.05, 0.05), b(-0.3, 0.3), c(0.5, 1.5);
  std::uniform_real_distribution<double> cap(10.0, 30.0);
  for (int iter = 0; iter < 300; ++iter) {
    const QuadraticModel t{a(rng), b(rng), c(rng) + 1.0, 0};
    const QuadraticModel e{a(rng), b(rng), c(rng) + 1.0, 0};
    const PerfModel p = QuadraticModel{a(rng), b(rng), c(rng), 0};
    const Constraints cons{12, cap(rng), {}};
    try {
      const auto d = optimal_containers(t, e, &p, Objective::weighted(0.5), cons, orin());
      for (const Prediction& q : d.evaluated) {
        if (q.feasible) { EXPECT_LE(d.chosen.objective, q.objective); }
        if (q.n < d.chosen.n && q.feasible) { EXPECT_LT(d.chosen.objective, q.objective); }
      }
    } catch (const DataError&) {
      // every n over the cap
    }
  }
}

TEST(OptimalContainersTest, DecreasingModelsPickTheMaximum) {
  const QuadraticModel down{0, -0.01, 1.0, 0};
  const auto d = optimal_containers(down, down, nullptr, Objective::min_time(),
                                    {12, {}, {}}, orin());
  EXPECT_EQ(d.chosen.n, 12u);
}

TEST(MarginalGainCutoffTest, OrinEnergyFlattensAtFour) {
  EXPECT_EQ(marginal_gain_cutoff(kOrinEnergy, kDefaultMarginalGainEpsilon, 12), 4u);
}

TEST(MarginalGainCutoffTest, BoundaryCases) {
  const double first_step = predict(kOrinEnergy, 1.0) - predict(kOrinEnergy, 2.0);
  EXPECT_EQ(marginal_gain_cutoff(kOrinEnergy, first_step + 0.01, 12), 1u);
  const QuadraticModel linear{0, -0.1, 2.0, 0};
  EXPECT_EQ(marginal_gain_cutoff(linear, 0.05, 9), 9u);
  EXPECT_EQ(marginal_gain_cutoff(linear, 0.05, 1), 1u);
  EXPECT_THROW(marginal_gain_cutoff(linear, 0.0, 9), InvalidArgument);
}

TEST(MarginalGainCutoffTest, NonIncreasingInEpsilon) {
  for (const PerfModel& m : {PerfModel{kOrinEnergy}, PerfModel{kOrinTime},
                             PerfModel{kTx2Time}, PerfModel{kTx2Energy}}) {
    std::size_t prev = marginal_gain_cutoff(m, 1e-6, 12);
    for (double eps = 1e-6; eps < 1.0; eps *= 1.3) {
      const std::size_t n = marginal_gain_cutoff(m, eps, 12);
      EXPECT_LE(n, prev);
      prev = n;
    }
  }
}

TEST(SavingsReportTest, Tx2FigureData) {
  const MetricSeries time{{1, 1.0}, {2, 0.81}, {3, 0.77}, {4, 0.745}, {5, 0.76}, {6, 0.82}};
  const MetricSeries energy{{1, 1.0},     {2, 0.8883}, {3, 0.8609},
                            {4, 0.8477}, {5, 0.8615}, {6, 0.8832}};
  const SavingsReport r = savings_report(time, energy, std::nullopt, 6);
  const SavingsRow* two = r.row(2);
  ASSERT_NE(two, nullptr);
  EXPECT_NEAR(*two->time_saving_pct, 19.0, 1e-9);
  EXPECT_NEAR(*two->energy_saving_pct, 11.17, 1e-9);
  EXPECT_FALSE(two->power_increase_pct);
  const SavingsRow* one = r.row(1);
  EXPECT_EQ(*one->time_saving_pct, 0.0);
  EXPECT_EQ(*one->energy_saving_pct, 0.0);
}

TEST(SavingsReportTest, OrinFigureData) {
  const MetricSeries time{{1, 1.0}, {2, 0.57}, {4, 0.39}, {6, 0.35},
                          {8, 0.335}, {10, 0.32}, {12, 0.31}};
  const MetricSeries energy{{1, 1.0},   {2, 0.737}, {4, 0.612}, {6, 0.609},
                            {8, 0.602}, {10, 0.586}, {12, 0.58}};
  const MetricSeries power{{1, 1.0}, {2, 1.294}, {4, 1.554}, {6, 1.75},
                           {8, 1.8}, {10, 1.824}, {12, 1.84}};
  const SavingsReport r = savings_report(time, energy, power, 12);
  EXPECT_EQ(r.rows.size(), 7u);
  EXPECT_EQ(r.row(3), nullptr);
  const SavingsRow* twelve = r.row(12);
  EXPECT_NEAR(*twelve->time_saving_pct, 69.0, 1e-9);
  EXPECT_NEAR(*twelve->energy_saving_pct, 42.0, 1e-9);
  EXPECT_NEAR(*twelve->power_increase_pct, 84.0, 1e-9);
  EXPECT_EQ(*r.row(1)->power_increase_pct, 0.0);
  for (const SavingsRow& row : r.rows) {
    EXPECT_NEAR(*row.time_ratio, 1.0 - *row.time_saving_pct / 100.0, 1e-15);
    EXPECT_NEAR(*row.energy_ratio, 1.0 - *row.energy_saving_pct / 100.0, 1e-15);
    EXPECT_NEAR(*row.power_ratio, 1.0 + *row.power_increase_pct / 100.0, 1e-15);
  }
}

TEST(SavingsReportTest, NormalizesAbsoluteSeries) {
  const MetricSeries time{{1, 325.0}, {4, 242.125}};
  const SavingsReport r = savings_report(time, std::nullopt, std::nullopt, 6);
  EXPECT_NEAR(*r.row(4)->time_saving_pct, 25.5, 1e-9);
}

TEST(SavingsReportTest, RequiresBenchmarkRow) {
  const MetricSeries time{{2, 0.81}, {3, 0.77}};
  EXPECT_THROW(savings_report(time, std::nullopt, std::nullopt, 6), DataError);
  EXPECT_THROW(savings_report(std::nullopt, std::nullopt, std::nullopt, 6),
               InvalidArgument);
}

TEST(SavingsReportTest, CsvLayout) {
  const MetricSeries time{{1, 1.0}, {2, 0.75}};
  const std::string csv = to_csv(savings_report(time, std::nullopt, std::nullopt, 2));
  EXPECT_EQ(csv, "n,time_saving_pct,energy_saving_pct,power_increase_pct\n1,0,,\n2,25,,\n");
}

TEST(SeriesTest, FromPointsAndModels) {
  const std::vector<DataPoint> pts{{1, 1.0}, {2, 0.5}};
  EXPECT_EQ(series_from_points(pts).at(2), 0.5);
  const std::vector<DataPoint> fractional{{0.8, 1.0}};
  EXPECT_THROW(series_from_points(fractional), DataError);
  const std::vector<DataPoint> dup{{1, 1.0}, {1, 0.5}};
  EXPECT_THROW(series_from_points(dup), DataError);
  EXPECT_EQ(series_from_model(kTx2Time, 6).size(), 6u);
}

}  // namespace
}  // namespace edgesplit
