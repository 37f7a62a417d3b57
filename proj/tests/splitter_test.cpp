#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "edgesplit/error.hpp"
#include "edgesplit/splitter.hpp"

namespace edgesplit {
namespace {

std::vector<std::uint64_t> sizes(const SplitPlan& plan) {
  std::vector<std::uint64_t> out;
  for (const Segment& s : plan.segments) out.push_back(s.size);
  return out;
}

// Stand-in worker: one output per unit, named after the unit.
SegmentResult fake_result(const Segment& s) {
  SegmentResult r;
  r.segment_index = s.index;
  for (std::uint64_t u = s.start_unit; u < s.end_unit(); ++u) {
    r.outputs.push_back(std::to_string(u));
  }
  return r;
}

TEST(SplitPlanTest, ExactDivision) {
  const SplitPlan plan = make_split_plan(900, 4, 4.0);
  EXPECT_EQ(sizes(plan), (std::vector<std::uint64_t>{225, 225, 225, 225}));
  EXPECT_EQ(plan.cpu_share_per_container.str(), "1.00");
  EXPECT_EQ(plan.segments[2].start_unit, 450u);
}

TEST(SplitPlanTest, TwoContainersOnFourCores) {
  const SplitPlan plan = make_split_plan(901, 2, 4.0);
  EXPECT_EQ(plan.cpu_share_per_container.str(), "2.00");
  EXPECT_EQ(sizes(plan), (std::vector<std::uint64_t>{451, 450}));
}

TEST(SplitPlanTest, RemainderGoesToLowestIndices) {
  const SplitPlan plan = make_split_plan(10, 3, 12.0);
  EXPECT_EQ(sizes(plan), (std::vector<std::uint64_t>{4, 3, 3}));
  EXPECT_EQ(plan.cpu_share_per_container.str(), "4.00");
}

TEST(SplitPlanTest, ShareTruncatesToTwoDecimals) {
  EXPECT_EQ(make_split_plan(100, 3, 1.0).cpu_share_per_container.str(), "0.33");
  EXPECT_EQ(make_split_plan(100, 6, 4.0).cpu_share_per_container.str(), "0.66");
  EXPECT_EQ(make_split_plan(100, 7, 12.0).cpu_share_per_container.str(), "1.71");
  EXPECT_EQ(CpuShare::truncate(0.29).str(), "0.29");
}

TEST(SplitPlanTest, RejectsBadInputs) {
  EXPECT_THROW(make_split_plan(0, 1, 4.0), InvalidArgument);
  EXPECT_THROW(make_split_plan(10, 0, 4.0), InvalidArgument);
  EXPECT_THROW(make_split_plan(10, 2, 0.0), InvalidArgument);
  EXPECT_THROW(make_split_plan(10, 2, -1.0), InvalidArgument);
  EXPECT_THROW(make_split_plan(3, 4, 4.0), InvalidArgument);
}

TEST(SplitPlanTest, InvariantsHoldForRandomInputs) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 2000; ++iter) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    const std::uint64_t w = std::uniform_int_distribution<std::uint64_t>(n, 100000)(rng);
    const double cores = std::uniform_real_distribution<double>(n * 0.01, 64.0)(rng);
    const SplitPlan plan = make_split_plan(w, n, cores);
    ASSERT_NO_THROW(validate(plan));
    const auto s = sizes(plan);
    std::uint64_t total = 0;
    for (auto v : s) total += v;
    EXPECT_EQ(total, w);
    EXPECT_LE(*std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end()),
              1u);
    EXPECT_LE(plan.cpu_share_per_container.cores() * n, cores + 0.005);
    EXPECT_EQ(plan, make_split_plan(w, n, cores));
  }
}

TEST(MergeTest, PreservesUnitOrder) {
  const SplitPlan plan = make_split_plan(10, 2, 4.0);
  std::vector<SegmentResult> results{fake_result(plan.segments[0]),
                                     fake_result(plan.segments[1])};
  const auto merged = merge_segments(results, plan);
  ASSERT_EQ(merged.size(), 10u);
  for (std::size_t i = 0; i < merged.size(); ++i) EXPECT_EQ(merged[i], std::to_string(i));
}

TEST(MergeTest, ArrivalOrderDoesNotMatter) {
  const SplitPlan plan = make_split_plan(10, 2, 4.0);
  std::vector<SegmentResult> in_order{fake_result(plan.segments[0]),
                                      fake_result(plan.segments[1])};
  std::vector<SegmentResult> reversed{in_order[1], in_order[0]};
  EXPECT_EQ(merge_segments(in_order, plan), merge_segments(reversed, plan));
}

TEST(MergeTest, MissingSegmentIsIncomplete) {
  const SplitPlan plan = make_split_plan(10, 2, 4.0);
  std::vector<SegmentResult> results{fake_result(plan.segments[1])};
  try {
    merge_segments(results, plan);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("incomplete results"), std::string::npos);
  }
}

TEST(MergeTest, RejectsDuplicatesAndSizeMismatch) {
  const SplitPlan plan = make_split_plan(10, 2, 4.0);
  std::vector<SegmentResult> dup{fake_result(plan.segments[0]),
                                 fake_result(plan.segments[0])};
  EXPECT_THROW(merge_segments(dup, plan), DataError);

  std::vector<SegmentResult> short_one{fake_result(plan.segments[0]),
                                       fake_result(plan.segments[1])};
  short_one[1].outputs.pop_back();
  EXPECT_THROW(merge_segments(short_one, plan), DataError);

  std::vector<SegmentResult> unknown{fake_result(plan.segments[0]),
                                     fake_result(plan.segments[1])};
  unknown[1].segment_index = 5;
  EXPECT_THROW(merge_segments(unknown, plan), DataError);
}

TEST(MergeTest, SplitThenMergeIsIdentity) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const std::uint64_t w = std::uniform_int_distribution<std::uint64_t>(n, 10000)(rng);
    const SplitPlan plan = make_split_plan(w, n, 12.0);
    std::vector<SegmentResult> results;
    for (const Segment& s : plan.segments) results.push_back(fake_result(s));
    std::shuffle(results.begin(), results.end(), rng);
    const auto merged = merge_segments(results, plan);
    ASSERT_EQ(merged.size(), w);
    for (std::uint64_t u = 0; u < w; u += 97) EXPECT_EQ(merged[u], std::to_string(u));
    EXPECT_EQ(merged.back(), std::to_string(w - 1));
  }
}

TEST(SplitPlanTextTest, RoundTrips) {
  const SplitPlan plan = make_split_plan(1001, 7, 12.0);
  const std::string text = to_text(plan);
  EXPECT_NE(text.find("cpu_share_per_container=1.71\n"), std::string::npos);
  EXPECT_NE(text.find("n_containers=7\n"), std::string::npos);
  EXPECT_EQ(split_plan_from_text(text), plan);
}

TEST(SplitPlanTextTest, RejectsInconsistentDocuments) {
  std::string text = to_text(make_split_plan(10, 2, 4.0));
  text.replace(text.find("total_work_units=10"), 19, "total_work_units=11");
  EXPECT_THROW(split_plan_from_text(text), DataError);
  EXPECT_THROW(split_plan_from_text("n_containers=2\n"), DataError);
}

}  // namespace
}  // namespace edgesplit
