#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace edgesplit {

// Fractional CPU allocation held in hundredths of a core, the granularity of
// a container runtime's `--cpus` flag.
class CpuShare {
 public:
  constexpr CpuShare() = default;
  static constexpr CpuShare from_hundredths(std::int64_t h) { return CpuShare(h); }
  // Truncates toward zero at two decimals.
  static CpuShare truncate(double cores);

  constexpr std::int64_t hundredths() const { return hundredths_; }
  constexpr double cores() const { return static_cast<double>(hundredths_) / 100.0; }
  std::string str() const;  // always two decimals, e.g. "2.00"

  friend constexpr auto operator<=>(CpuShare, CpuShare) = default;

 private:
  constexpr explicit CpuShare(std::int64_t h) : hundredths_(h) {}
  std::int64_t hundredths_ = 0;
};

struct Segment {
  std::size_t index = 0;
  std::uint64_t start_unit = 0;  // inclusive
  std::uint64_t size = 0;

  std::uint64_t end_unit() const { return start_unit + size; }  // exclusive
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SplitPlan {
  std::uint64_t total_work_units = 0;
  std::size_t n_containers = 0;
  std::vector<Segment> segments;
  CpuShare cpu_share_per_container;
  double total_cores = 0.0;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

// Output of one worker. `outputs` holds one opaque record per work unit, in
// unit order.
struct SegmentResult {
  std::size_t segment_index = 0;
  std::vector<std::string> outputs;
  double worker_seconds = 0.0;
};

// Contiguous temporal split: the first (W mod n) segments receive one extra
// unit; every container gets total_cores / n truncated to two decimals.
SplitPlan make_split_plan(std::uint64_t total_work_units, std::size_t n_containers,
                          double total_cores);

// Throws DataError if the plan breaks any SplitPlan invariant.
void validate(const SplitPlan& plan);

// Concatenates worker outputs in segment order, whatever order they arrived in.
std::vector<std::string> merge_segments(std::span<const SegmentResult> results,
                                        const SplitPlan& plan);

// Key-value text form consumed by the executor and the CLI.
std::string to_text(const SplitPlan& plan);
SplitPlan split_plan_from_text(const std::string& text);

}  // namespace edgesplit
