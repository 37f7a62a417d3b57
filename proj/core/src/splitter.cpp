#include "edgesplit/splitter.hpp"

#include <cmath>
#include <cstdio>
#include <string_view>

#include "edgesplit/error.hpp"
#include "edgesplit/kv_text.hpp"

namespace edgesplit {

CpuShare CpuShare::truncate(double cores) {
  if (!std::isfinite(cores) || cores < 0.0) {
    throw InvalidArgument("cpu share must be a finite non-negative number");
  }
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  return CpuShare(static_cast<std::int64_t>(std::floor(cores * 100.0 + 1e-9)));
}

std::string CpuShare::str() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld",
                static_cast<long long>(hundredths_ / 100),
                static_cast<long long>(hundredths_ % 100));
  return buf;
}

SplitPlan make_split_plan(std::uint64_t total_work_units, std::size_t n_containers,
                          double total_cores) {
  if (n_containers == 0) throw InvalidArgument("n_containers must be >= 1");
  if (total_work_units == 0) throw InvalidArgument("total_work_units must be >= 1");
  if (!(total_cores > 0.0) || !std::isfinite(total_cores)) {
    throw InvalidArgument("total_cores must be > 0");
  }
  if (n_containers > total_work_units) {
    throw InvalidArgument("n_containers (" + std::to_string(n_containers) +
                          ") exceeds total_work_units (" +
                          std::to_string(total_work_units) + ")");
  }

  SplitPlan plan;
  plan.total_work_units = total_work_units;
  plan.n_containers = n_containers;
  plan.total_cores = total_cores;
  plan.cpu_share_per_container =
      CpuShare::truncate(total_cores / static_cast<double>(n_containers));
  if (plan.cpu_share_per_container.hundredths() == 0) {
    throw InvalidArgument("cpu share per container rounds down to 0.00 cores");
  }

  const std::uint64_t base = total_work_units / n_containers;
  const std::uint64_t remainder = total_work_units % n_containers;
  plan.segments.reserve(n_containers);
  std::uint64_t start = 0;
  for (std::size_t i = 0; i < n_containers; ++i) {
    const std::uint64_t size = base + (i < remainder ? 1 : 0);
    plan.segments.push_back(Segment{i, start, size});
    start += size;
  }
  return plan;
}

void validate(const SplitPlan& plan) {
  if (plan.n_containers == 0 || plan.segments.size() != plan.n_containers) {
    throw DataError("plan has " + std::to_string(plan.segments.size()) +
                    " segments for " + std::to_string(plan.n_containers) +
                    " containers");
  }
  std::uint64_t expected_start = 0;
  std::uint64_t min_size = plan.segments.front().size;
  std::uint64_t max_size = min_size;
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const Segment& s = plan.segments[i];
    if (s.index != i) throw DataError("segment indices are not 0..n-1 in order");
    if (s.start_unit != expected_start) {
      throw DataError("segments are not contiguous at index " + std::to_string(i));
    }
    if (s.size == 0) throw DataError("empty segment at index " + std::to_string(i));
    expected_start += s.size;
    min_size = std::min(min_size, s.size);
    max_size = std::max(max_size, s.size);
  }
  if (expected_start != plan.total_work_units) {
    throw DataError("segment sizes do not sum to total_work_units");
  }
  if (max_size - min_size > 1) throw DataError("segment sizes differ by more than 1");
  if (!(plan.total_cores > 0.0)) throw DataError("total_cores must be > 0");
  const double used = plan.cpu_share_per_container.cores() *
                      static_cast<double>(plan.n_containers);
  if (plan.cpu_share_per_container.hundredths() <= 0 ||
      used > plan.total_cores + 0.005) {
    throw DataError("cpu shares exceed total_cores");
  }
}

std::vector<std::string> merge_segments(std::span<const SegmentResult> results,
                                        const SplitPlan& plan) {
  std::vector<const SegmentResult*> by_index(plan.segments.size(), nullptr);
  for (const SegmentResult& r : results) {
    if (r.segment_index >= by_index.size()) {
      throw DataError("result for unknown segment " + std::to_string(r.segment_index));
    }
    if (by_index[r.segment_index] != nullptr) {
      throw DataError("duplicate result for segment " + std::to_string(r.segment_index));
    }
    if (r.outputs.size() != plan.segments[r.segment_index].size) {
      throw DataError("segment " + std::to_string(r.segment_index) + " returned " +
                      std::to_string(r.outputs.size()) + " outputs, plan expects " +
                      std::to_string(plan.segments[r.segment_index].size));
    }
    by_index[r.segment_index] = &r;
  }

  std::vector<std::string> merged;
  merged.reserve(plan.total_work_units);
  for (std::size_t i = 0; i < by_index.size(); ++i) {
    if (by_index[i] == nullptr) {
      throw DataError("incomplete results: missing segment " + std::to_string(i));
    }
    merged.insert(merged.end(), by_index[i]->outputs.begin(), by_index[i]->outputs.end());
  }
  return merged;
}

std::string to_text(const SplitPlan& plan) {
  KvDocument doc;
  doc.set("total_work_units", std::to_string(plan.total_work_units));
  doc.set("n_containers", std::to_string(plan.n_containers));
  doc.set("cpu_share_per_container", plan.cpu_share_per_container.str());
  doc.set("total_cores", plan.total_cores);
  std::string segs;
  for (const Segment& s : plan.segments) {
    if (!segs.empty()) segs += ',';
    segs += std::to_string(s.index) + ':' + std::to_string(s.start_unit) + ':' +
            std::to_string(s.size);
  }
  doc.set("segments", segs);
  return doc.to_string();
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
  if (text.empty()) throw DataError("empty integer field");
  std::uint64_t v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw DataError("bad integer '" + std::string(text) + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace

SplitPlan split_plan_from_text(const std::string& text) {
  const KvDocument doc = KvDocument::parse(text);
  SplitPlan plan;
  plan.total_work_units = parse_u64(doc.get("total_work_units"));
  plan.n_containers = static_cast<std::size_t>(parse_u64(doc.get("n_containers")));
  const std::string& share = doc.get("cpu_share_per_container");
  const auto dot = share.find('.');
  if (dot == std::string::npos || share.size() - dot != 3) {
    throw DataError("cpu_share_per_container must have two decimals");
  }
  plan.cpu_share_per_container = CpuShare::from_hundredths(static_cast<std::int64_t>(
      parse_u64(share.substr(0, dot)) * 100 + parse_u64(share.substr(dot + 1))));
  plan.total_cores = doc.get_double("total_cores");

  std::string_view segs = doc.get("segments");
  while (!segs.empty()) {
    const auto comma = segs.find(',');
    std::string_view item = segs.substr(0, comma);
    segs = comma == std::string_view::npos ? std::string_view{} : segs.substr(comma + 1);
    const auto c1 = item.find(':');
    const auto c2 = item.find(':', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
      throw DataError("segment entry must be index:start:size");
    }
    plan.segments.push_back(Segment{
        static_cast<std::size_t>(parse_u64(item.substr(0, c1))),
        parse_u64(item.substr(c1 + 1, c2 - c1 - 1)), parse_u64(item.substr(c2 + 1))});
  }
  validate(plan);
  return plan;
}

}  // namespace edgesplit
