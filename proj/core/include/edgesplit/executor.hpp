#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgesplit/device.hpp"
#include "edgesplit/error.hpp"
#include "edgesplit/metrics.hpp"
#include "edgesplit/modelfit.hpp"
#include "edgesplit/powermeter.hpp"
#include "edgesplit/splitter.hpp"

namespace edgesplit {

struct WorkerHandle {
  std::size_t id = 0;
};

// A worker that exited abnormally or returned unusable output.
class WorkerFailure : public ExecutionError {
 public:
  WorkerFailure(std::size_t segment_index, const std::string& what)
      : ExecutionError(what), segment_index_(segment_index) {}
  std::size_t segment_index() const { return segment_index_; }

 private:
  std::size_t segment_index_;
};

// Hosts one worker per segment. launch() must not block on the worker;
// wait() blocks until that worker is done. Workers share nothing.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual WorkerHandle launch(const Segment& segment, CpuShare cpu_share) = 0;
  virtual SegmentResult wait(WorkerHandle handle) = 0;
  // Largest number of concurrent workers this backend accepts.
  virtual std::size_t capacity() const { return SIZE_MAX; }
};

// Default per-unit output record: "unit-<index>".
std::string default_unit_output(std::uint64_t unit);

// In-process threads that sleep for an injected duration and then emit one
// record per unit. Used for tests and dry runs.
class MockBackend final : public Backend {
 public:
  using DurationFn = std::function<double(const Segment&)>;

  explicit MockBackend(DurationFn duration, std::set<std::size_t> failing_segments = {});
  ~MockBackend() override;

  WorkerHandle launch(const Segment& segment, CpuShare cpu_share) override;
  SegmentResult wait(WorkerHandle handle) override;

  // CPU share each launched segment was given, by segment index.
  std::map<std::size_t, CpuShare> shares_seen() const;

 private:
  struct Worker;
  DurationFn duration_;
  std::set<std::size_t> failing_;
  std::vector<std::unique_ptr<Worker>> workers_;
};

// Forked worker processes running a CPU-bound payload per unit. When a
// writable cgroup v2 directory is given, each worker is placed in its own
// child cgroup with `cpu.max` set from the share; otherwise shares are not
// enforced and a warning is printed once.
class LocalProcessBackend final : public Backend {
 public:
  struct Options {
    double unit_cost_seconds = 0.001;  // busy-spin per unit
    std::optional<std::string> cgroup_parent;
    std::function<std::string(std::uint64_t)> payload = default_unit_output;
  };

  explicit LocalProcessBackend(Options options);
  ~LocalProcessBackend() override;

  WorkerHandle launch(const Segment& segment, CpuShare cpu_share) override;
  SegmentResult wait(WorkerHandle handle) override;

  bool enforces_cpu_share() const { return options_.cgroup_parent.has_value(); }

 private:
  struct Worker;
  Options options_;
  std::vector<std::unique_ptr<Worker>> workers_;
};

// One container launch, already flattened to an argv.
struct ContainerCommand {
  std::string name;
  std::size_t segment_index = 0;
  CpuShare cpus;
  std::vector<std::string> argv;

  std::string command_line() const;
};

// `<runtime> run --rm --name <prefix>-<i>of<n> --cpus=<share> <image>
//  --start <unit> --count <units>` for each segment.
std::vector<ContainerCommand> container_adapter_command(
    const SplitPlan& plan, std::string_view image, std::string_view runtime = "docker",
    std::string_view name_prefix = "edgesplit");

// Spawns the container runtime for each segment; every stdout line of the
// container is one unit output.
class ContainerBackend final : public Backend {
 public:
  ContainerBackend(SplitPlan plan, std::string image, std::string runtime = "docker",
                   std::string name_prefix = "edgesplit");
  ~ContainerBackend() override;

  WorkerHandle launch(const Segment& segment, CpuShare cpu_share) override;
  SegmentResult wait(WorkerHandle handle) override;
  std::size_t capacity() const override { return commands_.size(); }

 private:
  struct Worker;
  std::vector<ContainerCommand> commands_;
  std::vector<std::unique_ptr<Worker>> workers_;
};

inline constexpr double kDefaultOverheadBound = 0.5;  // seconds

struct ExperimentOptions {
  double sample_interval = kDefaultSampleInterval;
};

struct WorkerTiming {
  std::size_t segment_index = 0;
  double launch_s = 0.0;      // relative to trace start
  double completion_s = 0.0;  // launch_s + worker time
};

struct ExperimentResult {
  RunMetrics metrics;
  PowerTrace trace;           // everything the sampler recorded
  PowerTrace measured_trace;  // clipped to [first launch, last completion]
  std::vector<std::string> outputs;
  std::vector<WorkerTiming> timings;  // by segment index
};

// Carries whatever finished before the failure.
class ExperimentError : public ExecutionError {
 public:
  ExperimentError(const std::string& what, std::vector<SegmentResult> completed,
                  PowerTrace trace)
      : ExecutionError(what), completed_(std::move(completed)), trace_(std::move(trace)) {}
  const std::vector<SegmentResult>& completed() const { return completed_; }
  const PowerTrace& trace() const { return trace_; }

 private:
  std::vector<SegmentResult> completed_;
  PowerTrace trace_;
};

// Starts sampling, launches every worker, then waits for all of them. Energy
// is integrated over the launch-to-last-completion window only.
ExperimentResult run_experiment(const SplitPlan& plan, Backend& backend,
                                PowerSource& source, const ExperimentOptions& options = {});

// Relative standard deviation of the multiplicative noise in simulate_run.
inline constexpr double kSimulationNoiseSigma = 0.005;

// Model-driven run: the reference values scaled by the predicted ratios at n.
RunMetrics simulate_run(const DeviceProfile& device, const PerfModel& time_model,
                        const PerfModel& energy_model, std::size_t n,
                        std::optional<std::uint64_t> noise_seed = std::nullopt);

}  // namespace edgesplit
