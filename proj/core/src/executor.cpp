#include "edgesplit/executor.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "edgesplit/error.hpp"
#include "edgesplit/kv_text.hpp"

namespace edgesplit {

using Clock = std::chrono::steady_clock;

std::string default_unit_output(std::uint64_t unit) {
  return "unit-" + std::to_string(unit);
}

std::string ContainerCommand::command_line() const {
  std::string out;
  for (const std::string& arg : argv) {
    if (!out.empty()) out += ' ';
    out += arg;
  }
  return out;
}

std::vector<ContainerCommand> container_adapter_command(const SplitPlan& plan,
                                                        std::string_view image,
                                                        std::string_view runtime,
                                                        std::string_view name_prefix) {
  if (image.empty()) throw InvalidArgument("container image name is empty");
  if (plan.cpu_share_per_container.cores() > plan.total_cores) {
    throw InvalidArgument("cpu share " + plan.cpu_share_per_container.str() +
                          " exceeds the device's " + format_exact(plan.total_cores) +
                          " cores");
  }
  validate(plan);
  std::vector<ContainerCommand> commands;
  commands.reserve(plan.segments.size());
  for (const Segment& s : plan.segments) {
    ContainerCommand cmd;
    cmd.name = std::string(name_prefix) + '-' + std::to_string(s.index) + "of" +
               std::to_string(plan.n_containers);
    cmd.segment_index = s.index;
    cmd.cpus = plan.cpu_share_per_container;
    cmd.argv = {std::string(runtime),
                "run",
                "--rm",
                "--name",
                cmd.name,
                "--cpus=" + cmd.cpus.str(),
                std::string(image),
                "--start",
                std::to_string(s.start_unit),
                "--count",
                std::to_string(s.size)};
    commands.push_back(std::move(cmd));
  }
  return commands;
}

namespace {

double seconds_since(Clock::time_point epoch) {
  return std::chrono::duration<double>(Clock::now() - epoch).count();
}

}  // namespace

ExperimentResult run_experiment(const SplitPlan& plan, Backend& backend,
                                PowerSource& source, const ExperimentOptions& options) {
  validate(plan);
  if (plan.n_containers > backend.capacity()) {
    throw InvalidArgument("backend cannot host " + std::to_string(plan.n_containers) +
                          " workers");
  }

  const auto epoch = Clock::now();
  PowerSampler sampler(source, options.sample_interval, epoch);
  sampler.start();

  std::vector<WorkerTiming> timings(plan.segments.size());
  std::vector<std::optional<WorkerHandle>> handles(plan.segments.size());
  std::optional<std::string> failure;
  for (const Segment& s : plan.segments) {
    timings[s.index].segment_index = s.index;
    timings[s.index].launch_s = seconds_since(epoch);
    try {
      handles[s.index] = backend.launch(s, plan.cpu_share_per_container);
    } catch (const std::exception& e) {
      failure = "launch of segment " + std::to_string(s.index) + " failed: " + e.what();
      break;
    }
  }
  const double first_launch = timings.front().launch_s;

  std::vector<SegmentResult> completed;
  completed.reserve(plan.segments.size());
  for (std::size_t i = 0; i < handles.size(); ++i) {
    if (!handles[i]) continue;
    try {
      SegmentResult r = backend.wait(*handles[i]);
      timings[i].completion_s = timings[i].launch_s + r.worker_seconds;
      completed.push_back(std::move(r));
    } catch (const std::exception& e) {
      if (!failure) failure = "segment " + std::to_string(i) + " failed: " + e.what();
    }
  }
  const double last_completion = seconds_since(epoch);
  SamplingResult sampled = sampler.stop();

  if (failure) {
    throw ExperimentError(*failure, std::move(completed), std::move(sampled.trace));
  }
  if (sampled.error) {
    throw ExperimentError("power source failed: " + *sampled.error, std::move(completed),
                          std::move(sampled.trace));
  }
  if (sampled.exhausted) {
    throw ExperimentError("power source ran out before the run finished",
                          std::move(completed), std::move(sampled.trace));
  }

  ExperimentResult result;
  try {
    result.outputs = merge_segments(completed, plan);
  } catch (const DataError& e) {
    throw ExperimentError(e.what(), std::move(completed), std::move(sampled.trace));
  }
  result.measured_trace = clip(sampled.trace, first_launch, last_completion);
  if (result.measured_trace.samples.empty()) {
    throw ExperimentError("no power samples cover the run", std::move(completed),
                          std::move(sampled.trace));
  }

  RunMetrics& m = result.metrics;
  m.n_containers = plan.n_containers;
  m.wall_time = last_completion - first_launch;
  m.energy = integrate_energy(result.measured_trace);
  m.avg_power = average_power(m.energy, m.wall_time);
  m.per_worker_times.resize(plan.segments.size());
  for (const SegmentResult& r : completed) {
    m.per_worker_times[r.segment_index] = r.worker_seconds;
  }
  result.trace = std::move(sampled.trace);
  result.timings = std::move(timings);
  return result;
}

RunMetrics simulate_run(const DeviceProfile& device, const PerfModel& time_model,
                        const PerfModel& energy_model, std::size_t n,
                        std::optional<std::uint64_t> noise_seed) {
  if (n < 1 || n > device.max_containers) {
    throw InvalidArgument("container count " + std::to_string(n) + " outside 1.." +
                          std::to_string(device.max_containers));
  }
  const double x = static_cast<double>(n);
  double time_factor = 1.0;
  double energy_factor = 1.0;
  if (noise_seed) {
    // Distinct n draw distinct noise from the same seed.
    std::seed_seq seq{static_cast<std::uint32_t>(*noise_seed),
                      static_cast<std::uint32_t>(*noise_seed >> 32),
                      static_cast<std::uint32_t>(n)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, kSimulationNoiseSigma);
    time_factor += noise(rng);
    energy_factor += noise(rng);
  }
  RunMetrics m;
  m.n_containers = n;
  m.wall_time = device.ref_time * predict(time_model, x) * time_factor;
  m.energy = device.ref_energy * predict(energy_model, x) * energy_factor;
  if (!(m.wall_time > 0.0) || !(m.energy > 0.0)) {
    throw DataError("models predict non-positive time or energy at n=" +
                    std::to_string(n));
  }
  m.avg_power = m.energy / m.wall_time;
  m.per_worker_times.assign(n, m.wall_time);
  return m;
}

}  // namespace edgesplit
