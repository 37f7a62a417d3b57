#include "edgesplit/powermeter.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <mutex>
#include <sstream>

#include "edgesplit/error.hpp"
#include "edgesplit/kv_text.hpp"

namespace edgesplit {

using Clock = std::chrono::steady_clock;

double PowerTrace::span() const {
  if (samples.size() < 2) return 0.0;
  return samples.back().t - samples.front().t;
}

void validate(const PowerTrace& trace) {
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const PowerSample& s = trace.samples[i];
    if (!std::isfinite(s.t) || !std::isfinite(s.p)) {
      throw DataError("non-finite power sample at index " + std::to_string(i));
    }
    if (s.t < 0.0) throw DataError("negative timestamp at index " + std::to_string(i));
    if (s.p < 0.0) throw DataError("negative power at index " + std::to_string(i));
    if (i > 0 && !(s.t > trace.samples[i - 1].t)) {
      throw DataError("timestamps not strictly increasing at index " + std::to_string(i));
    }
  }
}

double integrate_energy(const PowerTrace& trace) {
  if (trace.samples.empty()) throw InvalidArgument("power trace has no samples");
  validate(trace);
  double energy = 0.0;
  for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
    energy += trace.samples[i].p * (trace.samples[i + 1].t - trace.samples[i].t);
  }
  return energy;
}

double average_power(double energy_joules, double duration_seconds) {
  if (!(duration_seconds > 0.0)) throw InvalidArgument("duration must be > 0");
  return energy_joules / duration_seconds;
}

PowerTrace clip(const PowerTrace& trace, double t0, double t1) {
  if (!(t1 >= t0)) throw InvalidArgument("clip window is reversed");
  PowerTrace out;
  out.nominal_interval = trace.nominal_interval;
  const auto& s = trace.samples;
  if (s.empty() || t1 < s.front().t) return out;

  std::size_t i = 0;
  while (i + 1 < s.size() && s[i + 1].t <= t0) ++i;
  if (s[i].t <= t0) {
    out.samples.push_back({t0, s[i].p});
    ++i;
  }
  for (; i < s.size() && s[i].t < t1; ++i) out.samples.push_back(s[i]);
  if (!out.samples.empty() && out.samples.back().t < t1) {
    out.samples.push_back({t1, out.samples.back().p});
  }
  return out;
}

ConstantSource::ConstantSource(double watts) : watts_(watts) {
  if (!(watts >= 0.0) || !std::isfinite(watts)) {
    throw InvalidArgument("constant source power must be >= 0");
  }
}

ReplaySource::ReplaySource(PowerTrace recording, bool loop)
    : recording_(std::move(recording)), loop_(loop) {
  validate(recording_);
  if (loop_ && recording_.samples.empty()) {
    throw InvalidArgument("cannot loop an empty recording");
  }
}

std::optional<double> ReplaySource::read() {
  if (next_ >= recording_.samples.size()) {
    if (!loop_) return std::nullopt;
    next_ = 0;
  }
  return recording_.samples[next_++].p;
}

FunctionSource::FunctionSource(std::function<double(double)> fn) : fn_(std::move(fn)) {}

std::optional<double> FunctionSource::read() {
  const auto now = Clock::now();
  if (!start_) start_ = now;
  return fn_(std::chrono::duration<double>(now - *start_).count());
}

namespace {

// Appends one reading. Returns false when the source is exhausted or failed.
bool take_sample(PowerSource& source, Clock::time_point epoch, SamplingResult& into) {
  std::optional<double> watts;
  try {
    watts = source.read();
  } catch (const std::exception& e) {
    into.error = e.what();
    return false;
  }
  if (!watts) {
    into.exhausted = true;
    return false;
  }
  if (!(*watts >= 0.0) || !std::isfinite(*watts)) {
    into.error = "power source returned an invalid reading";
    return false;
  }
  const double t = std::chrono::duration<double>(Clock::now() - epoch).count();
  auto& samples = into.trace.samples;
  if (t >= 0.0 && (samples.empty() || t > samples.back().t)) {
    samples.push_back({t, *watts});
  }
  return true;
}

void sample_loop(PowerSource& source, double interval, std::stop_token stop,
                 Clock::time_point epoch, Clock::time_point next_tick,
                 SamplingResult& into) {
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(interval));
  std::mutex mu;
  std::condition_variable_any cv;
  while (!stop.stop_requested()) {
    {
      std::unique_lock lock(mu);
      cv.wait_until(lock, stop, next_tick, [] { return false; });
    }
    if (stop.stop_requested()) break;
    if (!take_sample(source, epoch, into)) break;
    next_tick += period;
    // After an overrun, resume on the schedule instead of bursting.
    const auto now = Clock::now();
    while (next_tick <= now) next_tick += period;
  }
}

}  // namespace

SamplingResult sample_power(PowerSource& source, double interval, std::stop_token stop,
                            Clock::time_point epoch) {
  if (!(interval > 0.0)) throw InvalidArgument("sampling interval must be > 0");
  SamplingResult result;
  result.trace.nominal_interval = interval;
  if (stop.stop_requested()) return result;
  if (!take_sample(source, epoch, result)) return result;
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(interval));
  sample_loop(source, interval, stop, epoch, Clock::now() + period, result);
  return result;
}

PowerSampler::PowerSampler(PowerSource& source, double interval,
                           Clock::time_point epoch)
    : source_(source), interval_(interval), epoch_(epoch) {
  if (!(interval > 0.0)) throw InvalidArgument("sampling interval must be > 0");
}

PowerSampler::~PowerSampler() {
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
}

void PowerSampler::start() {
  if (thread_.joinable()) throw InvalidArgument("sampler already running");
  result_ = SamplingResult{};
  result_.trace.nominal_interval = interval_;
  if (!take_sample(source_, epoch_, result_)) return;
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(interval_));
  const auto first_tick = Clock::now() + period;
  thread_ = std::jthread([this, first_tick](std::stop_token stop) {
    sample_loop(source_, interval_, stop, epoch_, first_tick, result_);
  });
}

SamplingResult PowerSampler::stop() {
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
  return std::move(result_);
}

std::string to_csv(const PowerTrace& trace) {
  std::string out = "t_s,power_w\n";
  char buf[96];
  for (const PowerSample& s : trace.samples) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", s.t, s.p);
    out += buf;
  }
  return out;
}

PowerTrace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  PowerTrace trace;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "t_s,power_w") {
        throw DataError("power trace: expected header 't_s,power_w'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError("power trace: malformed row at line " + std::to_string(line_no));
    }
    try {
      trace.samples.push_back(
          {parse_double(line.substr(0, comma)), parse_double(line.substr(comma + 1))});
    } catch (const DataError&) {
      throw DataError("power trace: parse error at line " + std::to_string(line_no));
    }
  }
  if (!header_seen) throw DataError("power trace: empty file");
  validate(trace);
  if (trace.samples.size() >= 2) {
    trace.nominal_interval = trace.span() / static_cast<double>(trace.samples.size() - 1);
  }
  return trace;
}

}  // namespace edgesplit
