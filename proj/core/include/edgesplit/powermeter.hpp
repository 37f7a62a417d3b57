#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace edgesplit {

struct PowerSample {
  double t = 0.0;  // seconds since trace start
  double p = 0.0;  // watts
  friend bool operator==(const PowerSample&, const PowerSample&) = default;
};

inline constexpr double kDefaultSampleInterval = 0.010;

struct PowerTrace {
  std::vector<PowerSample> samples;
  double nominal_interval = kDefaultSampleInterval;

  // Time between first and last sample; 0 for fewer than two samples.
  double span() const;
};

// Throws DataError on negative time or power, or non-increasing timestamps.
void validate(const PowerTrace& trace);

// Left-rectangle rule: sum of p_i * (t_{i+1} - t_i). The final sample has no
// interval after it and contributes nothing.
double integrate_energy(const PowerTrace& trace);

double average_power(double energy_joules, double duration_seconds);

// Restricts a trace to [t0, t1]. The sample in effect at t0 (the last one at
// or before it) is re-stamped to t0 and a closing sample is added at t1, so
// the clipped energy covers exactly the window.
PowerTrace clip(const PowerTrace& trace, double t0, double t1);

// One aggregate power channel.
class PowerSource {
 public:
  virtual ~PowerSource() = default;
  // Current reading in watts, or nullopt once a finite source is exhausted.
  // Throws on sensor failure.
  virtual std::optional<double> read() = 0;
};

class ConstantSource final : public PowerSource {
 public:
  explicit ConstantSource(double watts);
  std::optional<double> read() override { return watts_; }

 private:
  double watts_;
};

// Plays back the power column of a recorded trace, one value per read.
class ReplaySource final : public PowerSource {
 public:
  explicit ReplaySource(PowerTrace recording, bool loop = false);
  std::optional<double> read() override;

 private:
  PowerTrace recording_;
  bool loop_;
  std::size_t next_ = 0;
};

// p(t) with t measured from the first read.
class FunctionSource final : public PowerSource {
 public:
  explicit FunctionSource(std::function<double(double)> fn);
  std::optional<double> read() override;

 private:
  std::function<double(double)> fn_;
  std::optional<std::chrono::steady_clock::time_point> start_;
};

struct SamplingResult {
  PowerTrace trace;
  std::optional<std::string> error;  // set when the source failed mid-run
  bool exhausted = false;            // a finite source ran out before stop
};

// Polls `source` every `interval` seconds until `stop` is requested or the
// source runs dry. Timestamps are seconds since `epoch`.
SamplingResult sample_power(PowerSource& source, double interval, std::stop_token stop,
                            std::chrono::steady_clock::time_point epoch =
                                std::chrono::steady_clock::now());

// Runs sample_power on a background thread. The first sample is taken before
// start() returns; stop() joins and hands back the finished trace.
class PowerSampler {
 public:
  PowerSampler(PowerSource& source, double interval,
               std::chrono::steady_clock::time_point epoch);
  ~PowerSampler();
  PowerSampler(const PowerSampler&) = delete;
  PowerSampler& operator=(const PowerSampler&) = delete;

  void start();
  SamplingResult stop();

 private:
  PowerSource& source_;
  double interval_;
  std::chrono::steady_clock::time_point epoch_;
  std::jthread thread_;
  SamplingResult result_;
};

// CSV with header `t_s,power_w`, six decimals per field.
std::string to_csv(const PowerTrace& trace);
PowerTrace trace_from_csv(const std::string& text);

}  // namespace edgesplit
