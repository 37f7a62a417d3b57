#pragma once

#include <cstddef>
#include <vector>

namespace edgesplit {

// Measured or simulated outcome of one experiment. avg_power is always
// energy / wall_time.
struct RunMetrics {
  double wall_time = 0.0;  // seconds
  double energy = 0.0;     // joules
  double avg_power = 0.0;  // watts
  std::size_t n_containers = 0;
  std::vector<double> per_worker_times;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

}  // namespace edgesplit
