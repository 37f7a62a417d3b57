#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "edgesplit/modelfit.hpp"

namespace edgesplit {

// Benchmark reference for one board: a single container holding every core
// and the whole workload.
struct DeviceProfile {
  std::string name;
  std::size_t total_cores = 0;
  std::size_t max_containers = 0;
  double ref_time = 0.0;    // seconds
  double ref_energy = 0.0;  // joules
  double ref_power = 0.0;   // watts

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

// Allowed relative gap between ref_power * ref_time and ref_energy.
inline constexpr double kReferenceConsistencyTolerance = 0.01;

double reference_inconsistency(const DeviceProfile& device);
void validate(const DeviceProfile& device);

// "tx2" and "orin"; nullopt for anything else.
std::optional<DeviceProfile> bundled_profile(std::string_view name);

// Normalized time/energy/power models published for a bundled device.
struct DeviceModels {
  PerfModel time;
  PerfModel energy;
  PerfModel power;
};
std::optional<DeviceModels> bundled_models(std::string_view name);

std::string to_text(const DeviceProfile& device);
DeviceProfile device_profile_from_text(const std::string& text);

}  // namespace edgesplit
