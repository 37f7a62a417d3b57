#include "edgesplit/device.hpp"

#include <cmath>

#include "edgesplit/error.hpp"
#include "edgesplit/kv_text.hpp"

namespace edgesplit {

double reference_inconsistency(const DeviceProfile& device) {
  return std::abs(device.ref_power * device.ref_time - device.ref_energy) /
         device.ref_energy;
}

void validate(const DeviceProfile& device) {
  if (device.total_cores == 0) throw DataError("device total_cores must be >= 1");
  if (device.max_containers == 0) throw DataError("device max_containers must be >= 1");
  if (!(device.ref_time > 0.0) || !(device.ref_energy > 0.0) ||
      !(device.ref_power > 0.0)) {
    throw DataError("device reference values must be > 0");
  }
  if (reference_inconsistency(device) > kReferenceConsistencyTolerance) {
    throw DataError("device '" + device.name +
                    "': ref_power * ref_time differs from ref_energy by more than 1%");
  }
}

std::optional<DeviceProfile> bundled_profile(std::string_view name) {
  if (name == "tx2") return DeviceProfile{"tx2", 4, 6, 325.0, 942.0, 2.9};
  if (name == "orin") return DeviceProfile{"orin", 12, 12, 54.0, 700.0, 13.0};
  return std::nullopt;
}

std::optional<DeviceModels> bundled_models(std::string_view name) {
  if (name == "tx2") {
    return DeviceModels{QuadraticModel{0.026, -0.21, 1.17, 0.0},
                        QuadraticModel{0.015, -0.12, 1.10, 0.0},
                        QuadraticModel{-0.016, 0.12, 0.90, 0.0}};
  }
  if (name == "orin") {
    return DeviceModels{SaturatingExpModel{1.77, 0.98, 0.33, 0.0, false},
                        SaturatingExpModel{1.14, 1.03, 0.59, 0.0, false},
                        SaturatingExpModel{-1.24, 0.38, 1.85, 0.0, false}};
  }
  return std::nullopt;
}

std::string to_text(const DeviceProfile& device) {
  KvDocument doc;
  doc.set("name", device.name);
  doc.set("total_cores", std::to_string(device.total_cores));
  doc.set("max_containers", std::to_string(device.max_containers));
  doc.set("ref_time", device.ref_time);
  doc.set("ref_energy", device.ref_energy);
  doc.set("ref_power", device.ref_power);
  return doc.to_string();
}

DeviceProfile device_profile_from_text(const std::string& text) {
  const KvDocument doc = KvDocument::parse(text);
  DeviceProfile d;
  d.name = doc.get("name");
  const long long cores = doc.get_int("total_cores");
  const long long max_c = doc.get_int("max_containers");
  if (cores < 1 || max_c < 1) throw DataError("core and container counts must be >= 1");
  d.total_cores = static_cast<std::size_t>(cores);
  d.max_containers = static_cast<std::size_t>(max_c);
  d.ref_time = doc.get_double("ref_time");
  d.ref_energy = doc.get_double("ref_energy");
  d.ref_power = doc.get_double("ref_power");
  validate(d);
  return d;
}

}  // namespace edgesplit
