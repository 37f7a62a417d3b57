#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgesplit/modelfit.hpp"

namespace edgesplit::cli {

// Measurement points for the TX2 and AGX Orin boards.
// fig3 tables are normalized metrics versus container count; fig1 tables are
// absolute time (s) or energy (J) versus cores given to one container.
std::optional<std::vector<DataPoint>> fixture(std::string_view name);
std::vector<std::string> fixture_names();

// A fixture name, or a CSV file with header `x,value`.
std::vector<DataPoint> load_points(const std::string& path_or_fixture);

}  // namespace edgesplit::cli
