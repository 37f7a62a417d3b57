#include "edgesplit/cli/fixtures.hpp"

#include <map>

#include "edgesplit/kv_text.hpp"

namespace edgesplit::cli {

namespace {

const std::map<std::string, std::vector<DataPoint>, std::less<>>& table() {
  static const std::map<std::string, std::vector<DataPoint>, std::less<>> fixtures = {
      {"tx2_fig3_time",
       {{1, 1.0}, {2, 0.81}, {3, 0.77}, {4, 0.745}, {5, 0.76}, {6, 0.82}}},
      {"tx2_fig3_energy",
       {{1, 1.0}, {2, 0.8883}, {3, 0.8609}, {4, 0.8477}, {5, 0.8615}, {6, 0.8832}}},
      {"tx2_fig3_power",
       {{1, 1.0}, {2, 1.094}, {3, 1.118}, {4, 1.139}, {5, 1.135}, {6, 1.078}}},
      {"orin_fig3_time",
       {{1, 1.0}, {2, 0.57}, {4, 0.39}, {6, 0.35}, {8, 0.335}, {10, 0.32}, {12, 0.31}}},
      {"orin_fig3_energy",
       {{1, 1.0}, {2, 0.737}, {4, 0.612}, {6, 0.609}, {8, 0.602}, {10, 0.586}, {12, 0.58}}},
      {"orin_fig3_power",
       {{1, 1.0}, {2, 1.294}, {4, 1.554}, {6, 1.75}, {8, 1.8}, {10, 1.824}, {12, 1.84}}},
      {"tx2_fig1_time",
       {{0.8, 1923.818377},
        {1, 1428.508946},
        {2, 537.845278},
        {3, 340.478856},
        {4, 335.602946}}},
      {"tx2_fig1_energy",
       {{0.8, 3268.84162865821},
        {1, 2539.47271842151},
        {2, 1233.05013960583},
        {3, 949.307547479176},
        {4, 943.936265208808}}},
      {"orin_fig1_time",
       {{0.4, 624.392021},
        {1, 186.254587},
        {2, 63.098788},
        {3, 62.881196},
        {4, 50.273535},
        {5, 49.766862},
        {6, 49.88659},
        {8, 51.143005},
        {10, 51.438918},
        {12, 51.665154}}},
      {"orin_fig1_energy",
       {{0.4, 5488.99696061117},
        {1, 1665.88044546993},
        {2, 664.527237501471},
        {3, 768.040256780007},
        {4, 665.475100540928},
        {5, 659.437109104965},
        {6, 658.498957712066},
        {8, 673.714665199206},
        {10, 676.928369695454},
        {12, 679.441260977017}}},
  };
  return fixtures;
}

}  // namespace

std::optional<std::vector<DataPoint>> fixture(std::string_view name) {
  const auto& t = table();
  const auto it = t.find(name);
  if (it == t.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const auto& [name, points] : table()) names.push_back(name);
  return names;
}

std::vector<DataPoint> load_points(const std::string& path_or_fixture) {
  if (auto points = fixture(path_or_fixture)) return *points;
  return points_from_csv(read_file(path_or_fixture));
}

}  // namespace edgesplit::cli
