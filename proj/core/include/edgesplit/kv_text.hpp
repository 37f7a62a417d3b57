#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace edgesplit {

// Ordered `key=value` document. Blank lines and lines starting with '#' are
// ignored when parsing; keys keep insertion order when writing.
class KvDocument {
 public:
  void set(std::string key, std::string value);
  void set(std::string key, double value);  // round-trips bit-exactly

  bool contains(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;

  std::string to_string() const;
  static KvDocument parse(std::string_view text);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest decimal text that parses back to the identical double.
std::string format_exact(double value);
double parse_double(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace edgesplit
