#pragma once

// Flat `key = value` run configuration with optional [section] blocks, one
// per subcommand. Lookups fall back from the section to the global block.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zpf {

/// Raised for malformed or inconsistent configuration (CLI exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string section;  // empty for the global block
  std::string key;
  std::string value;
  bool operator==(const ConfigEntry&) const = default;
};

class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string serialize() const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  /// Value in `section`, else in the global block.
  std::optional<std::string> get(const std::string& section, const std::string& key) const;

  std::string str(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double num(const std::string& section, const std::string& key, double fallback) const;
  int integer(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> nums(const std::string& section, const std::string& key,
                           const std::vector<double>& fallback) const;
  std::vector<int> ints(const std::string& section, const std::string& key,
                        const std::vector<int>& fallback) const;

  /// Throws ConfigError on keys of `section` ("" for the global block)
  /// outside `allowed`.
  void require_known(const std::string& section, const std::vector<std::string>& allowed) const;

  const std::vector<ConfigEntry>& entries() const { return entries_; }
  bool operator==(const RunConfig&) const = default;

 private:
  std::vector<ConfigEntry> entries_;
};

/// Parses "1/3" style fractions and plain numbers.
double parse_number(const std::string& s);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

}  // namespace zpf
