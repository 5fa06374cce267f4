#pragma once

// CSV tables, standalone SVG line charts and run manifests.

#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace zpf {

/// Comma-separated table with a header row; numbers are written with 17
/// significant digits.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvWriter(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<Cell>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::size_t columns_;
  std::ofstream out_;
};

std::string csv_number(double v);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  std::string color = "#1f77b4";
};

struct ChartSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_y = false;
};

void write_svg_chart(const std::string& path, const ChartSpec& spec,
                     const std::vector<Series>& series);

struct Manifest {
  std::string command;
  std::string config;  // serialized effective configuration
  unsigned seed = 0;
  int threads = 1;
  bool cache = true;
  std::vector<std::string> outputs;
  std::vector<std::string> notes;
};

void write_manifest(const std::string& path, const Manifest& m);

/// Library version reported in manifests.
std::string version_string();

}  // namespace zpf
