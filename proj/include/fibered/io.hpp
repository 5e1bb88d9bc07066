#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "fibered/measures.hpp"

namespace fibered {

/// Writes `i,j,x,theta,rho` rows (17 significant digits) to `csv_path` and the
/// grid metadata to the sidecar `<stem>.json`.
void write_grid_measure(const std::filesystem::path& csv_path, const GridMeasure& mu);
GridMeasure read_grid_measure(const std::filesystem::path& csv_path,
                              double tol = kConstructionTolerance);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Formats a double with 17 significant digits.
std::string format_real(double v);

/// Minimal CSV writer: header on construction, one row per call.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);
  explicit CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& s);
  void end_row();

 private:
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace fibered
