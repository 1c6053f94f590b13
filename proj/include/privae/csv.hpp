#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace privae {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

struct NumericTable {
  std::vector<std::string> header;  // empty when the file has no header row
  Eigen::MatrixXd data;
};

/// Comma-separated numbers, one row per line. A first line that does not
/// parse as numbers is taken as the header. Ragged rows are an error.
NumericTable read_numeric_csv(const std::filesystem::path& path);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});

}  // namespace privae
