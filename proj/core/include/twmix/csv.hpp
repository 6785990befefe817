#pragma once

#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace twmix {

// Shortest exact round-trip decimal form.
std::string format_double(double v);

// Plain CSV with '#'-prefixed comment lines before the header row.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);

  void comment(const std::string& line);
  void header(std::span<const std::string> names);
  void row(std::span<const double> values);
  void row(const std::string& label, std::span<const double> values);
  void row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
  }
  void row(const std::string& label, std::initializer_list<double> values) {
    row(label, std::span<const double>(values.begin(), values.size()));
  }

 private:
  std::ofstream out_;
  bool header_written_ = false;
};

}
