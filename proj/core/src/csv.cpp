#include "twmix/csv.hpp"

#include <cstdio>
#include <cstdlib>

#include "twmix/errors.hpp"

namespace twmix {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw ConfigError("cannot create output file: " + path);
}

void CsvWriter::comment(const std::string& line) {
  if (header_written_) throw ConfigError("comments must precede the header");
  out_ << "# " << line << "\n";
}

void CsvWriter::header(std::span<const std::string> names) {
  for (std::size_t i = 0; i < names.size(); ++i)
    out_ << (i ? "," : "") << names[i];
  out_ << "\n";
  header_written_ = true;
}

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << (i ? "," : "") << format_double(values[i]);
  out_ << "\n";
}

void CsvWriter::row(const std::string& label, std::span<const double> values) {
  out_ << label;
  for (const double v : values) out_ << "," << format_double(v);
  out_ << "\n";
}

}  // namespace twmix
