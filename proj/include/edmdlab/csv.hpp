// csv.hpp
// RFC-4180-compatible CSV emission with a mandatory header row.  Numbers are
// written in full-precision scientific notation (17 significant digits) so
// identical runs produce identical bytes.

#pragma once

#include <string>
#include <vector>

namespace edmdlab::cli {

std::string csv_format(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);

  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write_file(const std::string& path) const;

 private:
  static std::string escape(const std::string& cell);
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace edmdlab::cli
