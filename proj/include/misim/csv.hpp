#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace misim {

/// RFC-4180 field quoting: quotes only when the field contains a comma,
/// quote, or newline.
std::string csv_quote(const std::string& field);

/// Deterministic numeric formatting for CSV output (%.12g); NaN renders as
/// an empty field.
std::string csv_num(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
};

}  // namespace misim
