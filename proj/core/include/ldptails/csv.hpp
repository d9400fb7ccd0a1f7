#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ldptails {

/// 17 significant digits, dot decimal, "inf"/"-inf"/"nan" for non-finite.
std::string format_number(double value);

/// RFC 4180 writer: fields containing a comma, quote, CR or LF are quoted,
/// embedded quotes doubled, rows terminated by "\n".
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& header(std::initializer_list<std::string_view> names);
  CsvWriter& row(const std::vector<std::string>& fields);

  static std::string quote(std::string_view field);

 private:
  std::ostream& out_;
};

}  // namespace ldptails
