#include "ldptails/csv.hpp"

#include <cmath>
#include <cstdio>

namespace ldptails {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string CsvWriter::quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

CsvWriter& CsvWriter::header(std::initializer_list<std::string_view> names) {
  std::vector<std::string> fields(names.begin(), names.end());
  return row(fields);
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k > 0) out_ << ',';
    out_ << quote(fields[k]);
  }
  out_ << '\n';
  return *this;
}

}  // namespace ldptails
