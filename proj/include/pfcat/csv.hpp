#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pfcat::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line in the file
  std::vector<std::string> fields;
};

/// A parsed CSV file: header plus data rows. Blank lines are skipped;
/// fields may be double-quoted with "" escapes.
class Table {
 public:
  static Table read(const std::filesystem::path& path);
  static Table parse(std::string_view text, std::string source_name);

  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }

  /// Index of `name` in the header; throws ParseError if absent.
  std::size_t column(std::string_view name) const;

  /// Throws unless the header equals `expected` exactly, in order.
  void require_header(const std::vector<std::string>& expected) const;

  double number(const Row& row, std::size_t col) const;
  long integer(const Row& row, std::size_t col) const;
  bool boolean(const Row& row, std::size_t col) const;
  const std::string& text(const Row& row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

/// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

/// Fixed-point with `digits` decimals, "-0" normalised to "0".
std::string format_fixed(double value, int digits);

std::string quote_if_needed(std::string_view field);

/// Writes one CSV record terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace pfcat::csv
