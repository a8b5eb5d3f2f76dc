#include "pfcat/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pfcat/errors.hpp"

namespace pfcat::csv {
namespace {

std::vector<std::string> split_record(std::string_view line, const std::string& source,
                                      std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError(source, lineno, "unterminated quoted field");
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
    std::size_t s = 0;
    while (s < f.size() && (f[s] == ' ' || f[s] == '\t')) ++s;
    f.erase(0, s);
  }
  return fields;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(ValidationError::Kind::kMissingInput,
                                 "cannot open input file " + path.string(), {path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.filename().string());
}

Table Table::parse(std::string_view text, std::string source_name) {
  Table t;
  t.source_ = std::move(source_name);
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::size_t lineno = 0;
  bool have_header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto fields = split_record(line, t.source_, lineno);
    if (!have_header) {
      t.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header_.size())
      throw ParseError(t.source_, lineno,
                       "expected " + std::to_string(t.header_.size()) + " fields, got " +
                           std::to_string(fields.size()));
    t.rows_.push_back(Row{lineno, std::move(fields)});
  }
  if (!have_header) throw ParseError(t.source_, 1, "missing header row");
  return t;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw ParseError(source_, 1, "missing column '" + std::string(name) + "'");
}

void Table::require_header(const std::vector<std::string>& expected) const {
  if (header_ == expected) return;
  std::string want;
  for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
  throw ParseError(source_, 1, "header must be '" + want + "'");
}

double Table::number(const Row& row, std::size_t col) const {
  const std::string& s = row.fields.at(col);
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ParseError(source_, row.line,
                     "column '" + header_[col] + "': '" + s + "' is not a finite number");
  return v;
}

long Table::integer(const Row& row, std::size_t col) const {
  const std::string& s = row.fields.at(col);
  long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end)
    throw ParseError(source_, row.line,
                     "column '" + header_[col] + "': '" + s + "' is not an integer");
  return v;
}

bool Table::boolean(const Row& row, std::size_t col) const {
  const std::string& s = row.fields.at(col);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError(source_, row.line,
                   "column '" + header_[col] + "': expected true or false, got '" + s + "'");
}

const std::string& Table::text(const Row& row, std::size_t col) const { return row.fields.at(col); }

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  std::string s(buf, ptr);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string quote_if_needed(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote_if_needed(fields[i]);
  }
  out << '\n';
}

}  // namespace pfcat::csv
