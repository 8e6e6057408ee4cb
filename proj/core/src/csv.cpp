#include "streetfuel/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace streetfuel::csv {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += fields[i];
  }
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Reader::Reader(std::istream& in, std::string file_name,
               const std::vector<std::string>& expected_header)
    : in_(in), file_(std::move(file_name)), arity_(expected_header.size()) {
  std::string line;
  if (!std::getline(in_, line)) {
    throw CsvError(file_, 1, "missing header row");
  }
  ++line_no_;
  const auto header = split(strip_cr(line));
  if (header != expected_header) {
    throw CsvError(file_, 1,
                   "unexpected header '" + join(header, ',') + "', expected '" +
                       join(expected_header, ',') + "'");
  }
}

std::optional<Row> Reader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    line = strip_cr(line);
    if (line.empty()) continue;
    Row row;
    row.fields = split(line);
    row.line_no = line_no_;
    if (row.fields.size() != arity_) {
      throw CsvError(file_, line_no_,
                     "expected " + std::to_string(arity_) + " fields, got " +
                         std::to_string(row.fields.size()));
    }
    return row;
  }
  return std::nullopt;
}

void Writer::row(const std::vector<std::string>& fields) {
  out_ << join(fields, ',') << '\n';
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& file,
                    std::size_t line) {
  double value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw CsvError(file, line, "invalid number '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text, const std::string& file,
                    std::size_t line) {
  long long value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw CsvError(file, line, "invalid integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace streetfuel::csv
