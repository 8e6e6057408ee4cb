#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace streetfuel::csv {

/// Parse/validation failure carrying the file name and 1-based line number.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

struct Row {
  std::vector<std::string> fields;
  std::size_t line_no{0};
};

/// Minimal strict CSV reader: no quoting, exact header match, fixed arity.
class Reader {
 public:
  Reader(std::istream& in, std::string file_name,
         const std::vector<std::string>& expected_header);

  /// Next data row, or nullopt at end of file. Blank lines are skipped.
  std::optional<Row> next();

  const std::string& file_name() const { return file_; }

 private:
  std::istream& in_;
  std::string file_;
  std::size_t arity_;
  std::size_t line_no_{0};
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Shortest round-trip decimal representation (locale independent).
std::string format_double(double v);

double parse_double(std::string_view text, const std::string& file,
                    std::size_t line);
long long parse_int(std::string_view text, const std::string& file,
                    std::size_t line);

}  // namespace streetfuel::csv
