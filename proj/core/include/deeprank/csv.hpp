#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "deeprank/date.hpp"

namespace deeprank::csv {

/// One parsed data row with enough context to produce located parse errors.
class Row {
 public:
  Row(const std::string* file, const std::vector<std::string>* header, std::size_t line,
      std::vector<std::string_view> fields)
      : file_(file), header_(header), line_(line), fields_(std::move(fields)) {}

  std::size_t line() const { return line_; }
  std::size_t size() const { return fields_.size(); }
  std::string_view text(std::size_t column) const { return fields_[column]; }

  double number(std::size_t column) const;
  Date date(std::size_t column) const;
  bool flag(std::size_t column) const;
  int integer(std::size_t column) const;

  [[noreturn]] void fail(std::size_t column, const std::string& message) const;

 private:
  const std::string* file_;
  const std::vector<std::string>* header_;
  std::size_t line_;
  std::vector<std::string_view> fields_;
};

/// Reads a comma-separated file whose first line must equal `expected_header`.
/// LF and CRLF line endings are accepted; blank lines are skipped.
class Reader {
 public:
  Reader(std::string path, std::vector<std::string> expected_header);
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& r : rows_) fn(r);
  }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::string content_;
  std::vector<Row> rows_;
};

/// Decimal with 17 significant digits; parses back to the identical double.
std::string format_number(double value);

}  // namespace deeprank::csv
