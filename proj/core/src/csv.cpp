#include "deeprank/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "deeprank/error.hpp"

namespace deeprank::csv {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

void Row::fail(std::size_t column, const std::string& message) const {
  const std::string name = column < header_->size() ? (*header_)[column] : "?";
  throw ParseError(*file_, line_, column + 1, fmt::format("column '{}': {}", name, message));
}

double Row::number(std::size_t column) const {
  const auto s = fields_[column];
  double value = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (s.empty() || ec != std::errc() || ptr != end) {
    fail(column, fmt::format("expected a number, got '{}'", s));
  }
  if (!std::isfinite(value)) fail(column, fmt::format("non-finite number '{}'", s));
  return value;
}

Date Row::date(std::size_t column) const {
  const auto d = Date::parse(fields_[column]);
  if (!d) fail(column, fmt::format("expected a YYYY-MM-DD date, got '{}'", fields_[column]));
  return *d;
}

bool Row::flag(std::size_t column) const {
  const auto s = fields_[column];
  if (s == "0") return false;
  if (s == "1") return true;
  fail(column, fmt::format("expected 0 or 1, got '{}'", s));
}

int Row::integer(std::size_t column) const {
  const auto s = fields_[column];
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    fail(column, fmt::format("expected an integer, got '{}'", s));
  }
  return value;
}

Reader::Reader(std::string path, std::vector<std::string> expected_header)
    : path_(std::move(path)), header_(std::move(expected_header)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError("marketdata", fmt::format("cannot open '{}'", path_));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  content_ = buffer.str();

  std::string_view all(content_);
  if (all.size() >= 3 && all.substr(0, 3) == "\xEF\xBB\xBF") all.remove_prefix(3);

  std::size_t line_no = 0;
  bool header_seen = false;
  while (!all.empty()) {
    const auto nl = all.find('\n');
    std::string_view line = all.substr(0, nl);
    all.remove_prefix(nl == std::string_view::npos ? all.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split(line);
    if (!header_seen) {
      header_seen = true;
      bool ok = fields.size() == header_.size();
      for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = fields[i] == header_[i];
      if (!ok) {
        std::string want;
        for (std::size_t i = 0; i < header_.size(); ++i) want += (i ? "," : "") + header_[i];
        throw ParseError(path_, line_no, 1, fmt::format("header must be '{}'", want));
      }
      continue;
    }
    if (fields.size() != header_.size()) {
      throw ParseError(path_, line_no, std::min(fields.size(), header_.size()) + 1,
                       fmt::format("expected {} fields, found {}", header_.size(), fields.size()));
    }
    rows_.emplace_back(&path_, &header_, line_no, std::move(fields));
  }
  if (!header_seen) throw ParseError(path_, 1, 1, "missing header");
}

std::string format_number(double value) {
  return fmt::format("{:.17g}", value);
}

}  // namespace deeprank::csv
