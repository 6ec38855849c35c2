#include "deeprank/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "deeprank/csv.hpp"
#include "deeprank/error.hpp"

namespace deeprank {

namespace {

void write_header(std::ostream& out, const char* kind, std::uint64_t seed) {
  out << "deeprank-model " << kModelFormatVersion << '\n' << "kind " << kind << '\n' << "seed " << seed << '\n';
}

void write_parameters(std::ostream& out, std::span<const double> params) {
  out << "parameters " << params.size() << '\n';
  for (double v : params) out << csv::format_number(v) << '\n';
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_, line_no_, 1, msg); }

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) {
      ++line_no_;
      fail("unexpected end of model file");
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  /// Reads "key v1 v2 ..." and returns the values.
  std::vector<std::string> field(const std::string& key) {
    std::istringstream ss(next());
    std::string k;
    ss >> k;
    if (k != key) fail(fmt::format("expected '{}', found '{}'", key, k));
    std::vector<std::string> values;
    for (std::string v; ss >> v;) values.push_back(v);
    if (values.empty()) fail(fmt::format("'{}' has no value", key));
    return values;
  }

  std::uint64_t to_u64(const std::string& s) const {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(fmt::format("'{}' is not an unsigned integer", s));
    return v;
  }

  double to_double(const std::string& s) const {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
      fail(fmt::format("'{}' is not a finite number", s));
    }
    return v;
  }

  std::string single(const std::string& key) {
    auto v = field(key);
    if (v.size() != 1) fail(fmt::format("'{}' takes one value", key));
    return v.front();
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

struct Common {
  std::uint64_t seed = 0;
  std::vector<std::size_t> dims;
};

Common read_common(LineReader& r, const std::string& kind) {
  const auto magic = r.field("deeprank-model");
  if (magic.size() != 1 || r.to_u64(magic[0]) != static_cast<std::uint64_t>(kModelFormatVersion)) {
    r.fail("unsupported model format version");
  }
  const auto k = r.single("kind");
  if (k != kind) r.fail(fmt::format("expected a {} model, found '{}'", kind, k));
  Common c;
  c.seed = r.to_u64(r.single("seed"));
  for (const auto& d : r.field("dims")) c.dims.push_back(static_cast<std::size_t>(r.to_u64(d)));
  return c;
}

std::vector<double> read_parameters(LineReader& r) {
  const auto count = r.to_u64(r.single("parameters"));
  std::vector<double> params;
  params.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) params.push_back(r.to_double(r.next()));
  return params;
}

template <typename F>
auto rethrow_shape(LineReader& r, F&& build) {
  try {
    return build();
  } catch (const ArgumentError& e) {
    r.fail(e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("numerics", fmt::format("cannot write {}", path.string()));
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("numerics", fmt::format("cannot read {}", path.string()));
  return in;
}

}  // namespace

void write_model(std::ostream& out, const MlpModel& model) {
  write_header(out, "mlp", model.seed());
  out << "dims";
  for (auto d : model.dims()) out << ' ' << d;
  out << '\n';
  write_parameters(out, model.parameters());
}

void write_model(std::ostream& out, const LstmModel& model) {
  write_header(out, "lstm", model.seed());
  out << "dims " << model.input_width();
  for (auto d : model.hidden_sizes()) out << ' ' << d;
  out << '\n' << "sequence_length " << model.sequence_length() << '\n';
  write_parameters(out, model.parameters());
}

MlpModel read_mlp(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  auto c = read_common(r, "mlp");
  auto params = read_parameters(r);
  return rethrow_shape(r, [&] { return MlpModel::from_parameters(c.dims, c.seed, std::move(params)); });
}

LstmModel read_lstm(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  auto c = read_common(r, "lstm");
  if (c.dims.size() < 2) r.fail("lstm dims need an input width and at least one hidden size");
  const auto seq = static_cast<std::size_t>(r.to_u64(r.single("sequence_length")));
  auto params = read_parameters(r);
  std::vector<std::size_t> hidden(c.dims.begin() + 1, c.dims.end());
  return rethrow_shape(r, [&] {
    return LstmModel::from_parameters(c.dims.front(), hidden, seq, c.seed, std::move(params));
  });
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  auto out = open_out(path);
  write_model(out, model);
}

void save_model(const std::filesystem::path& path, const LstmModel& model) {
  auto out = open_out(path);
  write_model(out, model);
}

MlpModel load_mlp(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_mlp(in, path.string());
}

LstmModel load_lstm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_lstm(in, path.string());
}

}  // namespace deeprank
