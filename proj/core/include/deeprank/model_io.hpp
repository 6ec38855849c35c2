#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "deeprank/lstm.hpp"
#include "deeprank/mlp.hpp"

namespace deeprank {

/// Text model format, version 1:
///
///   deeprank-model 1
///   kind mlp|lstm
///   seed <u64>
///   dims <sizes...>            (mlp: layer widths; lstm: input width, hidden sizes...)
///   sequence_length <n>        (lstm only)
///   parameters <count>
///   <one value per line, 17 significant digits>
///
/// Reading back yields a bit-identical model.
inline constexpr int kModelFormatVersion = 1;

void write_model(std::ostream& out, const MlpModel& model);
void write_model(std::ostream& out, const LstmModel& model);
/// `source` names the stream in parse errors.
MlpModel read_mlp(std::istream& in, const std::string& source = "<model>");
LstmModel read_lstm(std::istream& in, const std::string& source = "<model>");

void save_model(const std::filesystem::path& path, const MlpModel& model);
void save_model(const std::filesystem::path& path, const LstmModel& model);
MlpModel load_mlp(const std::filesystem::path& path);
LstmModel load_lstm(const std::filesystem::path& path);

}  // namespace deeprank
