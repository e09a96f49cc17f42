#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace latticegap {

std::string version();

/// Run metadata written ahead of every CSV or JSON result.
struct OutputMeta {
  std::string command;
  std::string spec_hash;
  /// Grids, tolerances and other knobs, in the order they should appear.
  std::vector<std::pair<std::string, std::string>> params;

  void add(const std::string& key, const std::string& value) { params.emplace_back(key, value); }
  void add(const std::string& key, double value);
};

/// 15 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double x);

/// x rounded to 15 significant digits, or the strings above when not finite.
nlohmann::ordered_json json_number(double x);

using CsvCell = std::variant<double, long long, std::string>;

/// CSV with a '#'-prefixed metadata block, a header row and quoted fields
/// where a value contains a comma, quote or line break.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const OutputMeta& meta, std::vector<std::string> columns);
  void row(const std::vector<CsvCell>& cells);

 private:
  std::ostream& out_;
  std::size_t width_;
};

std::string csv_escape(const std::string& field);

/// {"meta": {...}, <keys of data>...} in insertion order; a non-object
/// `data` goes under "data".
nlohmann::ordered_json json_document(const OutputMeta& meta, nlohmann::ordered_json data);

}  // namespace latticegap
