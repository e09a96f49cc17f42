#include "latticegap/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "latticegap/errors.hpp"

namespace latticegap {

std::string version() { return LATTICEGAP_VERSION; }

void OutputMeta::add(const std::string& key, double value) {
  params.emplace_back(key, format_number(value));
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

nlohmann::ordered_json json_number(double x) {
  if (!std::isfinite(x)) return format_number(x);
  return std::strtod(format_number(x).c_str(), nullptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(std::ostream& out, const OutputMeta& meta, std::vector<std::string> columns)
    : out_(out), width_(columns.size()) {
  out_ << "# latticegap " << version() << "\n";
  out_ << "# command: " << meta.command << "\n";
  if (!meta.spec_hash.empty()) out_ << "# spec_hash: " << meta.spec_hash << "\n";
  for (const auto& [k, v] : meta.params) out_ << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out_ << (i ? "," : "") << csv_escape(columns[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != width_) throw DomainError("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (const auto* d = std::get_if<double>(&cells[i])) {
      out_ << format_number(*d);
    } else if (const auto* n = std::get_if<long long>(&cells[i])) {
      out_ << *n;
    } else {
      out_ << csv_escape(std::get<std::string>(cells[i]));
    }
  }
  out_ << "\r\n";
}

nlohmann::ordered_json json_document(const OutputMeta& meta, nlohmann::ordered_json data) {
  nlohmann::ordered_json m;
  m["tool"] = "latticegap";
  m["version"] = version();
  m["command"] = meta.command;
  if (!meta.spec_hash.empty()) m["spec_hash"] = meta.spec_hash;
  for (const auto& [k, v] : meta.params) m[k] = v;
  nlohmann::ordered_json doc;
  doc["meta"] = std::move(m);
  if (data.is_object()) {
    for (auto& [k, v] : data.items()) doc[k] = std::move(v);
  } else {
    doc["data"] = std::move(data);
  }
  return doc;
}

}  // namespace latticegap
