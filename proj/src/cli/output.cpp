#include "igeom/cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace igeom::cli {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json" || name == "jsonl") return Format::Json;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match the table schema");
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return csv_field(std::get<std::string>(c));
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

void write_jsonl(std::ostream& os, const Table& t) {
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& key = t.columns[i];
      if (const auto* d = std::get_if<double>(&row[i])) {
        if (std::isfinite(*d)) {
          // Round-trip through %.17g so JSON and CSV agree digit for digit.
          obj[key] = nlohmann::ordered_json::parse(format_double(*d));
        } else {
          obj[key] = nullptr;
        }
      } else if (const auto* n = std::get_if<long long>(&row[i])) {
        obj[key] = *n;
      } else {
        obj[key] = std::get<std::string>(row[i]);
      }
    }
    os << obj.dump() << '\n';
  }
}

void write_table(std::ostream& os, const Table& t, Format f) {
  if (f == Format::Csv) write_csv(os, t);
  else write_jsonl(os, t);
}

void emit(const Table& t, Format f, const std::string& path) {
  if (path.empty() || path == "-") {
    write_table(std::cout, t, f);
    std::cout.flush();
    if (!std::cout) throw IoError("failed to write to stdout");
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  write_table(file, t, f);
  file.close();
  if (!file) throw IoError("failed writing '" + path + "'");
}

}  // namespace igeom::cli
