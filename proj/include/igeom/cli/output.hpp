#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace igeom::cli {

enum class Format { Csv, Json };

Format parse_format(const std::string& name);

using Cell = std::variant<double, long long, std::string>;

/// A fixed-schema result table; every row has one cell per column.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// %.17g; inf and nan print as "inf", "-inf", "nan".
std::string format_double(double v);

/// Header row then one line per row. Strings containing separators are quoted.
void write_csv(std::ostream& os, const Table& t);

/// One JSON object per row keyed by column name; non-finite doubles become null.
void write_jsonl(std::ostream& os, const Table& t);

void write_table(std::ostream& os, const Table& t, Format f);

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes to `path`, or stdout when the path is empty or "-". Throws IoError.
void emit(const Table& t, Format f, const std::string& path);

}  // namespace igeom::cli
