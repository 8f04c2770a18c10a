#include "tcov/result_table.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tcov/hermitian.hpp"
#include "tcov/matrix_io.hpp"

namespace tcov {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Cell parse_cell(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (!s.empty() && ec == std::errc() && ptr == s.data() + s.size()) return v;
  return s;
}

void check_text(const std::string& s, const char* what) {
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw ValidationError(std::string(what) + " '" + s + "' contains a comma or newline");
  }
}

}  // namespace

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw ValidationError("ResultTable: row has " + std::to_string(row.size()) + " cells, expected " +
                          std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
  for (auto& kv : metadata) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

std::optional<std::string> ResultTable::meta(const std::string& key) const {
  for (const auto& kv : metadata) {
    if (kv.first == key) return kv.second;
  }
  return std::nullopt;
}

std::size_t ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("ResultTable: no column '" + name + "'");
}

double ResultTable::number(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const double* v = std::get_if<double>(&c)) return *v;
  throw std::out_of_range("ResultTable: cell in column '" + name + "' is not numeric");
}

std::string ResultTable::text(std::size_t row, const std::string& name) const {
  return format_cell(rows.at(row).at(column(name)));
}

std::string format_cell(const Cell& c) {
  if (const double* v = std::get_if<double>(&c)) return format_double(*v);
  return std::get<std::string>(c);
}

void write_table(const ResultTable& table, std::ostream& os) {
  for (const auto& [k, v] : table.metadata) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos || v.find('\n') != std::string::npos) {
      throw ValidationError("ResultTable: invalid metadata entry '" + k + "'");
    }
    os << "# " << k << '=' << v << '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    check_text(table.columns[i], "column name");
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string s = format_cell(row[i]);
      check_text(s, "cell");
      os << (i ? "," : "") << s;
    }
    os << '\n';
  }
}

void write_table(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_table(table, os);
  os.flush();
  if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

ResultTable read_table(std::istream& is) {
  ResultTable t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ValidationError("ResultTable: malformed metadata line '" + line + "'");
      t.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header) {
      t.columns = split_csv(line);
      header = true;
      continue;
    }
    std::vector<Cell> row;
    for (const auto& s : split_csv(line)) row.push_back(parse_cell(s));
    t.add_row(std::move(row));
  }
  if (!header) throw ValidationError("ResultTable: missing header row");
  return t;
}

ResultTable read_table(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_table(is);
}

}  // namespace tcov
