#ifndef TCOV_RESULT_TABLE_HPP
#define TCOV_RESULT_TABLE_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tcov {

using Cell = std::variant<double, std::string>;

/**
 * Rectangular table with "# key=value" metadata.
 *
 * CSV layout: metadata lines, header row, data rows. Numbers are written in
 * shortest round-trip form, so write -> read reproduces every double.
 */
struct ResultTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta(const std::string& key) const;

  /// Throws std::out_of_range for an unknown column.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  std::string text(std::size_t row, const std::string& name) const;

  bool operator==(const ResultTable&) const = default;
};

inline constexpr const char* kTimestampKey = "timestamp";

void write_table(const ResultTable& table, std::ostream& os);
void write_table(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_table(std::istream& is);
ResultTable read_table(const std::filesystem::path& path);

std::string format_cell(const Cell& c);

}  // namespace tcov

#endif  // TCOV_RESULT_TABLE_HPP
