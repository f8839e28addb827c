#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bps {

/// Date-indexed table of equally spaced numeric series. Rows are sorted by
/// date and missing cells hold NaN.
class SeriesTable {
 public:
  SeriesTable() = default;
  SeriesTable(std::vector<std::string> dates, std::map<std::string, std::vector<double>> columns);

  std::size_t rows() const { return dates_.size(); }
  const std::vector<std::string>& dates() const { return dates_; }
  const std::string& date(std::size_t row) const { return dates_.at(row); }

  bool has(const std::string& name) const { return columns_.contains(name); }
  std::span<const double> column(const std::string& name) const;
  std::vector<std::string> names() const;

  double at(const std::string& name, std::size_t row) const { return column(name)[row]; }
  /// Row index of a date label; throws DataError if absent.
  std::size_t row_of(const std::string& date) const;

  /// Sets a single cell (used by tests and the simulator).
  void set(const std::string& name, std::size_t row, double value);

  /// Column order in written files follows `order` when given, otherwise names().
  void write_csv(const std::filesystem::path& path, const std::string& date_column = "date",
                 const std::vector<std::string>& order = {}) const;

 private:
  std::vector<std::string> dates_;
  std::map<std::string, std::vector<double>> columns_;
};

/// Maps CSV headers onto table columns. An empty `series` list loads every
/// non-date column; otherwise only the listed ones (renamed via `rename`).
struct ColumnMapping {
  std::string date_column = "date";
  std::vector<std::string> series;
  std::map<std::string, std::string> rename;  // csv header -> series name
};

/// Parses a date label into an ordinal on its natural grid. Accepted forms:
/// "YYYYQn" (quarters), "YYYY-MM" (months), "YYYY" (years), plain integers.
/// Returns the frequency tag and ordinal; throws DataError if unparseable.
struct DateKey {
  enum class Frequency { quarterly, monthly, yearly, index };
  Frequency frequency;
  long long ordinal;
};
DateKey parse_date_label(const std::string& label);

/// Reads a CSV with a header row. Rows are sorted by date; duplicate dates,
/// mixed or irregularly spaced labels, missing columns and non-numeric cells
/// raise DataError. Empty cells and "NA" read as NaN.
SeriesTable ingest_csv(const std::filesystem::path& path, const ColumnMapping& mapping = {});

}  // namespace bps
