#include "bps/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <regex>
#include <sstream>

#include "bps/error.hpp"

namespace bps {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cell.push_back(c);
    } else if (c == ',' && !quoted) {
      out.push_back(trim(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(trim(cell));
  return out;
}

double parse_cell(const std::string& cell, const std::string& column, const std::string& date) {
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == ".")
    return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size())
    throw DataError("non-numeric value '" + cell + "' in column '" + column + "' at " + date);
  return value;
}

}  // namespace

SeriesTable::SeriesTable(std::vector<std::string> dates,
                         std::map<std::string, std::vector<double>> columns)
    : dates_(std::move(dates)), columns_(std::move(columns)) {
  for (const auto& [name, values] : columns_) {
    if (values.size() != dates_.size())
      throw DataError("series '" + name + "' length does not match the date index");
  }
}

std::span<const double> SeriesTable::column(const std::string& name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw DataError("missing series '" + name + "'");
  return it->second;
}

std::vector<std::string> SeriesTable::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : columns_) out.push_back(name);
  return out;
}

std::size_t SeriesTable::row_of(const std::string& date) const {
  auto it = std::find(dates_.begin(), dates_.end(), date);
  if (it == dates_.end()) throw DataError("date '" + date + "' not found in data");
  return static_cast<std::size_t>(it - dates_.begin());
}

void SeriesTable::set(const std::string& name, std::size_t row, double value) {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw DataError("missing series '" + name + "'");
  it->second.at(row) = value;
}

void SeriesTable::write_csv(const std::filesystem::path& path, const std::string& date_column,
                            const std::vector<std::string>& order) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  const std::vector<std::string> cols = order.empty() ? names() : order;
  out << date_column;
  for (const auto& c : cols) out << ',' << c;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < rows(); ++r) {
    out << dates_[r];
    for (const auto& c : cols) {
      const double v = at(c, r);
      out << ',';
      if (std::isnan(v))
        out << "NA";
      else
        out << v;
    }
    out << '\n';
  }
}

DateKey parse_date_label(const std::string& label) {
  static const std::regex quarterly(R"((\d{4})\s*[Qq/]\s*[Qq]?([1-4]))");
  static const std::regex monthly(R"((\d{4})-(\d{1,2}))");
  static const std::regex yearly(R"(\d{4})");
  static const std::regex index(R"(-?\d+)");
  std::smatch m;
  if (std::regex_match(label, m, quarterly)) {
    return {DateKey::Frequency::quarterly, std::stoll(m[1]) * 4 + std::stoll(m[2]) - 1};
  }
  if (std::regex_match(label, m, monthly)) {
    const long long month = std::stoll(m[2]);
    if (month < 1 || month > 12) throw DataError("unparseable date '" + label + "'");
    return {DateKey::Frequency::monthly, std::stoll(m[1]) * 12 + month - 1};
  }
  if (std::regex_match(label, yearly)) return {DateKey::Frequency::yearly, std::stoll(label)};
  if (std::regex_match(label, index)) return {DateKey::Frequency::index, std::stoll(label)};
  throw DataError("unparseable date '" + label + "'");
}

SeriesTable ingest_csv(const std::filesystem::path& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("data file '" + path.string() + "' is empty");
  const std::vector<std::string> header = split_csv_line(line);

  auto find_col = [&header](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const std::ptrdiff_t date_idx = find_col(mapping.date_column);
  if (date_idx < 0) throw DataError("missing date column '" + mapping.date_column + "'");

  std::vector<std::pair<std::ptrdiff_t, std::string>> wanted;  // csv index, series name
  auto series_name = [&mapping](const std::string& header_name) {
    auto it = mapping.rename.find(header_name);
    return it == mapping.rename.end() ? header_name : it->second;
  };
  if (mapping.series.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (static_cast<std::ptrdiff_t>(i) != date_idx)
        wanted.emplace_back(static_cast<std::ptrdiff_t>(i), series_name(header[i]));
  } else {
    for (const auto& name : mapping.series) {
      const std::ptrdiff_t idx = find_col(name);
      if (idx < 0) throw DataError("missing column '" + name + "'");
      wanted.emplace_back(idx, series_name(name));
    }
  }

  struct Row {
    std::string date;
    DateKey key;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << " has " << cells.size() << " fields, expected " << header.size();
      throw DataError(msg.str());
    }
    Row row{cells[static_cast<std::size_t>(date_idx)], {}, {}};
    row.key = parse_date_label(row.date);
    for (const auto& [idx, name] : wanted)
      row.values.push_back(parse_cell(cells[static_cast<std::size_t>(idx)], name, row.date));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("data file '" + path.string() + "' has no rows");

  for (const auto& r : rows)
    if (r.key.frequency != rows.front().key.frequency)
      throw DataError("mixed date formats ('" + rows.front().date + "' vs '" + r.date + "')");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.key.ordinal < b.key.ordinal; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].key.ordinal == rows[i - 1].key.ordinal)
      throw DataError("duplicate date '" + rows[i].date + "'");
  }
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const long long step = rows[1].key.ordinal - rows[0].key.ordinal;
    if (rows[i].key.ordinal - rows[i - 1].key.ordinal != step)
      throw DataError("irregular date spacing at '" + rows[i].date + "'");
  }

  std::vector<std::string> dates;
  std::map<std::string, std::vector<double>> columns;
  for (const auto& [idx, name] : wanted) columns[name].reserve(rows.size());
  for (const auto& r : rows) {
    dates.push_back(r.date);
    for (std::size_t k = 0; k < wanted.size(); ++k) columns[wanted[k].second].push_back(r.values[k]);
  }
  return SeriesTable(std::move(dates), std::move(columns));
}

}  // namespace bps
