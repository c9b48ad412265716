#include "heatid/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <system_error>

#include "heatid/errors.hpp"

namespace heatid {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Eigen::Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  return -1;
}

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return {buf, res.ptr};
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  for (auto& h : split(line)) table.header.push_back(trim(h));
  const auto width = table.header.size();

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width)
      throw ValidationError(path.string() + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " fields, expected " + std::to_string(width));
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty()) {
        row[c] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, row[c]);
      if (ec != std::errc() || ptr != last || !std::isfinite(row[c]))
        throw ValidationError(path.string() + ": row " + std::to_string(line_no) + ", column '" +
                              table.header[c] + "': not a finite number: '" + cell + "'");
    }
    rows.push_back(std::move(row));
  }

  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.values.cols(); ++c)
      out << (c ? "," : "") << format_double(table.values(r, c));
    out << '\n';
  }
  if (!out) throw ValidationError("failed writing " + path.string());
}

void write_measurements_csv(const std::filesystem::path& path, const TimeSeriesData& data) {
  const Eigen::Index d = data.inputs.cols() - 1;
  if (data.measurements.cols() != d) throw ValidationError("measurement CSV needs all D columns");
  CsvTable table;
  table.header = {"t", "T_a"};
  for (Eigen::Index i = 1; i <= d; ++i) table.header.push_back("u_" + std::to_string(i));
  for (Eigen::Index i = 1; i <= d; ++i) table.header.push_back("y_" + std::to_string(i));
  const Eigen::Index n = data.size();
  table.values.resize(n, 1 + 2 * d + 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    table.values(k, 0) = static_cast<double>(k + 1) * data.dt;
    table.values.row(k).segment(1, d + 1) = data.inputs.row(k);
    table.values.row(k).tail(d) = data.measurements.row(k);
  }
  write_csv(path, table);
}

TimeSeriesData read_measurements_csv(const std::filesystem::path& path, Eigen::Index n_components,
                                     bool allow_dropout) {
  const CsvTable table = read_csv(path);
  const Eigen::Index d = n_components;

  std::vector<std::string> expected = {"t", "T_a"};
  for (Eigen::Index i = 1; i <= d; ++i) expected.push_back("u_" + std::to_string(i));
  for (Eigen::Index i = 1; i <= d; ++i) expected.push_back("y_" + std::to_string(i));
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw ValidationError(path.string() + ": header must be '" + want + "'");
  }
  const Eigen::Index n = table.values.rows();
  if (n < 1) throw ValidationError(path.string() + ": no data rows");

  // Data rows start on file line 2.
  const auto row_label = [](Eigen::Index r) { return "row " + std::to_string(r + 2); };
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < 2 + d; ++c)
      if (std::isnan(table.values(r, c)))
        throw ValidationError(path.string() + ": " + row_label(r) + ", column '" +
                              table.header[static_cast<std::size_t>(c)] + "' is empty");
    if (!allow_dropout)
      for (Eigen::Index c = 2 + d; c < 2 + 2 * d; ++c)
        if (std::isnan(table.values(r, c)))
          throw ValidationError(path.string() + ": " + row_label(r) + ", column '" +
                                table.header[static_cast<std::size_t>(c)] +
                                "' is empty (enable measurement.allow_dropout to treat it as missing)");
  }

  const double dt = table.values(0, 0);
  if (!(dt > 0.0)) throw ValidationError(path.string() + ": first t must be dt > 0");
  for (Eigen::Index r = 0; r < n; ++r) {
    const double expected_t = static_cast<double>(r + 1) * dt;
    if (std::abs(table.values(r, 0) - expected_t) > 1e-6 * std::max(1.0, std::abs(expected_t)))
      throw ValidationError(path.string() + ": " + row_label(r) + ": t is not uniformly spaced");
  }

  TimeSeriesData data;
  data.dt = dt;
  data.inputs = table.values.middleCols(1, d + 1);
  data.measurements = table.values.rightCols(d);
  return data;
}

}  // namespace heatid
