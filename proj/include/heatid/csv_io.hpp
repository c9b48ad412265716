#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatid/smoother.hpp"

namespace heatid {

/// A numeric CSV table; empty cells read as NaN.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  [[nodiscard]] Eigen::Index column(const std::string& name) const;  // -1 when absent
};

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

/// UTF-8, ',' separated, '.' decimal, mandatory header. Errors name the
/// 1-based file line.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Header: t,T_a,u_1..u_D,y_1..y_D with t = k dt for row k = 1..N.
void write_measurements_csv(const std::filesystem::path& path, const TimeSeriesData& data);

/// Reads the layout above. dt is taken from the t column, which must be
/// uniformly spaced starting at dt. Empty y cells are dropout (NaN) when
/// allowed, an error otherwise; inputs must always be present.
TimeSeriesData read_measurements_csv(const std::filesystem::path& path, Eigen::Index n_components,
                                     bool allow_dropout);

}  // namespace heatid
