#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mcnet {

/// Fixed 17-significant-digit rendering (round-trips every double).
std::string formatDouble(double value);

// One receiver's curve as stored in a result CSV.
struct CsvSeries {
  std::string method;
  std::size_t receiver = 0;
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<double> stddev;  // empty when the file has no std column
};

/// Writes `time,method,receiver,mean[,std]`, receiver-major. `stddev` may be empty.
void writeSeriesCsv(std::ostream& out, std::string_view method, const std::vector<double>& grid,
                    const std::vector<std::vector<double>>& mean,
                    const std::vector<std::vector<double>>& stddev = {});

/// Series grouped by (method, receiver) in order of first appearance. Malformed
/// input raises ConfigParseError.
std::vector<CsvSeries> readSeriesCsv(std::istream& in, std::string_view origin = "<csv>");
std::vector<CsvSeries> readSeriesCsv(const std::filesystem::path& path);

}  // namespace mcnet
