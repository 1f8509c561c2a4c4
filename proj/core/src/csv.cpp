#include "mcnet/csv.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mcnet/error.hpp"

namespace mcnet {

std::string formatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void writeSeriesCsv(std::ostream& out, std::string_view method, const std::vector<double>& grid,
                    const std::vector<std::vector<double>>& mean,
                    const std::vector<std::vector<double>>& stddev) {
  const bool withStd = !stddev.empty();
  out << (withStd ? "time,method,receiver,mean,std\n" : "time,method,receiver,mean\n");
  for (std::size_t u = 0; u < mean.size(); ++u) {
    for (std::size_t t = 0; t < grid.size(); ++t) {
      out << formatDouble(grid[t]) << ',' << method << ',' << u << ',' << formatDouble(mean[u][t]);
      if (withStd) out << ',' << formatDouble(stddev[u][t]);
      out << '\n';
    }
  }
}

namespace {

std::vector<std::string> splitFields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parseField(const std::string& s, std::string_view origin, std::size_t line) {
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  std::ostringstream msg;
  msg << origin << ':' << line << ": not a number '" << s << "'";
  throw Error(ErrorCode::ConfigParseError, msg.str());
}

}  // namespace

std::vector<CsvSeries> readSeriesCsv(std::istream& in, std::string_view origin) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigParseError, std::string(origin) + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool withStd = false;
  if (line == "time,method,receiver,mean,std") withStd = true;
  else if (line != "time,method,receiver,mean") throw Error(ErrorCode::ConfigParseError, std::string(origin) + ": unexpected header '" + line + "'");

  std::vector<CsvSeries> series;
  std::map<std::pair<std::string, std::size_t>, std::size_t> index;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = splitFields(line);
    if (f.size() != (withStd ? 5u : 4u)) {
      std::ostringstream msg;
      msg << origin << ':' << lineNo << ": expected " << (withStd ? 5 : 4) << " fields";
      throw Error(ErrorCode::ConfigParseError, msg.str());
    }
    const double receiverValue = parseField(f[2], origin, lineNo);
    if (receiverValue < 0 || receiverValue != static_cast<double>(static_cast<std::size_t>(receiverValue))) {
      throw Error(ErrorCode::ConfigParseError, std::string(origin) + ": bad receiver index '" + f[2] + "'");
    }
    const auto key = std::make_pair(f[1], static_cast<std::size_t>(receiverValue));
    auto [it, inserted] = index.emplace(key, series.size());
    if (inserted) series.push_back({key.first, key.second, {}, {}, {}});
    auto& s = series[it->second];
    s.time.push_back(parseField(f[0], origin, lineNo));
    s.mean.push_back(parseField(f[3], origin, lineNo));
    if (withStd) s.stddev.push_back(parseField(f[4], origin, lineNo));
  }
  return series;
}

std::vector<CsvSeries> readSeriesCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParseError, "cannot open " + path.string());
  return readSeriesCsv(in, path.string());
}

}  // namespace mcnet
