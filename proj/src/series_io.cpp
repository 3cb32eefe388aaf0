#include "fbmhd/series_io.hpp"

#include <json.hpp>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fbmhd {

std::string series_header() {
  std::string out;
  for (const std::string& c : record_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string series_row(const DiagnosticsRecord& r) {
  std::string out;
  char buf[40];
  for (double x : record_values(r)) {
    if (!out.empty()) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
  }
  return out;
}

SeriesWriter::SeriesWriter(const std::string& path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw std::runtime_error("series: cannot open " + path);
  std::fprintf(f_, "%s\n", series_header().c_str());
  std::fflush(f_);
}

SeriesWriter::~SeriesWriter() {
  if (f_) std::fclose(f_);
}

void SeriesWriter::append(const DiagnosticsRecord& r) {
  std::fprintf(f_, "%s\n", series_row(r).c_str());
  if (std::fflush(f_) != 0) throw std::runtime_error("series: write failed");
  ++rows_;
}

TimeSeries read_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SeriesFormatError("series: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw SeriesFormatError("series: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != series_header()) throw SeriesFormatError("series: unexpected header '" + line + "'");

  const size_t ncol = record_columns().size();
  TimeSeries s;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      errno = 0;
      const double x = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0' || errno == ERANGE)
        throw SeriesFormatError("series: bad number '" + cell + "' on line " + std::to_string(lineno));
      vals.push_back(x);
    }
    if (vals.size() != ncol)
      throw SeriesFormatError("series: line " + std::to_string(lineno) + " has " +
                              std::to_string(vals.size()) + " columns");
    DiagnosticsRecord r = record_from_values(vals);
    if (!s.records.empty() && !(r.t > s.records.back().t))
      throw SeriesFormatError("series: t not increasing on line " + std::to_string(lineno));
    s.records.push_back(r);
  }
  return s;
}

void write_metadata_json(const std::string& path, const RunMetadata& m) {
  using nlohmann::json;
  json j;
  j["command"] = m.command;
  j["version"] = version_string();
  j["status"] = m.status;
  j["exit_code"] = m.exit_code;
  if (!m.failure_reason.empty()) j["failure_reason"] = m.failure_reason;
  j["records"] = m.records;
  j["t_reached"] = m.t_reached;
  j["alarms"] = m.alarms;
  if (m.has_config) j["config"] = json::parse(config_to_json(m.config));

  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["timestamp"] = ts;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("metadata: cannot open " + tmp);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("metadata: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fbmhd
