#pragma once

#include "fbmhd/config.hpp"
#include "fbmhd/diagnostics.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fbmhd {

class SeriesFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header plus one row per record, %.17g, flushed after every row so an
/// aborted run leaves a parseable prefix.
class SeriesWriter {
 public:
  explicit SeriesWriter(const std::string& path);
  ~SeriesWriter();
  SeriesWriter(const SeriesWriter&) = delete;
  SeriesWriter& operator=(const SeriesWriter&) = delete;

  void append(const DiagnosticsRecord& r);
  long rows() const { return rows_; }

 private:
  std::FILE* f_ = nullptr;
  long rows_ = 0;
};

std::string series_header();
std::string series_row(const DiagnosticsRecord& r);

/// Rejects a wrong header, ragged rows, unparsable numbers and
/// nonincreasing t.
TimeSeries read_series_csv(const std::string& path);

struct RunMetadata {
  std::string command;
  RunConfig config;
  bool has_config = false;
  std::string status = "ok";
  std::string failure_reason;
  int exit_code = 0;
  long records = 0;
  double t_reached = 0.0;
  std::vector<std::string> alarms;
};

/// JSON sidecar; the only place a wall-clock timestamp is written.
void write_metadata_json(const std::string& path, const RunMetadata& m);

}  // namespace fbmhd
