#pragma once

#include <map>
#include <string>
#include <vector>

namespace sp2opt {

// Per-iteration record. Fields without a defined value for a given run are
// NaN and serialize as empty (CSV) or null (JSON). wall_time_s is 0 unless
// timing was enabled, keeping same-seed trace files byte-identical.
struct TraceRecord {
  long k = 0;
  double loss = 0.0;
  double theta_norm = 0.0;
  double dist_to_opt = 0.0;
  long measurements = 0;
  long redraws = 0;
  int blocked = 0;
  double wall_time_s = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::map<std::string, std::string> metadata;

  // Columns: k, loss, normalized_loss, theta_norm, dist_to_opt, measurements,
  // redraws, blocked, wall_time_s. normalized_loss is loss relative to the
  // k=0 record when that is positive and finite. Metadata is emitted as
  // leading '# key=value' comment lines.
  void write_csv(const std::string& path) const;
  void write_json(const std::string& path) const;
};

}  // namespace sp2opt
