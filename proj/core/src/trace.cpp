#include "sp2opt/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sp2opt/errors.hpp"

namespace sp2opt {
namespace {

// Shortest round-trip formatting keeps files byte-stable across runs.
std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Trace::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open trace output: " + path);
  for (const auto& [key, value] : metadata) {
    out << "# " << key << "=" << value << "\n";
  }
  out << "k,loss,normalized_loss,theta_norm,dist_to_opt,measurements,redraws,"
         "blocked,wall_time_s\n";
  const double base = records.empty() ? 0.0 : records.front().loss;
  const bool normalize = std::isfinite(base) && base > 0.0;
  for (const TraceRecord& r : records) {
    const double norm =
        normalize ? r.loss / base : std::nan("");
    out << r.k << ',' << fmt(r.loss) << ',' << fmt(norm) << ','
        << fmt(r.theta_norm) << ',' << fmt(r.dist_to_opt) << ','
        << r.measurements << ',' << r.redraws << ',' << r.blocked << ','
        << fmt(r.wall_time_s) << '\n';
  }
}

void Trace::write_json(const std::string& path) const {
  nlohmann::json doc;
  doc["metadata"] = metadata;
  const double base = records.empty() ? 0.0 : records.front().loss;
  const bool normalize = std::isfinite(base) && base > 0.0;
  nlohmann::json rows = nlohmann::json::array();
  const auto num_or_null = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  for (const TraceRecord& r : records) {
    nlohmann::json row;
    row["k"] = r.k;
    row["loss"] = num_or_null(r.loss);
    row["normalized_loss"] =
        normalize ? num_or_null(r.loss / base) : nlohmann::json(nullptr);
    row["theta_norm"] = num_or_null(r.theta_norm);
    row["dist_to_opt"] = num_or_null(r.dist_to_opt);
    row["measurements"] = r.measurements;
    row["redraws"] = r.redraws;
    row["blocked"] = r.blocked;
    row["wall_time_s"] = num_or_null(r.wall_time_s);
    rows.push_back(row);
  }
  doc["records"] = rows;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open trace output: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace sp2opt
