#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sp2opt/errors.hpp"
#include "sp2opt/optimizer.hpp"

namespace sp2opt {

// Flat key=value settings with '#' comments. Lookups mark keys as consumed so
// a final sweep can reject unknown keys instead of silently ignoring typos.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Throws ConfigError naming every key never looked up.
  void reject_unconsumed() const;

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

KeyValues parse_config_file(const std::string& path);

// "key=value" fragments (CLI overrides); later assignments win.
void apply_assignments(KeyValues& kv, const std::vector<std::string>& items);

std::optional<Variant> parse_variant(const std::string& name);
std::optional<WeightRule> parse_weight_rule(const std::string& name);
const char* weight_rule_name(WeightRule rule);

// Consumes the optimizer-facing keys: variant, p, seed, iterations, budget,
// a, A, alpha, c, gamma, c_tilde, w, weight_rule, blocking_threshold,
// max_redraws, t_floor, tau_floor, tau_scale, h0_diag, stop_tolerance,
// stop_window, timing.
void apply_run_keys(const KeyValues& kv, RunConfig& config);

}  // namespace sp2opt
