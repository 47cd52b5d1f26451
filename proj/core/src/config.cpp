#include "sp2opt/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace sp2opt {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

}  // namespace

void KeyValues::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool KeyValues::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  return it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': not a number: " + it->second);
  }
}

long KeyValues::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  try {
    size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': not an integer: " + it->second);
  }
}

std::uint64_t KeyValues::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': not an integer: " + it->second);
  }
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  const std::string v = lower(it->second);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ParseError("config key '" + key + "': not a boolean: " + it->second);
}

void KeyValues::reject_unconsumed() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    (void)value;
    if (consumed_.count(key) == 0) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) {
    throw ConfigError("unknown config keys: " + unknown);
  }
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  KeyValues kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    kv.set(key, value);
  }
  return kv;
}

void apply_assignments(KeyValues& kv, const std::vector<std::string>& items) {
  for (const std::string& item : items) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("override must be key=value: " + item);
    }
    kv.set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
}

std::optional<Variant> parse_variant(const std::string& name) {
  const std::string v = lower(name);
  if (v == "2spsa") return Variant::TwoSpsa;
  if (v == "e2spsa") return Variant::E2Spsa;
  if (v == "2sg") return Variant::TwoSg;
  if (v == "e2sg") return Variant::E2Sg;
  return std::nullopt;
}

std::optional<WeightRule> parse_weight_rule(const std::string& name) {
  const std::string v = lower(name);
  if (v == "harmonic") return WeightRule::Harmonic;
  if (v == "power") return WeightRule::Power;
  if (v == "optimal") return WeightRule::OptimalFeedback;
  return std::nullopt;
}

const char* weight_rule_name(WeightRule rule) {
  switch (rule) {
    case WeightRule::Harmonic: return "harmonic";
    case WeightRule::Power: return "power";
    case WeightRule::OptimalFeedback: return "optimal";
  }
  return "?";
}

void apply_run_keys(const KeyValues& kv, RunConfig& config) {
  if (kv.has("variant")) {
    const std::string name = kv.get_string("variant", "");
    const auto v = parse_variant(name);
    if (!v) throw ConfigError("unknown variant: " + name);
    config.variant = *v;
  }
  config.p = static_cast<int>(kv.get_long("p", config.p));
  config.seed = kv.get_u64("seed", config.seed);
  config.iterations = kv.get_long("iterations", config.iterations);
  config.measurement_budget = kv.get_long("budget", config.measurement_budget);

  GainSchedule& g = config.gains;
  g.a = kv.get_double("a", g.a);
  g.A = kv.get_double("A", g.A);
  g.alpha = kv.get_double("alpha", g.alpha);
  g.c = kv.get_double("c", g.c);
  g.gamma = kv.get_double("gamma", g.gamma);
  g.c_tilde = kv.get_double("c_tilde", g.c_tilde);
  g.w = kv.get_double("w", g.w);
  if (kv.has("weight_rule")) {
    const std::string name = kv.get_string("weight_rule", "");
    const auto rule = parse_weight_rule(name);
    if (!rule) throw ConfigError("unknown weight_rule: " + name);
    g.rule = *rule;
  }

  StepPolicy& pol = config.policy;
  pol.blocking_threshold =
      kv.get_double("blocking_threshold", pol.blocking_threshold);
  pol.max_redraws = static_cast<int>(kv.get_long("max_redraws", pol.max_redraws));
  pol.t_floor = kv.get_double("t_floor", pol.t_floor);
  pol.stability.floor = kv.get_double("tau_floor", pol.stability.floor);
  pol.stability.scale = kv.get_double("tau_scale", pol.stability.scale);

  config.h0_diag = kv.get_double("h0_diag", config.h0_diag);
  config.stop_tolerance = kv.get_double("stop_tolerance", config.stop_tolerance);
  config.stop_window =
      static_cast<int>(kv.get_long("stop_window", config.stop_window));
  config.timing = kv.get_bool("timing", config.timing);
}

}  // namespace sp2opt
