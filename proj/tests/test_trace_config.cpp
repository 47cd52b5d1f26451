#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sp2opt/config.hpp"
#include "sp2opt/trace.hpp"

using namespace sp2opt;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trace sample_trace() {
  Trace t;
  t.metadata["optimizer"] = "2spsa";
  TraceRecord r0;
  r0.k = 0;
  r0.loss = 2.0;
  r0.theta_norm = 1.5;
  r0.dist_to_opt = std::nan("");
  TraceRecord r1;
  r1.k = 1;
  r1.loss = 1.0;
  r1.theta_norm = 0.5;
  r1.dist_to_opt = std::nan("");
  r1.measurements = 4;
  t.records = {r0, r1};
  return t;
}

}  // namespace

TEST_CASE("csv layout: metadata comments, normalization, empty for NaN") {
  const Trace t = sample_trace();
  const std::string path = "trace_golden.csv";
  t.write_csv(path);
  const std::string want =
      "# optimizer=2spsa\n"
      "k,loss,normalized_loss,theta_norm,dist_to_opt,measurements,redraws,"
      "blocked,wall_time_s\n"
      "0,2,1,1.5,,0,0,0,0\n"
      "1,1,0.5,0.5,,4,0,0,0\n";
  CHECK(slurp(path) == want);
}

TEST_CASE("csv writes are byte-stable") {
  const Trace t = sample_trace();
  t.write_csv("trace_a.csv");
  t.write_csv("trace_b.csv");
  CHECK(slurp("trace_a.csv") == slurp("trace_b.csv"));
}

TEST_CASE("json trace parses back with nulls for undefined fields") {
  const Trace t = sample_trace();
  const std::string path = "trace_golden.json";
  t.write_json(path);
  const nlohmann::json doc = nlohmann::json::parse(slurp(path));
  CHECK(doc["metadata"]["optimizer"] == "2spsa");
  REQUIRE(doc["records"].size() == 2);
  CHECK(doc["records"][0]["loss"] == 2.0);
  CHECK(doc["records"][0]["dist_to_opt"].is_null());
  CHECK(doc["records"][1]["normalized_loss"] == 0.5);
  CHECK(doc["records"][1]["measurements"] == 4);
}

TEST_CASE("normalization is dropped when the start row has no loss") {
  Trace t = sample_trace();
  t.records[0].loss = std::nan("");
  t.metadata.clear();
  t.write_csv("trace_nan.csv");
  const std::string got = slurp("trace_nan.csv");
  CHECK(got.find("\n0,,,") != std::string::npos);   // loss and norm empty
  CHECK(got.find("\n1,1,,") != std::string::npos);  // norm stays empty
}

TEST_CASE("config files: comments, spacing, and overrides") {
  {
    std::ofstream out("sample.cfg");
    out << "# a comment line\n"
        << "  p = 12   # trailing comment\n"
        << "\n"
        << "variant=e2spsa\n"
        << "a = 0.3\n";
  }
  KeyValues kv = parse_config_file("sample.cfg");
  CHECK(kv.get_long("p", 0) == 12);
  CHECK(kv.get_string("variant", "") == "e2spsa");
  apply_assignments(kv, {"a=0.5", "seed=9"});
  CHECK(kv.get_double("a", 0.0) == 0.5);  // later assignment wins
  CHECK(kv.get_u64("seed", 0) == 9);
  kv.reject_unconsumed();  // everything was read
}

TEST_CASE("malformed config lines carry the line number") {
  {
    std::ofstream out("bad.cfg");
    out << "p = 3\n"
        << "just words\n";
  }
  try {
    parse_config_file("bad.cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("typed getters reject junk") {
  KeyValues kv;
  kv.set("x", "1.5meters");
  kv.set("n", "7seven");
  kv.set("flag", "maybe");
  CHECK_THROWS_AS(kv.get_double("x", 0.0), ParseError);
  CHECK_THROWS_AS(kv.get_long("n", 0), ParseError);
  CHECK_THROWS_AS(kv.get_bool("flag", false), ParseError);

  KeyValues ok;
  ok.set("flag", "TRUE");
  ok.set("other", "off");
  CHECK(ok.get_bool("flag", false));
  CHECK_FALSE(ok.get_bool("other", true));
  CHECK(ok.get_double("missing", 2.5) == 2.5);
}

TEST_CASE("unread keys are reported as unknown") {
  KeyValues kv;
  kv.set("p", "3");
  kv.set("typo_key", "1");
  kv.get_long("p", 0);
  try {
    kv.reject_unconsumed();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
  }
}

TEST_CASE("variant and weight-rule names") {
  CHECK(*parse_variant("2SPSA") == Variant::TwoSpsa);
  CHECK(*parse_variant("e2spsa") == Variant::E2Spsa);
  CHECK(*parse_variant("2sg") == Variant::TwoSg);
  CHECK(*parse_variant("E2SG") == Variant::E2Sg);
  CHECK_FALSE(parse_variant("newton").has_value());
  CHECK(*parse_weight_rule("optimal") == WeightRule::OptimalFeedback);
  CHECK(weight_rule_name(WeightRule::Power) == std::string("power"));
}

TEST_CASE("run keys map onto the run configuration") {
  KeyValues kv;
  kv.set("variant", "e2sg");
  kv.set("p", "7");
  kv.set("seed", "9");
  kv.set("budget", "600");
  kv.set("a", "0.3");
  kv.set("A", "50");
  kv.set("alpha", "1.0");
  kv.set("c", "0.02");
  kv.set("gamma", "0.2");
  kv.set("c_tilde", "0.04");
  kv.set("w", "0.05");
  kv.set("weight_rule", "optimal");
  kv.set("blocking_threshold", "5");
  kv.set("max_redraws", "4");
  kv.set("t_floor", "1e-6");
  kv.set("tau_floor", "2e-4");
  kv.set("tau_scale", "3e-4");
  kv.set("h0_diag", "2");
  kv.set("stop_tolerance", "1e-9");
  kv.set("stop_window", "3");
  kv.set("timing", "yes");

  RunConfig cfg;
  apply_run_keys(kv, cfg);
  kv.reject_unconsumed();

  CHECK(cfg.variant == Variant::E2Sg);
  CHECK(cfg.p == 7);
  CHECK(cfg.seed == 9);
  CHECK(cfg.measurement_budget == 600);
  CHECK(planned_iterations(cfg) == 200);  // gradient variant: 3 per iteration
  CHECK(cfg.gains.a == 0.3);
  CHECK(cfg.gains.A == 50.0);
  CHECK(cfg.gains.alpha == 1.0);
  CHECK(cfg.gains.c == 0.02);
  CHECK(cfg.gains.gamma == 0.2);
  CHECK(cfg.gains.c_tilde == 0.04);
  CHECK(cfg.gains.w == 0.05);
  CHECK(cfg.gains.rule == WeightRule::OptimalFeedback);
  CHECK(cfg.policy.blocking_threshold == 5.0);
  CHECK(cfg.policy.max_redraws == 4);
  CHECK(cfg.policy.t_floor == 1e-6);
  CHECK(cfg.policy.stability.floor == 2e-4);
  CHECK(cfg.policy.stability.scale == 3e-4);
  CHECK(cfg.h0_diag == 2.0);
  CHECK(cfg.stop_tolerance == 1e-9);
  CHECK(cfg.stop_window == 3);
  CHECK(cfg.timing);
}
