#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "sp2opt/config.hpp"
#include "sp2opt/experiments.hpp"
#include "sp2opt/factored_hessian.hpp"
#include "sp2opt/paired_run.hpp"
#include "sp2opt/rng.hpp"
#include "sp2opt/scaling.hpp"
#include "sp2opt/skewed_quartic.hpp"

namespace {

struct RunArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string experiment = "quartic";
  std::string variant = "2spsa";
  int p = 10;
  std::uint64_t seed = 1;
  long iterations = 1000;
  long budget = -1;
  int replicates = 1;
  std::string out;
  std::string format = "csv";
  std::string data_path;
  int epochs = 10;
  double sigma = sp2opt::kQuarticNoiseSigma;
};

struct BenchArgs {
  std::vector<int> dims = {250, 500, 1000, 2000};
  int iters = 10;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

struct CheckArgs {
  int p = 10;
  long iterations = 200;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
};

int do_run(const RunArgs& args) {
  sp2opt::KeyValues kv;
  if (!args.config_path.empty()) {
    kv = sp2opt::parse_config_file(args.config_path);
  }
  sp2opt::apply_assignments(kv, args.sets);

  const std::string experiment = kv.get_string("experiment", args.experiment);

  if (experiment == "airfoil") {
    sp2opt::AirfoilOptions opt;
    opt.data_path = kv.get_string("data", args.data_path);
    opt.seed = kv.get_u64("seed", args.seed);
    opt.epochs = static_cast<int>(kv.get_long("epochs", args.epochs));
    opt.out_stem = args.out;
    opt.format = args.format;
    kv.reject_unconsumed();

    const sp2opt::AirfoilSummary s = sp2opt::run_airfoil_study(opt);
    std::printf("airfoil n=%ld source=%s epochs=%d\n", s.n,
                s.synthetic ? "synthetic" : opt.data_path.c_str(), opt.epochs);
    for (const sp2opt::OptimizerOutcome* o :
         {&s.sgd, &s.adam, &s.second_order}) {
      std::printf(
          "%-4s grad_evals=%ld initial_erf=%.6g terminal_erf=%.6g "
          "reduction=%.1f%%\n",
          o->name.c_str(), o->gradient_evals, o->initial_erf, o->terminal_erf,
          100.0 * (1.0 - o->terminal_erf / o->initial_erf));
      if (!o->file.empty()) std::printf("  trace: %s\n", o->file.c_str());
    }
    return 0;
  }
  if (experiment != "quartic") {
    throw sp2opt::ConfigError("unknown experiment: " + experiment);
  }

  const std::string variant_name = kv.get_string("variant", args.variant);
  const auto variant = sp2opt::parse_variant(variant_name);
  if (!variant) throw sp2opt::ConfigError("unknown variant: " + variant_name);
  const int p = static_cast<int>(kv.get_long("p", args.p));
  const long iterations = kv.get_long("iterations", args.iterations);
  const std::uint64_t seed = kv.get_u64("seed", args.seed);

  sp2opt::RunConfig base;
  switch (*variant) {
    case sp2opt::Variant::TwoSpsa:
      base = sp2opt::quartic_2spsa_config(p, iterations, seed);
      break;
    case sp2opt::Variant::E2Spsa:
      base = sp2opt::quartic_e2spsa_config(p, iterations, seed);
      break;
    case sp2opt::Variant::TwoSg:
    case sp2opt::Variant::E2Sg:
      base = sp2opt::quartic_2sg_config(p, iterations, seed);
      base.variant = *variant;
      break;
  }
  base.measurement_budget = kv.get_long("budget", args.budget);
  sp2opt::apply_run_keys(kv, base);
  const double sigma = kv.get_double("sigma", args.sigma);
  const int replicates =
      static_cast<int>(kv.get_long("replicates", args.replicates));
  kv.reject_unconsumed();

  const sp2opt::ReplicateSummary s = sp2opt::run_quartic_replicates(
      base, sigma, replicates, args.out, args.format);
  std::printf(
      "quartic variant=%s p=%d iterations=%ld replicates=%d "
      "mean_normalized_terminal=%.6g max=%.6g measurements=%ld redraws=%ld\n",
      sp2opt::variant_name(base.variant), base.p,
      sp2opt::planned_iterations(base), s.replicates,
      s.mean_normalized_terminal, s.max_normalized_terminal,
      s.total_measurements, s.total_redraws);
  for (const std::string& f : s.files) std::printf("  trace: %s\n", f.c_str());
  return 0;
}

int do_bench(const BenchArgs& args) {
  const std::vector<int> dims = args.dims;
  const sp2opt::ScalingStudy study =
      sp2opt::run_scaling_study(dims, args.iters, args.seed);
  std::printf("%8s %14s %14s %10s\n", "p", "efficient_s", "dense_s", "ratio");
  for (const sp2opt::ScalingPoint& pt : study.points) {
    std::printf("%8d %14.6g %14.6g %10.3f\n", pt.p, pt.efficient_s, pt.dense_s,
                pt.dense_s / pt.efficient_s);
  }
  std::printf("efficient slope=%.3f r2=%.4f\n", study.efficient.slope,
              study.efficient.r2);
  std::printf("dense     slope=%.3f r2=%.4f\n", study.dense.slope,
              study.dense.r2);
  std::printf("ratio     slope=%.5f r2=%.4f monotone=%s\n", study.ratio.slope,
              study.ratio.r2, study.ratio_monotone ? "yes" : "no");
  if (!args.out.empty()) {
    for (const std::string& f :
         sp2opt::write_scaling_outputs(study, args.out, args.format)) {
      std::printf("  wrote: %s\n", f.c_str());
    }
  }
  return 0;
}

int do_check(const CheckArgs& args) {
  int failures = 0;
  const auto report = [&](const char* name, bool ok, double value) {
    std::printf("[%s] %-28s %.3g\n", ok ? "PASS" : "FAIL", name, value);
    if (!ok) ++failures;
  };

  {
    sp2opt::Rng rng(args.seed);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int p = 2 + static_cast<int>(rng.uniform() * 11) % 11;
      Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(
          p, p, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
      A = 0.5 * (A + A.transpose()).eval();
      const sp2opt::FactoredHessian F = sp2opt::FactoredHessian::factorize(A);
      const double err =
          (F.reconstruct() - A).norm() / std::max(1.0, A.norm());
      worst = std::max(worst, err);
    }
    report("factorize round-trip", worst <= 1e-10, worst);
  }
  {
    sp2opt::RunConfig config =
        sp2opt::quartic_2spsa_config(args.p, args.iterations, args.seed);
    sp2opt::QuarticLossOracle oracle(sp2opt::SkewedQuartic(args.p),
                                     sp2opt::kQuarticNoiseSigma);
    const sp2opt::MirrorResult m =
        sp2opt::run_with_dense_mirror(config, &oracle, nullptr);
    report("dense mirror deviation", m.max_relative_deviation <= args.tolerance,
           m.max_relative_deviation);
  }
  {
    sp2opt::RunConfig config =
        sp2opt::quartic_e2spsa_config(args.p, args.iterations, args.seed);
    sp2opt::QuarticLossOracle oracle(sp2opt::SkewedQuartic(args.p),
                                     sp2opt::kQuarticNoiseSigma);
    const sp2opt::ShadowAgreement s =
        sp2opt::run_with_shadow_pairing(config, &oracle, nullptr);
    const bool ok = s.compared > 0 &&
                    s.max_theta_deviation <= args.tolerance &&
                    s.max_hessian_deviation <= args.tolerance;
    std::printf("  shadow: %ld/%ld iterations compared\n", s.compared,
                s.iterations);
    report("fast-path shadow agreement", ok,
           std::max(s.max_theta_deviation, s.max_hessian_deviation));
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"second-order simultaneous-perturbation optimization toolkit"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run an optimization experiment");
  run->add_option("--config", run_args.config_path,
                  "key=value settings file ('#' comments)");
  run->add_option("--set", run_args.sets,
                  "override a config key, e.g. --set a=0.1");
  run->add_option("--experiment", run_args.experiment, "quartic | airfoil");
  run->add_option("--variant", run_args.variant, "2spsa | e2spsa | 2sg | e2sg");
  run->add_option("--p", run_args.p, "problem dimension (quartic)");
  run->add_option("--seed", run_args.seed, "master seed");
  run->add_option("--iterations", run_args.iterations, "iteration count");
  run->add_option("--budget", run_args.budget,
                  "measurement budget (overrides --iterations)");
  run->add_option("--replicates", run_args.replicates,
                  "independent replicates with derived seeds");
  run->add_option("--out", run_args.out, "trace output path stem");
  run->add_option("--format", run_args.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--data", run_args.data_path,
                  "airfoil table path (default: synthetic stand-in)");
  run->add_option("--epochs", run_args.epochs, "airfoil training epochs");
  run->add_option("--sigma", run_args.sigma, "quartic measurement noise");

  BenchArgs bench_args;
  CLI::App* bench =
      app.add_subcommand("bench", "dimension-scaling timing study");
  bench->add_option("--dims", bench_args.dims, "dimensions to time");
  bench->add_option("--iters", bench_args.iters, "timed iterations per dim");
  bench->add_option("--seed", bench_args.seed, "master seed");
  bench->add_option("--out", bench_args.out, "output path stem");
  bench->add_option("--format", bench_args.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  CheckArgs check_args;
  CLI::App* check =
      app.add_subcommand("check", "fast dual-route consistency checks");
  check->add_option("--p", check_args.p, "problem dimension");
  check->add_option("--iterations", check_args.iterations, "iterations");
  check->add_option("--seed", check_args.seed, "master seed");
  check->add_option("--tolerance", check_args.tolerance,
                    "relative agreement tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(run_args);
    if (bench->parsed()) return do_bench(bench_args);
    if (check->parsed()) return do_check(check_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
