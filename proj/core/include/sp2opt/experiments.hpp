#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sp2opt/airfoil.hpp"
#include "sp2opt/optimizer.hpp"
#include "sp2opt/scaling.hpp"

namespace sp2opt {

// Published gain settings for the quartic stream. theta starts at the
// all-ones point; the loss minimum is 0 at the origin.
RunConfig quartic_2spsa_config(int p, long iterations, std::uint64_t seed);
RunConfig quartic_e2spsa_config(int p, long iterations, std::uint64_t seed);
RunConfig quartic_2sg_config(int p, long iterations, std::uint64_t seed);

inline constexpr double kQuarticNoiseSigma = 0.05;

struct ReplicateSummary {
  int replicates = 0;
  double mean_normalized_terminal = 0.0;
  double max_normalized_terminal = 0.0;
  long total_measurements = 0;
  long total_redraws = 0;
  std::vector<std::string> files;
};

// Independent replicates with seeds derived from base.seed. When out_stem is
// nonempty each replicate's trace is written as <stem>_r<i>.<csv|json>.
ReplicateSummary run_quartic_replicates(const RunConfig& base, double sigma,
                                        int replicates,
                                        const std::string& out_stem,
                                        const std::string& format);

struct AirfoilOptions {
  std::string data_path;  // empty: synthetic stand-in with the table's ranges
  std::uint64_t seed = 1;
  int epochs = 10;
  std::string out_stem;  // empty: no trace files
  std::string format = "csv";
};

struct OptimizerOutcome {
  std::string name;
  double initial_erf = 0.0;
  double terminal_erf = 0.0;
  long gradient_evals = 0;
  std::string file;
};

// SGD and ADAM take one gradient evaluation per iteration for epochs*n
// iterations; the Hessian-based gradient route runs a third of the
// iterations, so all three finish at the same evaluation budget.
struct AirfoilSummary {
  long n = 0;
  bool synthetic = false;
  OptimizerOutcome sgd;
  OptimizerOutcome adam;
  OptimizerOutcome second_order;
};

AirfoilSummary run_airfoil_study(const AirfoilOptions& opt);

std::vector<std::string> write_scaling_outputs(const ScalingStudy& study,
                                               const std::string& out_stem,
                                               const std::string& format);

}  // namespace sp2opt
