#pragma once

// Corpus sweeps: a JSON configuration selects dimensions, a corpus of random
// harmonic polynomials, a family of geometric configurations and the checks
// to run over their product. Results come back in a fixed order regardless of
// how many worker threads ran them.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "threespheres/verify.hpp"

namespace threespheres {

struct SweepConfig {
  std::vector<int> dimensions{2, 3};

  int corpus_count = 100;
  int max_degree = 8;
  std::uint64_t corpus_seed = 1;
  double growth_radius = 2.0;

  int configs = 20;
  std::uint64_t geometry_seed = 7;
  double x_lo = 0.1;
  double x_hi = 0.7;
  double gap = 0.05;
  double r_min = 0.02;
  int t_values = 10;
  int xbar_values = 5;
  std::vector<double> lambdas{0.3, 0.6, 0.9};

  std::vector<std::string> checks;
  BetaChoice beta = BetaChoice::omega();
  QuadratureOptions quadrature;

  std::optional<std::string> csv_path;
  std::optional<std::string> json_path;
};

/// Check names understood by the sweep, in execution order.
const std::vector<std::string>& sweep_check_names();

/// Parses and validates a configuration; throws InvalidInput naming the offending
/// field (and the parser location for malformed JSON).
SweepConfig sweep_config_from_json(std::string_view text);

struct SweepRow {
  InequalityReport report;
  int n = 0;
  int config = -1;
  int poly = -1;
  double x_norm = 0.0;
  double r = 0.0;
  /// t for sphere checks, |xbar| for ball checks, the worst radius for log-convexity.
  double parameter = 0.0;
};

struct SkippedCheck {
  std::string check;
  int n = 0;
  int config = -1;
  std::string reason;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SkippedCheck> skipped;

  bool all_pass() const;
  int failures() const;
};

/// Worker count from THREESPHERES_THREADS (default: hardware concurrency, at least 1).
int sweep_threads();

SweepResult run_sweep(const SweepConfig& config, int threads = sweep_threads());

/// name,n,x_norm,r,t_or_xbar,exponent,lhs,rhs,ratio,pass with %.17g floats and LF endings.
std::string sweep_csv(const SweepResult& result);

/// One JSON object per line: every report, then every skipped check.
std::string sweep_json_lines(const SweepResult& result);

}  // namespace threespheres
