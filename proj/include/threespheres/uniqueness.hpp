#pragma once

// Finite-prefix evaluation of the uniqueness criterion
//   rho_m / 100 log eps_m + phi(4 |x_m|)  ->  -infinity,
// rho_m = 1 / log(2 |x_m| / r_m), and the propagation-of-smallness bound for
// normalized averages that it rests on.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "threespheres/common.hpp"
#include "threespheres/geometry.hpp"
#include "threespheres/verify.hpp"

namespace threespheres {

struct SmallnessEntry {
  Vector x;
  double r = 0.0;
  /// log eps_m; kept in log form so that sequences like e^{-m^3} stay representable.
  double log_eps = 0.0;
};

using SmallnessSequence = std::vector<SmallnessEntry>;

/// JSON array of {"x": [...], "r": float, "eps": float} (or "log_eps" instead of "eps").
/// Throws InvalidInput with the parser's location on malformed input.
SmallnessSequence sequence_from_json(std::string_view text);

/// 1 / log(2 x_norm / r); throws ConstraintViolated unless 0 < 2r <= x_norm.
double rho(double x_norm, double r);

/// Monotone growth bound for A_2(r, u).
class GrowthEnvelope {
 public:
  enum class Kind { Power, ExpPower, Table };

  /// c r^p.
  static GrowthEnvelope power(double p, double c = 1.0);
  /// c e^{r^p}.
  static GrowthEnvelope exp_power(double p, double c = 1.0);
  /// Linear interpolation of (r, value) samples, constant below the first sample and
  /// extended with the last slope beyond the final one. Samples must be increasing in r
  /// and nondecreasing in value.
  static GrowthEnvelope table(std::vector<std::pair<double, double>> samples);

  /// {"kind": "power"|"exp_power", "p": .., "c": ..} or {"kind": "table", "samples": [[r, v], ...]}.
  static GrowthEnvelope from_json(std::string_view text);

  Kind kind() const { return kind_; }
  double operator()(double r) const;
  std::string describe() const;

 private:
  GrowthEnvelope(Kind kind, double p, double c, std::vector<std::pair<double, double>> samples)
      : kind_(kind), p_(p), c_(c), samples_(std::move(samples)) {}

  Kind kind_;
  double p_;
  double c_;
  std::vector<std::pair<double, double>> samples_;
};

enum class Trend { Diverges, DoesNot, Inconclusive };

const char* to_string(Trend trend);

struct TraceRow {
  int m = 0;
  double x_norm = 0.0;
  double r = 0.0;
  double rho = 0.0;
  /// rho/100 log eps + phi(4|x|).
  double term_a = 0.0;
  /// rho/100 log eps + log phi(4|x|).
  double term_b = 0.0;
  Trend running_a = Trend::Inconclusive;
  Trend running_b = Trend::Inconclusive;
};

struct CriterionTrace {
  std::vector<TraceRow> rows;
  Trend verdict_a = Trend::Inconclusive;
  Trend verdict_b = Trend::Inconclusive;
};

struct TrendOptions {
  int window = 10;
  double threshold = 1e3;
};

/// Diverges: the last `window` terms decrease strictly and end below -threshold.
/// Inconclusive: fewer than `window` terms, or decreasing but not yet below -threshold.
/// DoesNot: anything else.
Trend trend_of(const std::vector<double>& terms, const TrendOptions& opts = {});

/// Throws ConstraintViolated on a bad entry and NonpositivePhi when log phi is undefined.
CriterionTrace criterion_trace(const SmallnessSequence& seq, const GrowthEnvelope& phi,
                               const TrendOptions& opts = {});

/// "trend: diverges (variant A and B)" and similar.
std::string verdict_line(const CriterionTrace& trace);

/// CSV with header m,x_norm,r,rho,term_a,term_b,verdict.
std::string trace_csv(const CriterionTrace& trace);

/// sqrt(405) / (1 - lambda^2)^{5/4} (R / rbar)^{(n+5)/2} eps^delta M^{1-delta}, delta = delta_0:
/// a bound on A_2(xbar, lambda rbar, u) whenever A_2(x0, r0, u) <= eps and A_2(R, u) <= M.
double propagation_bound(const Vector& x0, double r0, double xbar_norm, double lambda, double R,
                         double eps, double M,
                         Delta0Variant variant = Delta0Variant::ScaleDerived);

struct DeltaLowerBound {
  double rho = 0.0;
  /// lhs = rho / 100, rhs = delta_0 in each reading.
  InequalityReport scale_derived;
  InequalityReport as_printed;
  /// Error text when the printed formula is undefined (its log argument can be negative).
  std::optional<std::string> as_printed_error;

  bool any_pass() const { return scale_derived.pass || as_printed.pass; }
};

/// delta_0 with R = 2|x|, xbar = |x|/3, r0 = r against rho(|x|, r) / 100.
DeltaLowerBound delta_lower_bound_check(double x_norm, double r);

}  // namespace threespheres
