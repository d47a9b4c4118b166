#pragma once

// Numerical checks of the mean-value identities, the transfer identity for
// the Kelvin transform, and the three-spheres / three-balls inequalities.
//
// Inequality reports follow one rule: pass iff lhs <= rhs (1 + tolerance) +
// stderr_budget, where the budget is four propagated standard errors for
// Monte Carlo rules and zero otherwise. Identity checks report the relative
// error as lhs and the admissible error as rhs.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "threespheres/common.hpp"
#include "threespheres/geometry.hpp"
#include "threespheres/harmonic.hpp"
#include "threespheres/quadrature.hpp"

namespace threespheres {

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double exponent_used = 0.0;
  double tolerance = 0.0;
  double stderr_budget = 0.0;
  bool pass = false;
};

InequalityReport inequality_report(std::string name, double lhs, double rhs, double exponent,
                                   double tolerance, double stderr_budget = 0.0);
/// lhs = relative error, rhs = threshold, tolerance 0.
InequalityReport identity_report(std::string name, double relative_error, double threshold);

std::string to_json(const InequalityReport& report);

constexpr double kInequalityTolerance = 1e-9;
constexpr double kStderrMultiplier = 4.0;

/// Rule construction shared by all checks.
struct QuadratureOptions {
  /// Monte Carlo samples for n >= 4 (and for every n when force_monte_carlo is set).
  int mc_samples = 200000;
  std::uint64_t seed = 1;
  int radial_points = 64;
  /// Target accuracy used to size exact rules around integrable poles.
  double pole_tolerance = 1e-15;
  int max_rule_degree = 600;
  bool force_monte_carlo = false;
};

SphereRule make_sphere_rule(int n, int degree, const QuadratureOptions& opts,
                            std::uint64_t stream = 0);
BallRule make_ball_rule(int n, int degree, const QuadratureOptions& opts,
                        std::uint64_t stream = 0);

/// Geometry of one corpus configuration: the generating ball B_{x,r} inside B_1.
struct GeometryConfig {
  Vector x;
  double r = 0.0;
};

/// Uniform direction, |x| in [x_lo, x_hi], r in [r_lo, 1 - |x| - gap].
std::vector<GeometryConfig> sample_configs(int n, int count, std::uint64_t seed,
                                           double x_lo = 0.1, double x_hi = 0.7,
                                           double gap = 0.05, double r_lo = 0.02);

/// `count` harmonic polynomials, seeds derived from `seed` by index.
std::vector<HarmonicPolynomial> make_corpus(int n, int count, int max_degree, std::uint64_t seed,
                                            double growth_radius = 2.0);

// ---------------------------------------------------------------------------
// Mean-value identities. `degree` bounds the polynomial degree of f and sizes
// the exact rules; h is the finite-difference step.

/// d/dt int_{B_{x_t,r_t}} f = -(2|a| r_t)^{-1} int_{S_{x_t,r_t}} f (|y-a|^2 + R^2 - |y|^2) ds.
InequalityReport derivative_identity_check(const Field& f, int degree, const Family& fam,
                                           double t, double h = 1e-5,
                                           double threshold = 1e-5);

/// d/de int_{B_{x,r}} f = int_{S_{x,r}} f e.n ds and d/dr int_{B_{x,r}} f = int_{S_{x,r}} f ds;
/// lhs is the larger of the two relative errors.
InequalityReport gradient_identity_check(const Field& f, int degree, const Vector& x, double r,
                                         const Vector& e, double h = 1e-5,
                                         double threshold = 1e-5);

/// Along x(s) = x + s e, r(s) = r + s r_slope:
/// d/ds int_{B_{x(s),r(s)}} f = int_{S_{x,r}} f (e.n + r_slope) ds.
InequalityReport curve_derivative_check(const Field& f, int degree, const Vector& x, double r,
                                        const Vector& e, double r_slope, double h = 1e-5,
                                        double threshold = 1e-5);

// ---------------------------------------------------------------------------
// Transfer identity:
//   int_{S_{0,r_t^*}} |f^*|^2 ds = rho^2 (r_t / r_t^*) int_{S_{x_t,r_t}} |f|^2 ds_a.

std::vector<InequalityReport> transfer_identity_check(const PolynomialBatch& batch,
                                                      const Family& fam, double t,
                                                      const QuadratureOptions& opts = {},
                                                      double threshold = 1e-8);
InequalityReport transfer_identity_check(const HarmonicPolynomial& f, const Family& fam,
                                         double t, const QuadratureOptions& opts = {},
                                         double threshold = 1e-8);

// ---------------------------------------------------------------------------
// Log-convexity of L(r) in log r.

struct ConvexityGridReport {
  std::vector<double> radii;
  std::vector<double> values;
  double worst_r1 = 0.0;
  double worst_r = 0.0;
  double worst_r2 = 0.0;
  /// min over triples of alpha log L(r1) + (1 - alpha) log L(r2) - log L(r).
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Throws PreconditionViolated for a bad grid and NonpositiveL if L <= 0 on it.
ConvexityGridReport log_convexity_check(const std::function<double(double)>& L,
                                        const std::vector<double>& grid,
                                        double tolerance = 1e-10);

/// Sum_k c_k r^{2k+n-1}: the sphere L^2 norm squared from the harmonic expansion.
double parseval_sphere_l2_squared(const HarmonicPolynomial& f, double radius);

/// Largest relative difference between quadrature and Parseval values of L_2^2(r, f) on the grid.
double parseval_discrepancy(const HarmonicPolynomial& f, const std::vector<double>& grid,
                            const SphereRule& rule);

// ---------------------------------------------------------------------------
// Three spheres.

struct BetaChoice {
  enum class Mode { Alpha, Omega, Explicit };
  Mode mode = Mode::Omega;
  double value = 0.0;
  /// Explicit values above alpha are rejected unless this is set (negative controls).
  bool allow_above_alpha = false;

  static BetaChoice alpha() { return {Mode::Alpha, 0.0, false}; }
  static BetaChoice omega() { return {Mode::Omega, 0.0, false}; }
  static BetaChoice explicit_value(double beta, bool unchecked = false) {
    return {Mode::Explicit, beta, unchecked};
  }
};

/// Resolves the exponent at t; throws BetaOutOfRange for beta outside (0, alpha].
double resolve_beta(const Family& fam, double t, const BetaChoice& beta);

/// rbar int_{S_{xbar,rbar}} |f|^2 ds_a <= (r int_{S_{x,r}} |f|^2 ds_a)^beta (int_S |f|^2 ds_a)^{1-beta}
/// with xbar = x_t, rbar = r_t. One report per polynomial in the batch.
std::vector<InequalityReport> three_spheres_check(const PolynomialBatch& batch,
                                                  const Family& fam, double t,
                                                  const BetaChoice& beta = BetaChoice::omega(),
                                                  const QuadratureOptions& opts = {});
/// Several t values at once; the inner sphere S_{x,r} and S_R are integrated once.
std::vector<std::vector<InequalityReport>> three_spheres_check(
    const PolynomialBatch& batch, const Family& fam, const std::vector<double>& ts,
    const BetaChoice& beta = BetaChoice::omega(), const QuadratureOptions& opts = {});
InequalityReport three_spheres_check(const HarmonicPolynomial& f, const Family& fam, double t,
                                     const BetaChoice& beta = BetaChoice::omega(),
                                     const QuadratureOptions& opts = {});

/// n = 2, f holomorphic: the three-spheres inequality for (z - a)^2 f, i.e. with
/// ds_a replaced by (|y-a|^2 + 1 - |y|^2) ds.
InequalityReport holomorphic_variant_check(const Polynomial& f, const Family& fam, double t,
                                           const BetaChoice& beta = BetaChoice::omega(),
                                           const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Three balls and the plain-measure bounds.

/// Inputs shared by the ball inequalities. The family is generated by B_{x0,r0}.
struct BallsGeometry {
  Vector x0;
  double r0 = 0.0;
  double xbar_norm = 0.0;
  double R = 1.0;

  Vector xbar() const;
  double rbar() const;
  double delta0(Delta0Variant variant = Delta0Variant::ScaleDerived) const;
};

/// int_{B_{xbar,rbar}} |u|^2 dmu_a <= (int_{B_{x0,r0}} |u|^2 dmu_a)^delta (int_B |u|^2 dmu_a)^{1-delta}.
/// delta = nullopt means delta_0; throws DeltaOutOfRange outside (0, delta_0].
std::vector<InequalityReport> three_balls_check(const PolynomialBatch& batch,
                                                const BallsGeometry& geo,
                                                std::optional<double> delta = std::nullopt,
                                                const QuadratureOptions& opts = {});
/// Several xbar values over one generating ball, each at its own delta_0; the
/// balls B_{x0,r0} and B_R are integrated once. geo.xbar_norm is ignored.
std::vector<std::vector<InequalityReport>> three_balls_check(
    const PolynomialBatch& batch, const BallsGeometry& geo, const std::vector<double>& xbar_norms,
    const QuadratureOptions& opts = {});
InequalityReport three_balls_check(const HarmonicPolynomial& u, const BallsGeometry& geo,
                                   std::optional<double> delta = std::nullopt,
                                   const QuadratureOptions& opts = {});

struct EmbeddedBoundReports {
  /// Unit-ball form with constant 405 / (rbar (1 - lambda^2)^{5/2}); only when R = 1.
  std::optional<InequalityReport> unit;
  /// General R with constant 405 (R / rbar)^5 / (1 - lambda^2)^{5/2}.
  InequalityReport general;
  /// The same bound for the normalized averages A_2, prefactor (R / rbar)^{(n+5)/2}.
  InequalityReport averaged;
};

/// Throws PreconditionViolated if |x0| < R/2 or lambda outside (0, 1).
std::vector<EmbeddedBoundReports> embedded_bound_check(const PolynomialBatch& batch,
                                                       const BallsGeometry& geo, double lambda,
                                                       std::optional<double> delta = std::nullopt,
                                                       const QuadratureOptions& opts = {});
EmbeddedBoundReports embedded_bound_check(const HarmonicPolynomial& u, const BallsGeometry& geo,
                                          double lambda,
                                          std::optional<double> delta = std::nullopt,
                                          const QuadratureOptions& opts = {});

/// Slice radius used on the right of the embedding identity.
enum class SliceReading {
  /// sqrt(l^2 - |x-b|^2): the slice of a ball of radius l.
  Squared,
  /// sqrt(l - |x-b|^2).
  AsPrinted,
};

using EmbeddedField = std::function<double(const Vector&)>;

/// Integral of g over B^{n+5}_{(b,0),l} against the iterated form
///   int_{B^n_{b,l}} int_0^{s(x)} t^4 int_{S^4} g(x, t theta) dtheta dt dx.
/// `degree` bounds the polynomial degree of g.
InequalityReport embedding_identity_check(const EmbeddedField& g, int degree, const Vector& b,
                                          double l, SliceReading reading,
                                          double threshold = 1e-6);

}  // namespace threespheres
