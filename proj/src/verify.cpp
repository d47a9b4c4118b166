#include "threespheres/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "threespheres/random.hpp"

namespace threespheres {

InequalityReport inequality_report(std::string name, double lhs, double rhs, double exponent,
                                   double tolerance, double stderr_budget) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.ratio = rhs != 0.0 ? lhs / rhs : (lhs == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  r.exponent_used = exponent;
  r.tolerance = tolerance;
  r.stderr_budget = stderr_budget;
  r.pass = lhs <= rhs * (1.0 + tolerance) + stderr_budget;
  return r;
}

InequalityReport identity_report(std::string name, double relative_error, double threshold) {
  return inequality_report(std::move(name), relative_error, threshold, 0.0, 0.0, 0.0);
}

std::string to_json(const InequalityReport& report) {
  const nlohmann::json doc = {
      {"name", report.name},
      {"lhs", report.lhs},
      {"rhs", report.rhs},
      {"ratio", report.ratio},
      {"exponent_used", report.exponent_used},
      {"tolerance", report.tolerance},
      {"stderr_budget", report.stderr_budget},
      {"pass", report.pass},
  };
  return doc.dump();
}

SphereRule make_sphere_rule(int n, int degree, const QuadratureOptions& opts,
                            std::uint64_t stream) {
  if (opts.force_monte_carlo || n >= 4) {
    return SphereRule::monte_carlo(n, opts.mc_samples, derive_seed(opts.seed, stream));
  }
  return SphereRule::exact(n, std::min(degree, opts.max_rule_degree));
}

BallRule make_ball_rule(int n, int degree, const QuadratureOptions& opts, std::uint64_t stream) {
  return BallRule::make(make_sphere_rule(n, degree, opts, stream), opts.radial_points);
}

std::vector<GeometryConfig> sample_configs(int n, int count, std::uint64_t seed, double x_lo,
                                           double x_hi, double gap, double r_lo) {
  if (n < 2 || count < 0 || !(0 < x_lo && x_lo <= x_hi && x_hi + gap + r_lo < 1.0)) {
    fail(ErrorCode::PreconditionViolated, "sample_configs: invalid ranges");
  }
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
  std::vector<GeometryConfig> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Vector dir = rng.unit_vector(n);
    const double x_norm = rng.uniform(x_lo, x_hi);
    const double r = rng.uniform(r_lo, 1.0 - x_norm - gap);
    out.push_back({x_norm * dir, r});
  }
  return out;
}

std::vector<HarmonicPolynomial> make_corpus(int n, int count, int max_degree, std::uint64_t seed,
                                            double growth_radius) {
  std::vector<HarmonicPolynomial> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(random_harmonic_polynomial(n, max_degree,
                                             derive_seed(seed, static_cast<std::uint64_t>(i)),
                                             growth_radius));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

BallRule identity_ball_rule(int n, int degree) {
  return BallRule::make(SphereRule::exact(n, degree + 2), (degree + n) / 2 + 4);
}

Complex ball_value(const Field& f, const Vector& center, double radius, const BallRule& rule) {
  return ball_integral(f, center, radius, rule).value;
}

double relative_error(Complex estimate, Complex exact, double scale) {
  return std::abs(estimate - exact) / std::max(std::abs(exact), scale);
}

}  // namespace

InequalityReport derivative_identity_check(const Field& f, int degree, const Family& fam,
                                           double t, double h, double threshold) {
  t = fam.checked_parameter(t, true);
  const double top = fam.x_norm();
  if (!(t < top)) fail(ErrorCode::OutOfRange, "derivative identity needs t < |x|");
  h = std::min({h, 0.5 * t, 0.5 * (top - t)});
  const int n = fam.dimension();
  const BallRule ball = identity_ball_rule(n, degree);
  const SphereRule sphere = SphereRule::exact(n, degree + 2);
  auto mass = [&](double s) {
    return ball_value(f, family_center(fam, s), family_radius(fam, s), ball);
  };
  const Complex fd = (mass(t + h) - mass(t - h)) / (2.0 * h);

  const Vector c = family_center(fam, t);
  const double rt = family_radius(fam, t);
  const Vector& a = fam.inversion().center;
  const double R2 = fam.R() * fam.R();
  auto weight = [&](const Vector& y) { return (y - a).squaredNorm() + R2 - y.squaredNorm(); };
  const double k = -1.0 / (2.0 * fam.a_norm() * rt);
  const Complex closed =
      k * surface_integral([&](const Vector& y) { return f(y) * weight(y); }, c, rt, sphere).value;
  const double scale =
      std::abs(k) *
      surface_integral([&](const Vector& y) { return std::abs(f(y)) * weight(y); }, c, rt, sphere)
          .value;
  return identity_report("derivative_identity", relative_error(fd, closed, scale), threshold);
}

InequalityReport gradient_identity_check(const Field& f, int degree, const Vector& x, double r,
                                         const Vector& e, double h, double threshold) {
  if (!(r > h) || std::abs(e.norm() - 1.0) > 1e-12 || e.size() != x.size()) {
    fail(ErrorCode::PreconditionViolated, "gradient identity needs r > h and a unit vector e");
  }
  const int n = static_cast<int>(x.size());
  const BallRule ball = identity_ball_rule(n, degree);
  const SphereRule sphere = SphereRule::exact(n, degree + 2);
  const Complex d_e =
      (ball_value(f, x + h * e, r, ball) - ball_value(f, x - h * e, r, ball)) / (2.0 * h);
  const Complex d_r = (ball_value(f, x, r + h, ball) - ball_value(f, x, r - h, ball)) / (2.0 * h);
  const Complex flux =
      surface_integral([&](const Vector& y) { return f(y) * (e.dot(y - x) / r); }, x, r, sphere)
          .value;
  const Complex total = surface_integral(f, x, r, sphere).value;
  const double scale =
      surface_integral([&](const Vector& y) { return std::abs(f(y)); }, x, r, sphere).value;
  const double err =
      std::max(relative_error(d_e, flux, scale), relative_error(d_r, total, scale));
  return identity_report("gradient_identity", err, threshold);
}

InequalityReport curve_derivative_check(const Field& f, int degree, const Vector& x, double r,
                                        const Vector& e, double r_slope, double h,
                                        double threshold) {
  if (!(r > h * (1.0 + std::abs(r_slope))) || std::abs(e.norm() - 1.0) > 1e-12 ||
      e.size() != x.size()) {
    fail(ErrorCode::PreconditionViolated, "curve derivative needs r > h |r'| and unit e");
  }
  const int n = static_cast<int>(x.size());
  const BallRule ball = identity_ball_rule(n, degree);
  const SphereRule sphere = SphereRule::exact(n, degree + 2);
  const Complex fd = (ball_value(f, x + h * e, r + h * r_slope, ball) -
                      ball_value(f, x - h * e, r - h * r_slope, ball)) /
                     (2.0 * h);
  auto weight = [&](const Vector& y) { return e.dot(y - x) / r + r_slope; };
  const Complex closed =
      surface_integral([&](const Vector& y) { return f(y) * weight(y); }, x, r, sphere).value;
  const double scale =
      surface_integral([&](const Vector& y) { return std::abs(f(y)) * std::abs(weight(y)); }, x,
                       r, sphere)
          .value;
  return identity_report("curve_derivative", relative_error(fd, closed, scale), threshold);
}

// ---------------------------------------------------------------------------

namespace {

// |c| / (|a| - |c|) for a sphere centered at c, codirected with a.
double pole_ratio(double radius, double center_norm, double a_norm) {
  return radius / (a_norm - center_norm);
}

SphereRule pole_sphere_rule(int n, int max_degree, double ratio, const QuadratureOptions& opts,
                            std::uint64_t stream, double pole_order = 4.0) {
  return make_sphere_rule(n,
                          pole_rule_degree(max_degree, ratio, opts.pole_tolerance,
                                           opts.max_rule_degree, pole_order),
                          opts, stream);
}

BallRule pole_ball_rule(int n, int max_degree, double ratio, const QuadratureOptions& opts,
                        std::uint64_t stream) {
  return BallRule::make(pole_sphere_rule(n, max_degree, ratio, opts, stream), opts.radial_points);
}

PolynomialBatch single(const HarmonicPolynomial& f) {
  return PolynomialBatch(std::vector<HarmonicPolynomial>{f});
}

// One-sigma error of c * A^p * B^q from the errors of A and B.
double power_product_error(double value, double p, double a, double sa, double q, double b,
                           double sb) {
  const double ra = a > 0 ? p * sa / a : 0.0;
  const double rb = b > 0 ? q * sb / b : 0.0;
  return std::abs(value) * std::hypot(ra, rb);
}

}  // namespace

std::vector<InequalityReport> transfer_identity_check(const PolynomialBatch& batch,
                                                      const Family& fam, double t,
                                                      const QuadratureOptions& opts,
                                                      double threshold) {
  t = fam.checked_parameter(t, true);
  const int n = fam.dimension();
  const Inversion& inv = fam.inversion();
  const double a_norm = fam.a_norm();
  const double rho2 = fam.rho() * fam.rho();
  const Vector c = family_center(fam, t);
  const double rt = family_radius(fam, t);
  const double rs = image_radius(fam, t);

  // |f^*(y)|^2 = (rho^2/|y-a|^2)^{n-2} |f(phi(y))|^2.
  const PointMap kelvin = [&](Eigen::MatrixXd& points, Eigen::VectorXd& weights) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const Vector d = points.col(j) - inv.center;
      const double d2 = d.squaredNorm();
      points.col(j) = inv.center + (rho2 / d2) * d;
      weights[j] *= std::pow(rho2 / d2, n - 2);
    }
  };
  const SphereRule image_rule =
      pole_sphere_rule(n, batch.max_degree(), pole_ratio(rs, 0.0, a_norm), opts, 1,
                       2.0 * batch.max_degree() + 4.0);
  const BatchEstimate lhs =
      sphere_squared_norms_mapped(batch, Vector::Zero(n), rs, image_rule, kelvin);

  const SphereRule family_rule =
      pole_sphere_rule(n, batch.max_degree(), pole_ratio(rt, t, a_norm), opts, 2);
  const BatchEstimate sa = sphere_squared_norms(batch, c, rt, family_rule, Density::s_a(inv));
  const double k = rho2 * rt / rs;

  std::vector<InequalityReport> out;
  out.reserve(batch.size());
  for (int p = 0; p < batch.size(); ++p) {
    const double left = lhs.value[p];
    const double right = k * sa.value[p];
    const double scale = std::max(std::abs(left), std::abs(right));
    const double err = scale > 0 ? std::abs(left - right) / scale : 0.0;
    const double budget =
        scale > 0 ? kStderrMultiplier * std::hypot(lhs.std_error[p], k * sa.std_error[p]) / scale
                  : 0.0;
    out.push_back(inequality_report("transfer_identity", err, threshold, 0.0, 0.0, budget));
  }
  return out;
}

InequalityReport transfer_identity_check(const HarmonicPolynomial& f, const Family& fam,
                                         double t, const QuadratureOptions& opts,
                                         double threshold) {
  return transfer_identity_check(single(f), fam, t, opts, threshold).front();
}

// ---------------------------------------------------------------------------

ConvexityGridReport log_convexity_check(const std::function<double(double)>& L,
                                        const std::vector<double>& grid, double tolerance) {
  if (grid.size() < 3) fail(ErrorCode::PreconditionViolated, "convexity grid needs 3 radii");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      fail(ErrorCode::PreconditionViolated, "convexity grid must be positive and increasing");
    }
  }
  ConvexityGridReport out;
  out.radii = grid;
  out.tolerance = tolerance;
  std::vector<double> logs;
  for (double r : grid) {
    const double v = L(r);
    if (!(v > 0)) {
      std::ostringstream msg;
      msg << "L(" << r << ") = " << v << " is not positive";
      fail(ErrorCode::NonpositiveL, msg.str());
    }
    out.values.push_back(v);
    logs.push_back(std::log(v));
  }
  out.margin = std::numeric_limits<double>::infinity();
  const std::size_t g = grid.size();
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = i + 1; j < g; ++j) {
      for (std::size_t k = j + 1; k < g; ++k) {
        const double alpha = std::log(grid[k] / grid[j]) / std::log(grid[k] / grid[i]);
        const double m = alpha * logs[i] + (1.0 - alpha) * logs[k] - logs[j];
        if (m < out.margin) {
          out.margin = m;
          out.worst_r1 = grid[i];
          out.worst_r = grid[j];
          out.worst_r2 = grid[k];
        }
      }
    }
  }
  out.pass = out.margin >= -tolerance;
  return out;
}

double parseval_sphere_l2_squared(const HarmonicPolynomial& f, double radius) {
  const int n = f.dimension();
  double total = 0.0;
  for (int k = 0; k <= f.degree(); ++k) {
    total += sphere_l2_squared(f.polynomial().homogeneous_part(k), 1.0) *
             std::pow(radius, 2 * k + n - 1);
  }
  return total;
}

double parseval_discrepancy(const HarmonicPolynomial& f, const std::vector<double>& grid,
                            const SphereRule& rule) {
  const Vector origin = Vector::Zero(f.dimension());
  double worst = 0.0;
  for (double r : grid) {
    const double quad =
        surface_integral([&](const Vector& y) { return std::norm(f(y)); }, origin, r, rule).value;
    const double exact = parseval_sphere_l2_squared(f, r);
    worst = std::max(worst, std::abs(quad - exact) / exact);
  }
  return worst;
}

// ---------------------------------------------------------------------------

double resolve_beta(const Family& fam, double t, const BetaChoice& beta) {
  const Exponents ex = exponents(fam, t);
  switch (beta.mode) {
    case BetaChoice::Mode::Alpha:
      return ex.alpha;
    case BetaChoice::Mode::Omega:
      return ex.omega;
    case BetaChoice::Mode::Explicit:
      break;
  }
  if (!(beta.value > 0) || (!beta.allow_above_alpha && beta.value > ex.alpha * (1.0 + 1e-12))) {
    std::ostringstream msg;
    msg << "beta = " << beta.value << " outside (0, alpha] with alpha = " << ex.alpha;
    fail(ErrorCode::BetaOutOfRange, msg.str());
  }
  return beta.value;
}

std::vector<std::vector<InequalityReport>> three_spheres_check(const PolynomialBatch& batch,
                                                               const Family& fam,
                                                               const std::vector<double>& ts,
                                                               const BetaChoice& beta,
                                                               const QuadratureOptions& opts) {
  std::vector<double> params;
  std::vector<double> betas;
  for (double t : ts) {
    params.push_back(fam.checked_parameter(t, true));
    betas.push_back(resolve_beta(fam, params.back(), beta));
  }
  const int n = fam.dimension();
  const int d = batch.max_degree();
  const Density sa = Density::s_a(fam.inversion());
  const double a_norm = fam.a_norm();
  const double r = fam.r();
  const double R = fam.R();
  const BatchEstimate inner = sphere_squared_norms(
      batch, fam.x(), r, pole_sphere_rule(n, d, pole_ratio(r, fam.x_norm(), a_norm), opts, 11),
      sa);
  const BatchEstimate outer = sphere_squared_norms(
      batch, Vector::Zero(n), R, pole_sphere_rule(n, d, pole_ratio(R, 0.0, a_norm), opts, 13),
      sa);

  std::vector<std::vector<InequalityReport>> out;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double t = params[k];
    const double b = betas[k];
    // At t = |x| both sides use the same sphere and the same numbers.
    const bool endpoint = t == fam.x_norm();
    const double rb = endpoint ? r : family_radius(fam, t);
    const BatchEstimate middle =
        endpoint ? inner
                 : sphere_squared_norms(batch, family_center(fam, t), rb,
                                        pole_sphere_rule(n, d, pole_ratio(rb, t, a_norm), opts,
                                                         derive_seed(12, k)),
                                        sa);
    std::vector<InequalityReport> row;
    row.reserve(batch.size());
    for (int p = 0; p < batch.size(); ++p) {
      const double lhs = rb * middle.value[p];
      const double ix = r * inner.value[p];
      const double is = outer.value[p];
      const double rhs = std::pow(ix, b) * std::pow(is, 1.0 - b);
      const double s_rhs = power_product_error(rhs, b, ix, r * inner.std_error[p], 1.0 - b, is,
                                               outer.std_error[p]);
      const double budget = kStderrMultiplier * std::hypot(rb * middle.std_error[p], s_rhs);
      row.push_back(inequality_report("three_spheres", lhs, rhs, b, kInequalityTolerance, budget));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<InequalityReport> three_spheres_check(const PolynomialBatch& batch,
                                                  const Family& fam, double t,
                                                  const BetaChoice& beta,
                                                  const QuadratureOptions& opts) {
  return three_spheres_check(batch, fam, std::vector<double>{t}, beta, opts).front();
}

InequalityReport three_spheres_check(const HarmonicPolynomial& f, const Family& fam, double t,
                                     const BetaChoice& beta, const QuadratureOptions& opts) {
  return three_spheres_check(single(f), fam, t, beta, opts).front();
}

InequalityReport holomorphic_variant_check(const Polynomial& f, const Family& fam, double t,
                                           const BetaChoice& beta,
                                           const QuadratureOptions& opts) {
  if (fam.dimension() != 2 || f.dimension() != 2) {
    fail(ErrorCode::PreconditionViolated, "holomorphic variant is two-dimensional");
  }
  if (!is_holomorphic(f)) {
    fail(ErrorCode::PreconditionViolated, "function is not a polynomial in y1 + i y2");
  }
  const Vector& a = fam.inversion().center;
  const Polynomial w = complex_coordinate() - Polynomial::constant(2, Complex(a[0], a[1]));
  InequalityReport report =
      three_spheres_check(HarmonicPolynomial(w * w * f), fam, t, beta, opts);
  report.name = "holomorphic_variant";
  return report;
}

// ---------------------------------------------------------------------------

Vector BallsGeometry::xbar() const { return (xbar_norm / x0.norm()) * x0; }

double BallsGeometry::rbar() const {
  return correlated_radius_general(x0.norm(), r0, xbar_norm, R);
}

double BallsGeometry::delta0(Delta0Variant variant) const {
  return threespheres::delta0(x0.norm(), r0, xbar_norm, R, variant);
}

namespace {

double resolve_delta(const BallsGeometry& geo, std::optional<double> delta) {
  const double d0 = geo.delta0();
  if (!delta) return d0;
  if (!(*delta > 0) || *delta > d0 * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "delta = " << *delta << " outside (0, delta_0] with delta_0 = " << d0;
    fail(ErrorCode::DeltaOutOfRange, msg.str());
  }
  return *delta;
}

InequalityReport balls_report(double middle, double s_middle, double small, double s_small,
                              double whole, double s_whole, double dl) {
  const double rhs = std::pow(small, dl) * std::pow(whole, 1.0 - dl);
  const double s_rhs = power_product_error(rhs, dl, small, s_small, 1.0 - dl, whole, s_whole);
  const double budget = kStderrMultiplier * std::hypot(s_middle, s_rhs);
  return inequality_report("three_balls", middle, rhs, dl, kInequalityTolerance, budget);
}

}  // namespace

std::vector<std::vector<InequalityReport>> three_balls_check(
    const PolynomialBatch& batch, const BallsGeometry& base, const std::vector<double>& xbar_norms,
    const QuadratureOptions& opts) {
  const Family fam(base.x0, base.r0, base.R);
  const int n = fam.dimension();
  const int d = batch.max_degree();
  const Density mu = Density::mu_a(fam.inversion());
  const double a_norm = fam.a_norm();
  const double x0n = fam.x_norm();

  const BatchEstimate small = ball_squared_norms(
      batch, base.x0, base.r0,
      pole_ball_rule(n, d, pole_ratio(base.r0, x0n, a_norm), opts, 21), mu);
  const BatchEstimate whole = ball_squared_norms(
      batch, Vector::Zero(n), base.R,
      pole_ball_rule(n, d, pole_ratio(base.R, 0.0, a_norm), opts, 23), mu);

  std::vector<std::vector<InequalityReport>> out;
  for (std::size_t k = 0; k < xbar_norms.size(); ++k) {
    BallsGeometry geo = base;
    geo.xbar_norm = xbar_norms[k];
    const double dl = geo.delta0();
    const bool same = geo.xbar_norm >= x0n;
    const double rb = same ? geo.r0 : geo.rbar();
    const BatchEstimate middle =
        same ? small
             : ball_squared_norms(batch, geo.xbar(), rb,
                                  pole_ball_rule(n, d, pole_ratio(rb, geo.xbar_norm, a_norm), opts,
                                                 derive_seed(22, k)),
                                  mu);
    std::vector<InequalityReport> row;
    row.reserve(batch.size());
    for (int p = 0; p < batch.size(); ++p) {
      row.push_back(balls_report(middle.value[p], middle.std_error[p], small.value[p],
                                 small.std_error[p], whole.value[p], whole.std_error[p], dl));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<InequalityReport> three_balls_check(const PolynomialBatch& batch,
                                                const BallsGeometry& geo,
                                                std::optional<double> delta,
                                                const QuadratureOptions& opts) {
  const Family fam(geo.x0, geo.r0, geo.R);
  const double dl = resolve_delta(geo, delta);
  const int n = fam.dimension();
  const int d = batch.max_degree();
  const Density mu = Density::mu_a(fam.inversion());
  const double a_norm = fam.a_norm();
  const double x0n = fam.x_norm();

  const BatchEstimate small = ball_squared_norms(
      batch, geo.x0, geo.r0, pole_ball_rule(n, d, pole_ratio(geo.r0, x0n, a_norm), opts, 21), mu);
  const bool same = geo.xbar_norm >= x0n;
  const double rb = same ? geo.r0 : geo.rbar();
  const BatchEstimate middle =
      same ? small
           : ball_squared_norms(
                 batch, geo.xbar(), rb,
                 pole_ball_rule(n, d, pole_ratio(rb, geo.xbar_norm, a_norm), opts, 22), mu);
  const BatchEstimate whole = ball_squared_norms(
      batch, Vector::Zero(n), geo.R,
      pole_ball_rule(n, d, pole_ratio(geo.R, 0.0, a_norm), opts, 23), mu);

  std::vector<InequalityReport> out;
  out.reserve(batch.size());
  for (int p = 0; p < batch.size(); ++p) {
    out.push_back(balls_report(middle.value[p], middle.std_error[p], small.value[p],
                               small.std_error[p], whole.value[p], whole.std_error[p], dl));
  }
  return out;
}

InequalityReport three_balls_check(const HarmonicPolynomial& u, const BallsGeometry& geo,
                                   std::optional<double> delta, const QuadratureOptions& opts) {
  return three_balls_check(single(u), geo, delta, opts).front();
}

std::vector<EmbeddedBoundReports> embedded_bound_check(const PolynomialBatch& batch,
                                                       const BallsGeometry& geo, double lambda,
                                                       std::optional<double> delta,
                                                       const QuadratureOptions& opts) {
  const double x0n = geo.x0.norm();
  if (x0n < 0.5 * geo.R * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "embedded bound needs |x0| >= R/2 (|x0|=" << x0n << ", R=" << geo.R << ")";
    fail(ErrorCode::PreconditionViolated, msg.str());
  }
  if (!(lambda > 0 && lambda < 1)) {
    fail(ErrorCode::PreconditionViolated, "lambda must lie in (0, 1)");
  }
  const double dl = resolve_delta(geo, delta);
  const int n = static_cast<int>(geo.x0.size());
  const double rb = geo.rbar();
  const double lr = lambda * rb;
  // Plain |u|^2 is a polynomial of degree 2d: the rules are exact.
  const int degree = rule_degree_for(batch.max_degree());
  const BatchEstimate inner =
      ball_squared_norms(batch, geo.xbar(), lr, make_ball_rule(n, degree, opts, 31));
  const BatchEstimate small =
      ball_squared_norms(batch, geo.x0, geo.r0, make_ball_rule(n, degree, opts, 32));
  const BatchEstimate whole =
      ball_squared_norms(batch, Vector::Zero(n), geo.R, make_ball_rule(n, degree, opts, 33));

  const double damp = std::pow(1.0 - lambda * lambda, 2.5);
  const double nu = unit_ball_volume(n);
  const double v_inner = nu * std::pow(lr, n);
  const double v_small = nu * std::pow(geo.r0, n);
  const double v_whole = nu * std::pow(geo.R, n);

  std::vector<EmbeddedBoundReports> out;
  out.reserve(batch.size());
  for (int p = 0; p < batch.size(); ++p) {
    const double lhs = inner.value[p];
    const double mix = std::pow(small.value[p], dl) * std::pow(whole.value[p], 1.0 - dl);
    const double s_mix = power_product_error(mix, dl, small.value[p], small.std_error[p],
                                             1.0 - dl, whole.value[p], whole.std_error[p]);
    auto report = [&](const char* name, double constant) {
      const double budget =
          kStderrMultiplier * std::hypot(inner.std_error[p], std::abs(constant) * s_mix);
      return inequality_report(name, lhs, constant * mix, dl, kInequalityTolerance, budget);
    };
    EmbeddedBoundReports rep{
        std::nullopt, report("embedded_bound_general", 405.0 / damp * std::pow(geo.R / rb, 5)),
        {}};
    if (geo.R == 1.0) rep.unit = report("embedded_bound_unit", 405.0 / (rb * damp));

    const double a_lhs = std::sqrt(lhs / v_inner);
    const double a_small = std::sqrt(small.value[p] / v_small);
    const double a_whole = std::sqrt(whole.value[p] / v_whole);
    const double a_mix = std::pow(a_small, dl) * std::pow(a_whole, 1.0 - dl);
    const double pref = std::sqrt(405.0) / std::pow(1.0 - lambda * lambda, 1.25) *
                        std::pow(geo.R / rb, 0.5 * (n + 5));
    // Errors of sqrt(I / V) are half the relative errors of I.
    const double s_a_lhs = lhs > 0 ? 0.5 * a_lhs * inner.std_error[p] / lhs : 0.0;
    const double s_a_mix = power_product_error(a_mix, 0.5 * dl, small.value[p],
                                               small.std_error[p], 0.5 * (1.0 - dl),
                                               whole.value[p], whole.std_error[p]);
    rep.averaged =
        inequality_report("embedded_bound_averaged", a_lhs, pref * a_mix, dl,
                          kInequalityTolerance,
                          kStderrMultiplier * std::hypot(s_a_lhs, pref * s_a_mix));
    out.push_back(std::move(rep));
  }
  return out;
}

EmbeddedBoundReports embedded_bound_check(const HarmonicPolynomial& u, const BallsGeometry& geo,
                                          double lambda, std::optional<double> delta,
                                          const QuadratureOptions& opts) {
  return embedded_bound_check(single(u), geo, lambda, delta, opts).front();
}

// ---------------------------------------------------------------------------

InequalityReport embedding_identity_check(const EmbeddedField& g, int degree, const Vector& b,
                                          double l, SliceReading reading, double threshold) {
  if (!(l > 0 && l <= 1)) fail(ErrorCode::PreconditionViolated, "l must lie in (0, 1]");
  const int n = static_cast<int>(b.size());
  if (n < 1) fail(ErrorCode::PreconditionViolated, "b must have a dimension");
  const int m = n + 5;
  degree = std::max(degree, 0);

  Vector full_center = Vector::Zero(m);
  full_center.head(n) = b;
  const BallRule full = BallRule::make(SphereRule::exact(m, degree), (degree + m) / 2 + 4);
  const double lhs = ball_integral(g, full_center, l, full).value;

  const SphereRule fiber = SphereRule::exact(5, degree);
  const auto [u, w] = gauss_legendre((degree + 5) / 2 + 4);
  Vector point(m);
  const auto slice = [&](const Vector& x) {
    const double s2 = (x - b).squaredNorm();
    const double arg = reading == SliceReading::Squared ? l * l - s2 : l - s2;
    if (arg <= 0) return 0.0;
    const double top = std::sqrt(arg);
    point.head(n) = x;
    double total = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double t = 0.5 * top * (u[i] + 1.0);
      double shell = 0.0;
      for (Eigen::Index j = 0; j < fiber.size(); ++j) {
        point.tail(5) = t * fiber.nodes().col(j);
        shell += fiber.weights()[j] * g(point);
      }
      total += 0.5 * top * w[i] * std::pow(t, 4) * shell;
    }
    return total;
  };
  const BallRule base = BallRule::make(SphereRule::exact(std::max(n, 2), degree), 64);
  double rhs;
  if (n >= 2) {
    rhs = ball_integral(slice, b, l, base).value;
  } else {
    // One-dimensional base: Gauss-Legendre on [b - l, b + l].
    const auto [v, wv] = gauss_legendre(64);
    rhs = 0.0;
    Vector x(1);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      x[0] = b[0] + l * v[i];
      rhs += l * wv[i] * slice(x);
    }
  }
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  const double err = scale > 0 ? std::abs(lhs - rhs) / scale : 0.0;
  return identity_report("embedding_identity", err, threshold);
}

}  // namespace threespheres
