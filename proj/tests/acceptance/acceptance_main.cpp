// Acceptance run: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "threespheres/sweep.hpp"
#include "threespheres/uniqueness.hpp"
#include "threespheres/verify.hpp"

using namespace threespheres;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kAlgebraicTol = 1e-12;
constexpr double kFdTol = 1e-6;
constexpr double kFdStep = 1e-6;
constexpr double kImageSphereTol = 1e-10;
constexpr double kKelvinTol = 1e-5;
constexpr double kKelvinStep = 1e-3;
constexpr double kDerivativeTol = 1e-5;
constexpr double kTransferTol = 1e-8;
constexpr double kParsevalTol = 1e-10;
constexpr int kMcSamples = 4096;

QuadratureOptions quadrature() {
  QuadratureOptions q;
  q.radial_points = 32;
  q.pole_tolerance = 1e-12;
  q.mc_samples = kMcSamples;
  return q;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Fifty configurations, ten per dimension n = 2..6.
std::vector<GeometryConfig> geometry_configs() {
  std::vector<GeometryConfig> out;
  for (int n = 2; n <= 6; ++n) {
    const auto c = sample_configs(n, 10, 100 + n);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

Family family_of(const GeometryConfig& c) { return Family(c.x, c.r); }

Outcome geometry_identities() {
  double constant = 0, forms = 0, fd = 0, start = 0, end = 0;
  for (const auto& c : geometry_configs()) {
    const Family fam = family_of(c);
    const double xn = fam.x_norm();
    const double target = (1 + xn * xn - c.r * c.r) / xn;
    for (int k = 1; k <= 100; ++k) {
      const double t = xn * k / 100;
      constant = std::max(constant, std::abs(correlation_constant(fam, t) / target - 1));
      const auto f = image_radius_forms(fam, t);
      forms = std::max(forms, std::abs(f.from_chord / f.from_family_radius - 1));
      if (k < 100) {
        const double dr = (family_radius(fam, t + kFdStep) - family_radius(fam, t - kFdStep)) /
                          (2 * kFdStep);
        const double ds = (image_radius(fam, t + kFdStep) - image_radius(fam, t - kFdStep)) /
                          (2 * kFdStep);
        fd = std::max(fd, std::abs(dr / family_radius_derivative(fam, t) - 1));
        fd = std::max(fd, std::abs(ds / image_radius_derivative(fam, t) - 1));
      }
    }
    start = std::max(start, std::abs(family_radius(fam, 0.0) - fam.R()));
    end = std::max(end, std::abs(family_radius(fam, xn) / c.r - 1));
  }
  return {constant <= kAlgebraicTol && forms <= kAlgebraicTol && fd <= kFdTol && start == 0 &&
              end <= kAlgebraicTol,
          "constant " + fmt("%.2e", constant) + ", forms " + fmt("%.2e", forms) + ", fd " +
              fmt("%.2e", fd) + ", |r_0 - R| " + fmt("%.1e", start) + ", r_|x|/r - 1 " +
              fmt("%.1e", end)};
}

Outcome exponent_bound() {
  double least = INFINITY;
  for (const auto& c : geometry_configs()) {
    const Family fam = family_of(c);
    for (int k = 1; k <= 100; ++k) {
      const auto e = exponents(fam, fam.x_norm() * k / 100);
      least = std::min(least, e.alpha - e.omega);
    }
  }
  return {least > 0, "min(alpha - omega) " + fmt("%.6e", least)};
}

Outcome inversion() {
  double involution = 0, sphere = 0;
  Rng rng(31);
  for (const auto& c : geometry_configs()) {
    const Family fam = family_of(c);
    const Inversion& inv = fam.inversion();
    for (int i = 0; i < 200; ++i) {
      const Vector y = rng.in_ball(fam.dimension());
      const Vector back = inversion_map(inv, inversion_map(inv, y));
      involution = std::max(involution, (back - y).norm() / std::max(1.0, y.norm()));
    }
    for (int k = 1; k <= 20; ++k) {
      sphere = std::max(sphere, sphere_image_deviation(fam, fam.x_norm() * k / 20, 500, k));
    }
  }
  return {involution <= kAlgebraicTol && sphere <= kImageSphereTol,
          "phi(phi(y)) - y " + fmt("%.2e", involution) + ", image sphere " + fmt("%.2e", sphere)};
}

Outcome kelvin_harmonicity() {
  double worst = 0, halved = 0;
  int bad = 0;
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + i % 2;
    const GeometryConfig c = sample_configs(n, 25, 7)[i / 2];
    const KelvinFunction k(random_harmonic_polynomial(n, 8, 1000 + i), family_of(c).inversion());
    const Field f = [&k](const Vector& y) { return k(y); };
    for (int j = 0; j < 100; ++j) {
      const Vector y = rng.in_ball(n);
      const double res = normalized_laplacian_residual(f, y, kKelvinStep);
      if (res > worst) {
        worst = res;
        halved = normalized_laplacian_residual(f, y, kKelvinStep / 2);
      }
      bad += res >= kKelvinTol;
    }
  }
  return {bad == 0, "worst " + fmt("%.2e", worst) + " (h/2: " + fmt("%.2e", halved) + "), " +
                        std::to_string(bad) + "/5000 points above " + fmt("%.0e", kKelvinTol)};
}

Outcome derivative_identities() {
  double worst = 0;
  int bad = 0, count = 0;
  Rng rng(53);
  for (int i = 0; i < 20; ++i) {
    const int n = 2 + i % 2;
    const GeometryConfig c = sample_configs(n, 10, 9)[i / 2];
    const Family fam = family_of(c);
    const HarmonicPolynomial p4 = random_harmonic_polynomial(n, 4, 2000 + i);
    const HarmonicPolynomial p8 = random_harmonic_polynomial(n, 8, 3000 + i);
    const std::vector<std::pair<Field, int>> fields{
        {[](const Vector&) { return Complex(1.0); }, 0},
        {[](const Vector& y) { return Complex(y[0]); }, 1},
        {[](const Vector& y) { return Complex(y[0] * y[0] - y[1] * y[1]); }, 2},
        {[&p4](const Vector& y) { return p4(y); }, 4},
        {[&p8](const Vector& y) { return p8(y); }, 8},
    };
    const Vector e = rng.unit_vector(n);
    const double slope = rng.uniform(-0.5, 0.5);
    for (const auto& [f, degree] : fields) {
      for (const InequalityReport& r :
           {gradient_identity_check(f, degree, c.x, c.r, e, 1e-5, kDerivativeTol),
            curve_derivative_check(f, degree, c.x, c.r, e, slope, 1e-5, kDerivativeTol),
            derivative_identity_check(f, degree, fam, 0.5 * fam.x_norm(), 1e-5, kDerivativeTol)}) {
        worst = std::max(worst, r.lhs);
        bad += !r.pass;
        ++count;
      }
    }
  }
  return {bad == 0, std::to_string(count) + " checks, worst relative error " + fmt("%.2e", worst)};
}

Outcome transfer_identity() {
  double worst = 0;
  int bad = 0, count = 0;
  for (int n : {2, 3}) {
    const PolynomialBatch batch(make_corpus(n, 10, 8, 5));
    for (const auto& c : sample_configs(n, 20, 7)) {
      const Family fam = family_of(c);
      for (double s : {0.25, 0.5, 1.0}) {
        for (const auto& r :
             transfer_identity_check(batch, fam, s * fam.x_norm(), quadrature(), kTransferTol)) {
          worst = std::max(worst, r.lhs);
          bad += !r.pass;
          ++count;
        }
      }
    }
  }
  return {bad == 0, std::to_string(count) + " checks, worst relative error " + fmt("%.2e", worst)};
}

SweepConfig corpus_sweep(std::vector<int> dims, std::vector<std::string> checks) {
  SweepConfig c;
  c.dimensions = std::move(dims);
  c.checks = std::move(checks);
  c.quadrature = quadrature();
  return c;
}

Outcome summarize(const std::vector<SweepResult>& results) {
  std::size_t rows = 0, skipped = 0;
  int failures = 0;
  double worst = 0;
  for (const auto& r : results) {
    rows += r.rows.size();
    skipped += r.skipped.size();
    failures += r.failures();
    for (const auto& row : r.rows) worst = std::max(worst, row.report.ratio);
  }
  std::string detail = std::to_string(rows) + " reports, " + std::to_string(failures) +
                       " violations, max lhs/rhs " + fmt("%.6f", worst);
  if (skipped) detail += ", " + std::to_string(skipped) + " skipped (|x0| < R/2)";
  return {failures == 0 && rows > 0, detail};
}

Outcome three_spheres() {
  return summarize({run_sweep(corpus_sweep({2, 3}, {"three_spheres"})),
                    run_sweep(corpus_sweep({4}, {"three_spheres"}))});
}

Outcome three_balls() {
  const std::vector<std::string> checks{"three_balls", "embedded_bound"};
  return summarize({run_sweep(corpus_sweep({2, 3}, checks))});
}

Outcome log_convexity() {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(i / 20.0);
  double parseval = 0, margin = INFINITY;
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + i % 2;
    const HarmonicPolynomial f = random_harmonic_polynomial(n, 8, 4000 + i);
    const SphereRule rule = SphereRule::exact(n, rule_degree_for(8));
    parseval = std::max(parseval, parseval_discrepancy(f, grid, rule));
    const auto L = [&](double r) {
      return std::sqrt(
          surface_integral([&f](const Vector& y) { return std::norm(f(y)); }, Vector::Zero(n), r, rule)
              .value);
    };
    const auto report = log_convexity_check(L, grid);
    margin = std::min(margin, report.margin);
    bad += !report.pass;
  }
  return {parseval <= kParsevalTol && bad == 0,
          "Parseval discrepancy " + fmt("%.2e", parseval) + ", min triple margin " +
              fmt("%.2e", margin)};
}

Outcome delta_relation() {
  int held = 0, printed_undefined = 0;
  double best = 0;
  const int points = 25;
  for (int i = 0; i < points; ++i) {
    const double x = 16 * std::pow(64.0, i / double(points - 1));
    const auto d = delta_lower_bound_check(x, x / 4);
    held += d.any_pass();
    printed_undefined += d.as_printed_error.has_value();
    best = std::max(best, d.scale_derived.rhs / d.scale_derived.lhs);
  }
  return {held == points, std::to_string(held) + "/" + std::to_string(points) +
                              " grid points hold; scale-derived delta_0/(rho/100) at most " +
                              fmt("%.3f", best) + "; as-printed undefined at " +
                              std::to_string(printed_undefined)};
}

template <typename F>
bool raises(ErrorCode code, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

Outcome negative_controls() {
  const Family fam(Vector::Unit(2, 0) * 0.5, 0.2);
  const HarmonicPolynomial one(Polynomial::constant(2, 1.0));
  const double above = 1.01 * exponents(fam, 0.25).alpha;
  const bool beta =
      raises(ErrorCode::BetaOutOfRange,
             [&] { three_spheres_check(one, fam, 0.25, BetaChoice::explicit_value(above)); }) &&
      !three_spheres_check(one, fam, 0.25, BetaChoice::explicit_value(above, true)).pass;
  const bool touching =
      raises(ErrorCode::TouchingBalls, [] { Family(Vector::Unit(3, 0) * 0.5, 0.5); });
  const bool concentric =
      raises(ErrorCode::ConcentricInput, [] { Family(Vector::Zero(2), 0.3); });
  const Field norm2 = [](const Vector& y) { return Complex(y.squaredNorm()); };
  const bool harmonic =
      raises(ErrorCode::NotHarmonic, [] { HarmonicPolynomial h(Polynomial::squared_norm(3)); }) &&
      normalized_laplacian_residual(norm2, Vector::Constant(3, 0.1)) > kKelvinTol;
  const int detected = beta + touching + concentric + harmonic;
  return {detected == 4, std::to_string(detected) + "/4 detected (beta > alpha " +
                             (beta ? "yes" : "no") + ", touching " + (touching ? "yes" : "no") +
                             ", concentric " + (concentric ? "yes" : "no") + ", non-harmonic " +
                             (harmonic ? "yes" : "no") + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / ("threespheres_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"dimensions": [2, 3], "corpus": {"count": 10, "max_degree": 6, "seed": 11},
      "geometry": {"configs": 4, "seed": 5, "t_values": 4, "xbar_values": 2},
      "quadrature": {"radial_points": 32, "pole_tolerance": 1e-12}})";
  }
  int status = 0;
  for (int threads : {1, 4}) {
    const std::string cmd = "THREESPHERES_THREADS=" + std::to_string(threads) + " '" + cli +
                            "' verify --config '" + (dir / "config.json").string() + "' --csv '" +
                            (dir / ("run" + std::to_string(threads) + ".csv")).string() +
                            "' > /dev/null 2>&1";
    status |= std::system(cmd.c_str());
  }
  const std::string a = slurp(dir / "run1.csv");
  const std::string b = slurp(dir / "run4.csv");
  fs::remove_all(dir);
  const bool same = status == 0 && !a.empty() && a == b;
  return {same, "two runs (1 and 4 threads): " + std::to_string(a.size()) + " bytes, " +
                    (same ? "identical" : "differ or failed")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "threespheres";
  struct Criterion {
    const char* title;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"geometry identities", 5, geometry_identities},
      {"exponent bound alpha > omega", 5, exponent_bound},
      {"inversion", 5, inversion},
      {"Kelvin harmonicity", 30, kelvin_harmonicity},
      {"derivative identities", 60, derivative_identities},
      {"transfer identity", 60, transfer_identity},
      {"three spheres, beta = omega", 300, three_spheres},
      {"three balls and embedded bounds", 300, three_balls},
      {"log-convexity", 30, log_convexity},
      {"delta_0 >= rho/100", 1, delta_relation},
      {"negative controls", 5, negative_controls},
      {"determinism", 0, [&cli] { return determinism(cli); }},
  };

  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit == 0 || secs < c.limit;
    const bool ok = out.pass && in_time;
    passed += ok;
    std::printf("[%s] %2zu %s: %s (%.2f s", ok ? "PASS" : "FAIL", i + 1, c.title,
                out.detail.c_str(), secs);
    if (c.limit > 0) std::printf(", limit %g s", c.limit);
    std::printf(")\n");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
