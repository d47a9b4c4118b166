#include <doctest.h>

#include <cmath>

#include "threespheres/geometry.hpp"

using namespace threespheres;

namespace {

// mpmath values, tests/oracles/geometry_oracle.py
constexpr double kANorm = 1.891248853210043943;
constexpr double kRho = 1.605248337413344385;
constexpr double kRtQuarter = 0.6763874629234341449;
constexpr double kImageAtX = 0.2718778669748901417;
constexpr double kImageQuarter = 0.7794168514284921510;
constexpr double kOmegaAtX = 0.05674270370615744158;
constexpr double kOmegaQuarter = 0.01418567592653936040;
constexpr double kAlphaQuarter = 0.1913458377347540642;
constexpr double kPhiOrigin = 0.5287511467899560567;
constexpr double kDelta0 = 0.006203772525307899336;

Family reference(int n = 2) { return Family(Vector::Unit(n, 0) * 0.5, 0.2); }

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("inversion center") {
  const Inversion inv = solve_inversion_center(0.5, 0.2);
  CHECK(inv.center_norm() == doctest::Approx(kANorm).epsilon(1e-14));
  CHECK(inv.radius == doctest::Approx(kRho).epsilon(1e-14));
  const double a = inv.center_norm();
  CHECK(std::abs((a * a + 1) / a - 2.42) < 1e-12);

  CHECK(code_of([] { solve_inversion_center(0.5, 0.5); }) == ErrorCode::TouchingBalls);
  CHECK(code_of([] { solve_inversion_center(0.0, 0.3); }) == ErrorCode::ConcentricInput);
  CHECK(code_of([] { solve_inversion_center(0.5, 0.6); }) == ErrorCode::PreconditionViolated);
}

TEST_CASE("family radius and image radius") {
  const Family fam = reference();
  CHECK(family_radius(fam, 0.0) == 1.0);
  CHECK(family_radius(fam, 0.5) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(family_radius(fam, 0.25) == doctest::Approx(kRtQuarter).epsilon(1e-14));
  CHECK(image_radius(fam, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(image_radius(fam, 0.5) == doctest::Approx(kImageAtX).epsilon(1e-13));
  CHECK(image_radius(fam, 0.25) == doctest::Approx(kImageQuarter).epsilon(1e-13));

  for (double t : {0.05, 0.25, 0.4, 0.5}) {
    const auto f = image_radius_forms(fam, t);
    CHECK(std::abs(f.from_family_radius - f.from_chord) < 1e-12);
    CHECK(std::abs(f.from_family_radius - f.direct) < 1e-12);
    CHECK(correlation_constant(fam, t) == doctest::Approx(2.42).epsilon(1e-12));
  }

  CHECK(code_of([&] { family_radius(fam, 0.6); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { family_radius(fam, -0.1); }) == ErrorCode::OutOfRange);
}

TEST_CASE("radius derivatives against central differences") {
  const Family fam = reference(3);
  const double h = 1e-6;
  for (double t : {0.1, 0.25, 0.4}) {
    const double fd = (family_radius(fam, t + h) - family_radius(fam, t - h)) / (2 * h);
    CHECK(family_radius_derivative(fam, t) == doctest::Approx(fd).epsilon(1e-8));
    const double fds = (image_radius(fam, t + h) - image_radius(fam, t - h)) / (2 * h);
    CHECK(image_radius_derivative(fam, t) == doctest::Approx(fds).epsilon(1e-8));
  }
}

TEST_CASE("exponents") {
  const Family fam = reference();
  const Exponents end = exponents(fam, 0.5);
  CHECK(end.alpha == 1.0);
  CHECK(end.omega == doctest::Approx(kOmegaAtX).epsilon(1e-14));
  const Exponents q = exponents(fam, 0.25);
  CHECK(q.alpha == doctest::Approx(kAlphaQuarter).epsilon(1e-12));
  CHECK(q.omega == doctest::Approx(kOmegaQuarter).epsilon(1e-14));
  CHECK(q.beta == q.omega);
  CHECK(q.alpha > q.omega);
  CHECK(code_of([&] { exponents(fam, 0.0); }) == ErrorCode::OutOfRange);
}

TEST_CASE("inversion map") {
  const Inversion inv = solve_inversion_center(0.5, 0.2);
  const Vector image = inversion_map(inv, Vector::Zero(2));
  CHECK(image[0] == doctest::Approx(kPhiOrigin).epsilon(1e-13));
  CHECK(image[1] == 0.0);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vector y = rng.in_ball(2);
    CHECK((inversion_map(inv, inversion_map(inv, y)) - y).norm() < 1e-12);
    const Vector on = inv.center + inv.radius * rng.unit_vector(2);
    CHECK((inversion_map(inv, on) - on).norm() < 1e-12);
    const Vector boundary = rng.unit_vector(2);
    CHECK(inversion_map(inv, boundary).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(code_of([&] { inversion_map(inv, inv.center); }) == ErrorCode::SingularPoint);
}

TEST_CASE("image spheres are concentric") {
  const Family fam = reference();
  CHECK(sphere_image_check(fam, 0.0, 500));
  CHECK(sphere_image_check(fam, 0.25, 500));
  CHECK(sphere_image_check(fam, 0.5, 500));
  const Family fam5(Vector::Constant(5, 0.2), 0.3);
  CHECK(sphere_image_deviation(fam5, 0.3, 500) < 1e-12);
}

TEST_CASE("correlation") {
  const Ballf outer{Vector::Unit(2, 0) * 0.5, 0.2};
  CHECK(correlation_check(Ballf{Vector::Zero(2), 0.3}, Ballf{Vector::Zero(2), 0.7}));
  CHECK(correlation_check(outer, Ballf{Vector::Unit(2, 0) * 0.25, kRtQuarter}));
  CHECK_FALSE(correlation_check(outer, Ballf{Vector::Unit(2, 0) * 0.25, 0.9}));
  CHECK_FALSE(correlation_check(outer, Ballf{Vector::Unit(2, 1) * 0.25, kRtQuarter}));

  CHECK(correlated_radius_general(0.5, 0.2, 0.25) == doctest::Approx(kRtQuarter).epsilon(1e-14));
  CHECK(correlated_radius_general(0.5, 0.2, 0.5) == 0.2);
  // Scale covariance.
  CHECK(correlated_radius_general(1.5, 0.6, 0.75, 3.0) ==
        doctest::Approx(3 * kRtQuarter).epsilon(1e-14));
}

TEST_CASE("delta0") {
  CHECK(delta0(0.5, 0.2, 0.25) == doctest::Approx(kDelta0).epsilon(1e-14));
  CHECK(delta0(0.5, 0.2, 0.25, 1.0, Delta0Variant::AsPrinted) ==
        doctest::Approx(kDelta0).epsilon(1e-14));
  CHECK(delta0(1.0, 0.4, 0.5, 2.0) == doctest::Approx(kDelta0).epsilon(1e-14));
  CHECK(delta0(1.0, 0.4, 0.5, 2.0, Delta0Variant::AsPrinted) != doctest::Approx(kDelta0));
  CHECK(code_of([] { delta0(20.0, 1.0, 20.0 / 3, 40.0, Delta0Variant::AsPrinted); }) ==
        ErrorCode::DegenerateLog);
  CHECK(code_of([] { delta0(0.5, 0.2, 0.6); }) == ErrorCode::PreconditionViolated);
}

TEST_CASE("extended precision") {
  using LFamily = CorrelatedFamily<long double>;
  const LFamily fam(VectorX<long double>::Unit(3, 0) * 0.5L, 0.2L);
  CHECK(static_cast<double>(fam.a_norm()) == doctest::Approx(kANorm).epsilon(1e-16));
  for (long double t : {0.1L, 0.3L, 0.5L}) {
    CHECK(std::abs(static_cast<double>(correlation_constant(fam, t) - 2.42L)) < 1e-15);
  }
}
