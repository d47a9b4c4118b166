#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "threespheres/verify.hpp"

using namespace threespheres;

namespace {

Family reference(int n = 2) { return Family(Vector::Unit(n, 0) * 0.5, 0.2); }

PolynomialBatch corpus_batch(int n, int count, int degree = 8) {
  return PolynomialBatch(make_corpus(n, count, degree, 1));
}

Field field_of(const HarmonicPolynomial& f) {
  return [f](const Vector& y) { return f(y); };
}

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

TEST_CASE("report pass rule") {
  CHECK(inequality_report("x", 1.0, 1.0, 0.5, 0.0).pass);
  CHECK(inequality_report("x", 1.0 + 5e-10, 1.0, 0.5, 1e-9).pass);
  CHECK_FALSE(inequality_report("x", 1.0 + 2e-9, 1.0, 0.5, 1e-9).pass);
  CHECK(inequality_report("x", 1.1, 1.0, 0.5, 1e-9, 0.2).pass);
  const InequalityReport id = identity_report("id", 2e-9, 1e-8);
  CHECK(id.pass);
  CHECK(id.ratio == doctest::Approx(0.2));
  const auto doc = nlohmann::json::parse(to_json(id));
  CHECK(doc.at("name") == "id");
  CHECK(doc.at("pass") == true);
}

TEST_CASE("corpus and configurations are deterministic") {
  const auto a = sample_configs(3, 20, 7);
  const auto b = sample_configs(3, 20, 7);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].r == b[i].r);
    CHECK(a[i].x.norm() >= 0.1);
    CHECK(a[i].x.norm() <= 0.7);
    CHECK(a[i].r >= 0.02);
    CHECK(a[i].x.norm() + a[i].r <= 0.95 + 1e-12);
  }
  CHECK(make_corpus(2, 3, 8, 1)[2].polynomial() == make_corpus(2, 3, 8, 1)[2].polynomial());
}

TEST_CASE("derivative identities") {
  const Family fam = reference();
  const Field one = [](const Vector&) { return Complex(1.0); };
  const Field y1 = [](const Vector& y) { return Complex(y[0]); };
  CHECK(derivative_identity_check(one, 0, fam, 0.25).pass);
  CHECK(derivative_identity_check(y1, 1, fam, 0.25).pass);
  const HarmonicPolynomial f = random_harmonic_polynomial(2, 8, 3);
  for (int i = 1; i <= 20; ++i) {
    const InequalityReport r = derivative_identity_check(field_of(f), 8, fam, 0.5 * i / 21.0);
    CHECK_MESSAGE(r.pass, "t = " << 0.5 * i / 21.0 << " err " << r.lhs);
  }

  const HarmonicPolynomial g = random_harmonic_polynomial(3, 6, 4);
  const Vector x = Vector::Constant(3, 0.2);
  Vector e = Vector::Constant(3, 1.0).normalized();
  CHECK(gradient_identity_check(field_of(g), 6, x, 0.3, e).pass);
  CHECK(curve_derivative_check(field_of(g), 6, x, 0.3, e, -0.4).pass);
  CHECK(code_of([&] { gradient_identity_check(field_of(g), 6, x, 0.3, 2 * e); }) ==
        ErrorCode::PreconditionViolated);
}

TEST_CASE("transfer identity") {
  const Family fam2 = reference(2);
  const HarmonicPolynomial one(Polynomial::constant(2, 1.0));
  const HarmonicPolynomial y1(Polynomial::coordinate(2, 0));
  for (double t : {0.1, 0.25, 0.5}) {
    CHECK(transfer_identity_check(one, fam2, t).pass);
    CHECK(transfer_identity_check(y1, fam2, t).pass);
  }
  const Family fam3 = reference(3);
  const auto reports = transfer_identity_check(corpus_batch(3, 10), fam3, 0.25);
  for (const auto& r : reports) CHECK_MESSAGE(r.pass, "err " << r.lhs);

  CHECK(code_of([&] { transfer_identity_check(one, fam2, 0.0); }) == ErrorCode::OutOfRange);
}

TEST_CASE("log-convexity") {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(i / 21.0);
  const auto power = log_convexity_check([](double r) { return std::pow(r, 3); }, grid);
  CHECK(power.pass);
  CHECK(std::abs(power.margin) < 1e-12);
  const auto concave = log_convexity_check([](double r) { return 2.0 - r; }, grid);
  CHECK_FALSE(concave.pass);
  CHECK(concave.margin < 0);

  for (int n : {2, 3}) {
    const HarmonicPolynomial f = random_harmonic_polynomial(n, 8, 5);
    const auto l2 = log_convexity_check(
        [&f](double r) { return std::sqrt(parseval_sphere_l2_squared(f, r)); }, grid);
    CHECK(l2.pass);
    CHECK(parseval_discrepancy(f, grid, SphereRule::exact(n, rule_degree_for(8))) < 1e-10);
  }

  CHECK(code_of([&] { log_convexity_check([](double r) { return r - 0.5; }, grid); }) ==
        ErrorCode::NonpositiveL);
  CHECK(code_of([] { log_convexity_check([](double r) { return r; }, {0.1, 0.2}); }) ==
        ErrorCode::PreconditionViolated);
}

TEST_CASE("three spheres over the corpus") {
  const Family fam = reference();
  const auto reports = three_spheres_check(corpus_batch(2, 100), fam, 0.25);
  int failures = 0;
  for (const auto& r : reports) {
    CHECK(r.exponent_used == doctest::Approx(0.01418567592653936).epsilon(1e-12));
    failures += !r.pass;
  }
  CHECK(failures == 0);

  // Endpoint: the middle and inner spheres coincide.
  const HarmonicPolynomial f = random_harmonic_polynomial(3, 6, 2);
  const InequalityReport end = three_spheres_check(f, reference(3), 0.5, BetaChoice::alpha());
  CHECK(end.ratio == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("beta above alpha") {
  const Family fam = reference();
  const double alpha = exponents(fam, 0.25).alpha;
  const HarmonicPolynomial one(Polynomial::constant(2, 1.0));
  CHECK(code_of([&] {
          three_spheres_check(one, fam, 0.25, BetaChoice::explicit_value(1.01 * alpha));
        }) == ErrorCode::BetaOutOfRange);
  // f = 1 is extremal for n = 2: equality at alpha, violation just above it.
  const auto at_alpha = three_spheres_check(one, fam, 0.25, BetaChoice::alpha());
  CHECK(at_alpha.pass);
  CHECK(at_alpha.ratio == doctest::Approx(1.0).epsilon(1e-9));
  const auto above =
      three_spheres_check(one, fam, 0.25, BetaChoice::explicit_value(1.01 * alpha, true));
  CHECK_FALSE(above.pass);
}

TEST_CASE("holomorphic variant") {
  const Family fam = reference();
  CHECK(holomorphic_variant_check(Polynomial::constant(2, 1.0), fam, 0.25).pass);
  Polynomial zk = Polynomial::constant(2, 1.0);
  for (int k = 1; k <= 6; ++k) {
    zk = zk * complex_coordinate();
    CHECK(holomorphic_variant_check(zk, fam, 0.25).pass);
  }
  CHECK(code_of([&] { holomorphic_variant_check(Polynomial::squared_norm(2), fam, 0.25); }) ==
        ErrorCode::PreconditionViolated);
}

TEST_CASE("three balls") {
  BallsGeometry geo{Vector::Unit(2, 0) * 0.5, 0.2, 0.25, 1.0};
  CHECK(geo.delta0() == doctest::Approx(0.006203772525307899).epsilon(1e-14));
  CHECK(geo.rbar() == doctest::Approx(0.6763874629234341).epsilon(1e-14));
  const HarmonicPolynomial one(Polynomial::constant(2, 1.0));
  CHECK(three_balls_check(one, geo).pass);
  CHECK(three_balls_check(one, geo, 1e-6).pass);
  const auto reports = three_balls_check(corpus_batch(2, 100), geo);
  int failures = 0;
  for (const auto& r : reports) failures += !r.pass;
  CHECK(failures == 0);
  CHECK(code_of([&] { three_balls_check(one, geo, 2 * geo.delta0()); }) ==
        ErrorCode::DeltaOutOfRange);
  CHECK(code_of([&] { three_balls_check(one, geo, 0.0); }) == ErrorCode::DeltaOutOfRange);
}

TEST_CASE("embedded bounds") {
  const BallsGeometry geo{Vector::Unit(2, 0) * 0.5, 0.2, 0.25, 1.0};
  const auto reports = embedded_bound_check(corpus_batch(2, 20), geo, 0.6);
  for (const auto& r : reports) {
    REQUIRE(r.unit.has_value());
    CHECK(r.unit->pass);
    CHECK(r.general.pass);
    CHECK(r.averaged.pass);
  }
  const HarmonicPolynomial u = random_harmonic_polynomial(3, 5, 6);
  const BallsGeometry scaled{Vector::Unit(3, 0) * 1.0, 0.4, 0.5, 2.0};
  const auto at_two = embedded_bound_check(u, scaled, 0.3);
  CHECK_FALSE(at_two.unit.has_value());
  CHECK(at_two.general.pass);
  CHECK(at_two.averaged.pass);
  CHECK(embedded_bound_check(u, {Vector::Unit(3, 0) * 0.5, 0.2, 0.25, 1.0}, 1e-3).general.pass);

  const BallsGeometry inner{Vector::Unit(3, 0) * 0.3, 0.2, 0.2, 1.0};
  CHECK(code_of([&] { embedded_bound_check(u, inner, 0.5); }) ==
        ErrorCode::PreconditionViolated);
}

TEST_CASE("embedding identity reading") {
  Vector b(2);
  b << 0.1, -0.2;
  const EmbeddedField one = [](const Vector&) { return 1.0; };
  const auto sq = embedding_identity_check(one, 0, b, 0.8, SliceReading::Squared);
  CHECK(sq.pass);
  const auto printed = embedding_identity_check(one, 0, b, 0.8, SliceReading::AsPrinted);
  CHECK_FALSE(printed.pass);
  // |t|^2 in the five extra coordinates.
  const EmbeddedField extra = [](const Vector& y) { return y.tail(5).squaredNorm(); };
  CHECK(embedding_identity_check(extra, 2, b, 0.8, SliceReading::Squared).pass);
  // The odd part integrates to zero on both sides.
  const EmbeddedField odd = [](const Vector& y) { return 1.0 + y[6]; };
  CHECK(embedding_identity_check(odd, 1, b, 0.8, SliceReading::Squared).pass);
}
