#pragma once

// Correlated balls over B_R and the inversion that makes them concentric.
//
// A ball B_{x,r} with 0 < |x| and 0 < r < R - |x| generates the family
// B_{x_t, r_t}, x_t = t e (e = x/|x|, 0 <= t <= |x|), whose members all share
// the correlation constant (R^2 + t^2 - r_t^2) / t. The inversion in the
// sphere S_{a,rho}, with a = |a| e, |a| > R and rho^2 = |a|^2 - R^2, fixes
// B_R and maps every member of the family onto a ball centered at the origin
// of radius r_t^*.
//
// Everything here is templated on the scalar type so that the formulas can be
// evaluated in extended precision when checking identities.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "threespheres/common.hpp"
#include "threespheres/random.hpp"

namespace threespheres {

template <typename Scalar>
struct Ball {
  VectorX<Scalar> center;
  Scalar radius;
};

template <typename Scalar>
struct InversionData {
  VectorX<Scalar> center;  // a
  Scalar radius;           // rho
  Scalar ambient_radius;   // R

  Scalar center_norm() const { return center.norm(); }
  int dimension() const { return static_cast<int>(center.size()); }
};

template <typename Scalar>
struct ExponentRecord {
  Scalar alpha;
  Scalar omega;
  Scalar beta;
};

/// Two ways of writing delta_0 for a ball of radius R.
enum class Delta0Variant {
  /// Unit-ball formula applied to (x0/R, r0/R, xbar/R). Scale invariant.
  ScaleDerived,
  /// The general-R formula with log argument (R - |x0|^2) / (r0/2), as printed.
  AsPrinted,
};

namespace detail {

template <typename Scalar>
Scalar relative_slack(Scalar scale) {
  return Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale;
}

template <typename Scalar>
void check_generating_ball(Scalar x_norm, Scalar r, Scalar R) {
  using std::abs;
  if (!(R > 0) || !(r > 0) || !(x_norm >= 0) || !std::isfinite(static_cast<double>(x_norm))) {
    std::ostringstream msg;
    msg << "invalid ball parameters |x|=" << x_norm << " r=" << r << " R=" << R;
    fail(ErrorCode::PreconditionViolated, msg.str());
  }
  if (x_norm == 0) {
    fail(ErrorCode::ConcentricInput,
         "concentric input: |x| = 0, use the concentric log-convexity path");
  }
  const Scalar gap = R - x_norm - r;
  if (abs(gap) <= relative_slack(R)) {
    fail(ErrorCode::TouchingBalls, "touching balls: r = R - |x|");
  }
  if (gap < 0) {
    std::ostringstream msg;
    msg << "ball B_{x,r} is not contained in B_R: |x| + r = " << x_norm + r << " > R = " << R;
    fail(ErrorCode::PreconditionViolated, msg.str());
  }
}

}  // namespace detail

/// |a| > R solving |a|^2 |x| - (R^2 + |x|^2 - r^2) |a| + R^2 |x| = 0.
template <typename Scalar>
Scalar inversion_center_norm(Scalar x_norm, Scalar r, Scalar R = Scalar(1)) {
  using std::sqrt;
  detail::check_generating_ball(x_norm, r, R);
  const Scalar c = (R * R + x_norm * x_norm - r * r) / x_norm;
  const Scalar disc = c * c - Scalar(4) * R * R;
  if (!(disc > 0)) fail(ErrorCode::TouchingBalls, "touching balls: double root |a| = R");
  // Larger root; the smaller one is R^2 / |a| (the reflected center) and is rejected.
  return Scalar(0.5) * (c + sqrt(disc));
}

/// Inversion data for the ball B_{x,r} inside B_R; a is codirected with x.
template <typename Scalar>
InversionData<Scalar> solve_inversion_center(const VectorX<Scalar>& x, Scalar r,
                                             Scalar R = Scalar(1)) {
  using std::sqrt;
  const Scalar x_norm = x.norm();
  const Scalar a_norm = inversion_center_norm(x_norm, r, R);
  return {(a_norm / x_norm) * x, sqrt(a_norm * a_norm - R * R), R};
}

/// Scalar form: a is placed on the first coordinate axis of R^dimension.
template <typename Scalar>
InversionData<Scalar> solve_inversion_center(Scalar x_norm, Scalar r, Scalar R = Scalar(1),
                                             int dimension = 2) {
  if (dimension < 2) fail(ErrorCode::PreconditionViolated, "dimension must be at least 2");
  VectorX<Scalar> x = VectorX<Scalar>::Zero(dimension);
  x[0] = x_norm;
  if (x_norm == 0) detail::check_generating_ball(x_norm, r, R);
  return solve_inversion_center<Scalar>(x, r, R);
}

/// phi(y) = a + rho^2 (y - a) / |y - a|^2.
template <typename Scalar, typename Derived>
VectorX<Scalar> inversion_map(const InversionData<Scalar>& inv,
                              const Eigen::MatrixBase<Derived>& y) {
  const VectorX<Scalar> d = y - inv.center;
  const Scalar d2 = d.squaredNorm();
  if (!(d2 > std::numeric_limits<Scalar>::min())) {
    fail(ErrorCode::SingularPoint, "inversion is singular at its center a");
  }
  return inv.center + (inv.radius * inv.radius / d2) * d;
}

/// The one-parameter family of balls generated by B_{x,r} via correlation over B_R.
template <typename Scalar>
class CorrelatedFamily {
 public:
  CorrelatedFamily(VectorX<Scalar> x, Scalar r, Scalar R = Scalar(1))
      : x_(std::move(x)), r_(r), R_(R), inversion_(solve_inversion_center<Scalar>(x_, r, R)) {
    if (x_.size() < 2) fail(ErrorCode::PreconditionViolated, "dimension must be at least 2");
    direction_ = x_ / x_.norm();
  }

  const VectorX<Scalar>& x() const { return x_; }
  Scalar x_norm() const { return x_.norm(); }
  Scalar r() const { return r_; }
  Scalar R() const { return R_; }
  const VectorX<Scalar>& direction() const { return direction_; }
  const InversionData<Scalar>& inversion() const { return inversion_; }
  Scalar a_norm() const { return inversion_.center_norm(); }
  Scalar rho() const { return inversion_.radius; }
  int dimension() const { return static_cast<int>(x_.size()); }

  /// Throws OutOfRange unless t lies in [lo, |x|]; tiny overshoots are clamped.
  Scalar checked_parameter(Scalar t, bool open_at_zero = false) const {
    const Scalar hi = x_norm();
    const Scalar slack = detail::relative_slack(hi);
    const bool low_ok = open_at_zero ? t > 0 : t >= -slack;
    if (!low_ok || t > hi + slack || !std::isfinite(static_cast<double>(t))) {
      std::ostringstream msg;
      msg << "family parameter t=" << t << " outside " << (open_at_zero ? "(0, " : "[0, ")
          << hi << "]";
      fail(ErrorCode::OutOfRange, msg.str());
    }
    return t < 0 ? Scalar(0) : (t > hi ? hi : t);
  }

 private:
  VectorX<Scalar> x_;
  Scalar r_;
  Scalar R_;
  InversionData<Scalar> inversion_;
  VectorX<Scalar> direction_;
};

template <typename Scalar>
VectorX<Scalar> family_center(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  return fam.checked_parameter(t) * fam.direction();
}

/// r_t from r_t^2 = (R - t R/|a|)(R - |a| t / R).
template <typename Scalar>
Scalar family_radius(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  using std::sqrt;
  t = fam.checked_parameter(t);
  const Scalar a = fam.a_norm();
  const Scalar R = fam.R();
  return sqrt((R - t * R / a) * (R - a * t / R));
}

/// The three closed forms of the image radius r_t^*.
template <typename Scalar>
struct ImageRadiusForms {
  Scalar from_family_radius;  // r_t |a| / (|a| - t)
  Scalar from_chord;          // (R^2 - |a| t) / r_t
  Scalar direct;              // sqrt(|a| (R^2 - |a| t) / (|a| - t))
};

template <typename Scalar>
ImageRadiusForms<Scalar> image_radius_forms(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  using std::sqrt;
  t = fam.checked_parameter(t);
  const Scalar a = fam.a_norm();
  const Scalar R = fam.R();
  const Scalar rt = family_radius(fam, t);
  return {rt * a / (a - t), (R * R - a * t) / rt, sqrt(a * (R * R - a * t) / (a - t))};
}

template <typename Scalar>
Scalar image_radius(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  const auto forms = image_radius_forms(fam, t);
  assert(std::abs(static_cast<double>(forms.from_family_radius - forms.direct)) <=
         1e-10 * static_cast<double>(fam.R()));
  return forms.from_family_radius;
}

/// (R^2 + t^2 - r_t^2) / t; constant along the family.
template <typename Scalar>
Scalar correlation_constant(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  t = fam.checked_parameter(t, true);
  const Scalar rt = family_radius(fam, t);
  return (fam.R() * fam.R() + t * t - rt * rt) / t;
}

/// dr_t/dt from 2 r_t r_t' = 2t - (|a|^2 + R^2)/|a|.
template <typename Scalar>
Scalar family_radius_derivative(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  const Scalar a = fam.a_norm();
  const Scalar R = fam.R();
  return (Scalar(2) * t - (a * a + R * R) / a) / (Scalar(2) * family_radius(fam, t));
}

/// d r_t^* / dt from 2 r_t (r_t^*)' |a| = -rho^2 r_t^* / r_t.
template <typename Scalar>
Scalar image_radius_derivative(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  const Scalar rt = family_radius(fam, t);
  const Scalar rho = fam.rho();
  return -rho * rho * image_radius(fam, t) / (Scalar(2) * rt * rt * fam.a_norm());
}

/// alpha_t = log(r_t^*/R) / log(r_{|x|}^*/R) and the explicit lower bound omega_t.
/// beta defaults to omega.
template <typename Scalar>
ExponentRecord<Scalar> exponents(const CorrelatedFamily<Scalar>& fam, Scalar t) {
  using std::log;
  t = fam.checked_parameter(t, true);
  const Scalar R = fam.R();
  const Scalar x = fam.x_norm() / R;
  const Scalar r = fam.r() / R;
  const Scalar s = t / R;
  const Scalar log_outer = log(image_radius(fam, fam.x_norm()) / R);
  if (!(log_outer < 0)) fail(ErrorCode::DegenerateLog, "r_{|x|}^* = R: exponent undefined");
  const Scalar alpha = t == fam.x_norm() ? Scalar(1) : log(image_radius(fam, t) / R) / log_outer;
  const Scalar omega = s * s * (Scalar(1) - x - r) / log((Scalar(1) - x * x) / r);
  return {alpha, omega, omega};
}

/// Largest | |phi(y)| - r_t^* | over `samples` random points y on S_{x_t, r_t}.
template <typename Scalar>
Scalar sphere_image_deviation(const CorrelatedFamily<Scalar>& fam, Scalar t, int samples,
                              std::uint64_t seed = 0x5eed) {
  using std::abs;
  t = fam.checked_parameter(t);
  const VectorX<Scalar> c = family_center(fam, t);
  const Scalar rt = family_radius(fam, t);
  const Scalar target = image_radius(fam, t);
  Rng rng(seed);
  Scalar worst = 0;
  for (int i = 0; i < samples; ++i) {
    const VectorX<Scalar> y = c + rt * rng.unit_vector(fam.dimension()).template cast<Scalar>();
    const Scalar dev = abs(inversion_map(fam.inversion(), y).norm() - target);
    if (dev > worst) worst = dev;
  }
  return worst;
}

/// True iff every sampled image point lies on the origin-centered sphere of radius r_t^*.
template <typename Scalar>
bool sphere_image_check(const CorrelatedFamily<Scalar>& fam, Scalar t, int samples,
                        std::uint64_t seed = 0x5eed) {
  return sphere_image_deviation(fam, t, samples, seed) < Scalar(1e-10) * fam.R();
}

/// Definition of correlated balls over B_R, in product form so zero centers are handled.
template <typename Scalar>
bool correlation_check(const Ball<Scalar>& b1, const Ball<Scalar>& b2, Scalar R = Scalar(1)) {
  using std::abs;
  const Scalar tol = Scalar(1e-10);
  for (const auto* b : {&b1, &b2}) {
    if (!(b->radius > 0) || b->center.norm() + b->radius > R * (Scalar(1) + tol)) return false;
  }
  const Scalar n1 = b1.center.norm();
  const Scalar n2 = b2.center.norm();
  if (n1 * n2 > 0 && b1.center.dot(b2.center) < (Scalar(1) - tol) * n1 * n2) return false;
  const Scalar lhs = (R * R + n1 * n1 - b1.radius * b1.radius) * n2;
  const Scalar rhs = n1 * (R * R + n2 * n2 - b2.radius * b2.radius);
  return abs(lhs - rhs) <= tol * R * R * R;
}

/// Radius of the ball centered at distance xbar_norm that is correlated with B_{x0,r0} over B_R.
template <typename Scalar>
Scalar correlated_radius_general(Scalar x0_norm, Scalar r0, Scalar xbar_norm,
                                 Scalar R = Scalar(1)) {
  using std::sqrt;
  if (!(R > 0) || !(r0 > 0) || !(x0_norm >= 0) || !(r0 < R - x0_norm) || !(xbar_norm >= 0) ||
      xbar_norm > x0_norm * (Scalar(1) + detail::relative_slack(Scalar(1)))) {
    std::ostringstream msg;
    msg << "correlated radius needs 0 < r0 < R - |x0| and 0 <= |xbar| <= |x0| (|x0|=" << x0_norm
        << ", r0=" << r0 << ", |xbar|=" << xbar_norm << ", R=" << R << ")";
    fail(ErrorCode::PreconditionViolated, msg.str());
  }
  if (x0_norm == 0) return r0;
  if (xbar_norm >= x0_norm) return r0;
  const Scalar sq =
      R * R + xbar_norm * xbar_norm - xbar_norm * (R * R + x0_norm * x0_norm - r0 * r0) / x0_norm;
  if (!(sq > 0)) fail(ErrorCode::NoRealRoot, "correlation equation has no positive root");
  return sqrt(sq);
}

/// Largest admissible exponent of the three-balls inequality for B_{x0,r0} and B_{xbar,rbar}.
template <typename Scalar>
Scalar delta0(Scalar x0_norm, Scalar r0, Scalar xbar_norm, Scalar R = Scalar(1),
              Delta0Variant variant = Delta0Variant::ScaleDerived) {
  using std::log;
  if (!(xbar_norm > 0) || !(R > 0) || !(r0 > 0) || !(x0_norm >= xbar_norm) ||
      !(r0 < R - x0_norm)) {
    std::ostringstream msg;
    msg << "delta0 needs 0 < |xbar| <= |x0| and 0 < r0 < R - |x0| (|x0|=" << x0_norm
        << ", r0=" << r0 << ", |xbar|=" << xbar_norm << ", R=" << R << ")";
    fail(ErrorCode::PreconditionViolated, msg.str());
  }
  Scalar prefactor;
  Scalar numerator;
  Scalar log_argument;
  if (variant == Delta0Variant::ScaleDerived) {
    const Scalar x0 = x0_norm / R;
    const Scalar r = r0 / R;
    const Scalar xb = xbar_norm / R;
    prefactor = xb * xb / (Scalar(2) * (Scalar(1) - xb));
    numerator = Scalar(1) - x0 - r;
    log_argument = (Scalar(1) - x0 * x0) / (r / Scalar(2));
  } else {
    prefactor = xbar_norm * xbar_norm / (Scalar(2) * R * R * (R - xbar_norm));
    numerator = R - x0_norm - r0;
    log_argument = (R - x0_norm * x0_norm) / (r0 / Scalar(2));
  }
  if (!(log_argument > 1)) {
    std::ostringstream msg;
    msg << "delta0 log argument " << log_argument << " <= 1";
    fail(ErrorCode::DegenerateLog, msg.str());
  }
  return prefactor * numerator / log(log_argument);
}

using Ballf = Ball<double>;
using Inversion = InversionData<double>;
using Family = CorrelatedFamily<double>;
using Exponents = ExponentRecord<double>;

}  // namespace threespheres
