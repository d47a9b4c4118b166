#pragma once

// Surface and volume quadrature on spheres S_{x,r} and balls B_{x,r} in R^n,
// plain and weighted by the inversion densities
//   s_a:  (|y-a|^2 + R^2 - |y|^2) / |y-a|^4  ds
//   mu_a: |y-a|^{-4} dy.
//
// Deterministic rules are exact for polynomials up to their degree; Monte
// Carlo rules report a standard error. Every integral returns an Estimate so
// that callers apply one tolerance policy to both.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <type_traits>
#include <utility>

#include "threespheres/common.hpp"
#include "threespheres/geometry.hpp"
#include "threespheres/harmonic.hpp"

namespace threespheres {

/// Nodes and weights of the N-point Gauss rule for the weight (1-u^2)^g on [-1, 1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_jacobi_symmetric(int points, double g);

inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int points) {
  return gauss_jacobi_symmetric(points, 0.0);
}

enum class RuleKind { ExactDegree, MonteCarlo };

class SphereRule {
 public:
  /// Product rule on S^{n-1}, exact for polynomials of total degree <= degree.
  /// n = 2 is the equispaced trapezoid rule with degree + 1 nodes.
  static SphereRule exact(int n, int degree);
  /// Normalized Gaussian samples, weight |S^{n-1}| / samples each.
  static SphereRule monte_carlo(int n, int samples, std::uint64_t seed);
  /// Exact rule for n = 2, 3 and Monte Carlo for n >= 4.
  static SphereRule standard(int n, int degree, int mc_samples = 200000,
                             std::uint64_t seed = 1);

  int dimension() const { return static_cast<int>(nodes_.rows()); }
  Eigen::Index size() const { return nodes_.cols(); }
  /// n x N matrix of unit vectors.
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  RuleKind kind() const { return kind_; }
  bool is_monte_carlo() const { return kind_ == RuleKind::MonteCarlo; }
  /// Polynomial exactness degree; -1 for Monte Carlo rules.
  int degree() const { return degree_; }
  std::uint64_t seed() const { return seed_; }

 private:
  SphereRule(Eigen::MatrixXd nodes, Eigen::VectorXd weights, RuleKind kind, int degree,
             std::uint64_t seed)
      : nodes_(std::move(nodes)), weights_(std::move(weights)), kind_(kind), degree_(degree),
        seed_(seed) {}

  Eigen::MatrixXd nodes_;
  Eigen::VectorXd weights_;
  RuleKind kind_;
  int degree_;
  std::uint64_t seed_;
};

/// Radial Gauss-Legendre on [0, 1] with density t^{n-1}, times an angular rule.
struct BallRule {
  Eigen::VectorXd radial_nodes;
  Eigen::VectorXd radial_weights;
  SphereRule angular;

  static BallRule make(SphereRule angular, int radial_points = 64);

  int dimension() const { return angular.dimension(); }
  bool is_monte_carlo() const { return angular.is_monte_carlo(); }
};

/// Smallest rule degree that integrates |f|^2 exactly for corpus degree d, plus headroom.
constexpr int rule_degree_for(int max_degree) { return 2 * max_degree + 4; }

/// Value plus one-sigma standard error (0 for deterministic rules).
template <typename T>
struct Estimate {
  T value;
  double std_error = 0.0;
};

using NormValue = Estimate<double>;

/// Weight functions applied on top of the Lebesgue measure.
class Density {
 public:
  enum class Kind { Lebesgue, InversionSurface, InversionVolume };

  static Density lebesgue() { return Density(Kind::Lebesgue, std::nullopt); }
  /// (|y-a|^2 + R^2 - |y|^2) / |y-a|^4.
  static Density s_a(Inversion inv) { return Density(Kind::InversionSurface, std::move(inv)); }
  /// |y-a|^{-4}.
  static Density mu_a(Inversion inv) { return Density(Kind::InversionVolume, std::move(inv)); }

  Kind kind() const { return kind_; }

  double at(const Eigen::Ref<const Vector>& y) const;
  /// Values at the columns of `points`; throws NonpositiveDensity if any is <= 0.
  Eigen::VectorXd at_points(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

 private:
  Density(Kind kind, std::optional<Inversion> inv) : kind_(kind), inv_(std::move(inv)) {}

  Kind kind_;
  std::optional<Inversion> inv_;
};

namespace detail {

void check_rule_dimension(const Vector& center, int rule_dimension);

template <typename T>
double squared_magnitude(const T& v) {
  if constexpr (std::is_same_v<T, Complex>) {
    return std::norm(v);
  } else {
    return v * v;
  }
}

// Accumulates sum(w h) and, for Monte Carlo, the sample variance of h.
template <typename T>
struct Accumulator {
  T sum{};
  T plain_sum{};
  double square_sum = 0.0;
  double weight = 0.0;
  Eigen::Index count = 0;

  void add(double w, const T& h) {
    sum += w * h;
    plain_sum += h;
    square_sum += squared_magnitude(h);
    weight = w;
    ++count;
  }

  // Monte Carlo weights all equal |S|/count, so the error is weight * sqrt(count) * sd(h).
  Estimate<T> finish(bool monte_carlo, double scale) const {
    if (!monte_carlo || count < 2) return {scale * sum, 0.0};
    const double n = static_cast<double>(count);
    const double mean_sq = squared_magnitude(plain_sum / n);
    const double var = std::max(0.0, (square_sum / n - mean_sq) * n / (n - 1.0));
    return {scale * sum, std::abs(scale) * weight * std::sqrt(var * n)};
  }
};

}  // namespace detail

/// sum_i w_i r^{n-1} f(center + r node_i) (times density when given).
template <typename F>
auto surface_integral(F&& f, const Vector& center, double radius, const SphereRule& rule,
                      const Density& density = Density::lebesgue())
    -> Estimate<std::decay_t<decltype(f(std::declval<const Vector&>()))>> {
  using T = std::decay_t<decltype(f(std::declval<const Vector&>()))>;
  detail::check_rule_dimension(center, rule.dimension());
  if (!(radius > 0)) fail(ErrorCode::PreconditionViolated, "sphere radius must be > 0");
  detail::Accumulator<T> acc;
  Vector y(center.size());
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    y = center + radius * rule.nodes().col(i);
    T h = f(y);
    if (density.kind() != Density::Kind::Lebesgue) {
      const double w = density.at(y);
      if (!(w > 0)) fail(ErrorCode::NonpositiveDensity, "density is not positive at a node");
      h = h * w;
    }
    acc.add(rule.weights()[i], h);
  }
  return acc.finish(rule.is_monte_carlo(), std::pow(radius, rule.dimension() - 1));
}

/// Integral of f over the ball; Monte Carlo error is estimated across angular samples.
template <typename F>
auto ball_integral(F&& f, const Vector& center, double radius, const BallRule& rule,
                   const Density& density = Density::lebesgue())
    -> Estimate<std::decay_t<decltype(f(std::declval<const Vector&>()))>> {
  using T = std::decay_t<decltype(f(std::declval<const Vector&>()))>;
  detail::check_rule_dimension(center, rule.dimension());
  if (!(radius > 0)) fail(ErrorCode::PreconditionViolated, "ball radius must be > 0");
  detail::Accumulator<T> acc;
  Vector y(center.size());
  for (Eigen::Index j = 0; j < rule.angular.size(); ++j) {
    T h{};
    for (Eigen::Index i = 0; i < rule.radial_nodes.size(); ++i) {
      y = center + (radius * rule.radial_nodes[i]) * rule.angular.nodes().col(j);
      T v = f(y);
      if (density.kind() != Density::Kind::Lebesgue) {
        const double w = density.at(y);
        if (!(w > 0)) fail(ErrorCode::NonpositiveDensity, "density is not positive at a node");
        v = v * w;
      }
      h += rule.radial_weights[i] * v;
    }
    acc.add(rule.angular.weights()[j], h);
  }
  return acc.finish(rule.is_monte_carlo(), std::pow(radius, rule.dimension()));
}

/// L_2(x, r, f) = (int_{S_{x,r}} |f|^2 ds)^{1/2}.
template <typename F>
NormValue sphere_norm_L2(F&& f, const Vector& center, double radius, const SphereRule& rule) {
  const auto sq = surface_integral([&f](const Vector& y) { return std::norm(Complex(f(y))); },
                                   center, radius, rule);
  const double value = std::sqrt(std::max(0.0, sq.value));
  return {value, value > 0 ? sq.std_error / (2.0 * value) : 0.0};
}

/// A_2(x, r, f) = (int_{B_{x,r}} |f|^2 dy)^{1/2}, unnormalized.
template <typename F>
NormValue ball_norm_A2(F&& f, const Vector& center, double radius, const BallRule& rule) {
  const auto sq = ball_integral([&f](const Vector& y) { return std::norm(Complex(f(y))); },
                                center, radius, rule);
  const double value = std::sqrt(std::max(0.0, sq.value));
  return {value, value > 0 ? sq.std_error / (2.0 * value) : 0.0};
}

/// Integral of f against s_a over S_{center, radius}.
template <typename F>
auto weighted_surface_integral_sa(F&& f, const Vector& center, double radius,
                                  const Inversion& inv, const SphereRule& rule) {
  return surface_integral(std::forward<F>(f), center, radius, rule, Density::s_a(inv));
}

/// Integral of f against mu_a over B_{center, radius}; needs the ball inside B_R and |a| > R.
template <typename F>
auto weighted_ball_integral_mua(F&& f, const Vector& center, double radius, const Inversion& inv,
                                const BallRule& rule) {
  if (center.norm() + radius > inv.ambient_radius * (1.0 + 1e-12)) {
    fail(ErrorCode::PreconditionViolated, "mu_a integral: ball is not inside the ambient ball");
  }
  if (!(inv.center_norm() > inv.ambient_radius)) {
    fail(ErrorCode::PreconditionViolated, "mu_a integral: inversion center lies in the ball");
  }
  return ball_integral(std::forward<F>(f), center, radius, rule, Density::mu_a(inv));
}

/// (nu(B)^{-1} int_B |f|^2)^{1/2}.
template <typename F>
NormValue normalized_average_A2(F&& f, const Vector& center, double radius,
                                const BallRule& rule) {
  const auto sq = ball_integral([&f](const Vector& y) { return std::norm(Complex(f(y))); },
                                center, radius, rule);
  const double volume = unit_ball_volume(rule.dimension()) * std::pow(radius, rule.dimension());
  const double value = std::sqrt(std::max(0.0, sq.value) / volume);
  return {value, value > 0 ? sq.std_error / (2.0 * volume * value) : 0.0};
}

/// Per-polynomial estimates for a whole batch.
struct BatchEstimate {
  Eigen::VectorXd value;
  Eigen::VectorXd std_error;
};

/// int_{S_{center,radius}} |f_p|^2 (density) ds for every polynomial in the batch.
BatchEstimate sphere_squared_norms(const PolynomialBatch& batch, const Vector& center,
                                   double radius, const SphereRule& rule,
                                   const Density& density = Density::lebesgue());

/// Rewrites a block of quadrature points in place and scales their weights;
/// lets one rule integrate |f_p(T(y))|^2 m(y) without materializing T.
using PointMap = std::function<void(Eigen::MatrixXd& points, Eigen::VectorXd& weights)>;

/// int_{S_{center,radius}} |f_p(T y)|^2 m(y) ds with (T, m) given by `map`.
BatchEstimate sphere_squared_norms_mapped(const PolynomialBatch& batch, const Vector& center,
                                          double radius, const SphereRule& rule,
                                          const PointMap& map);

/// Degree of an exact rule for |f|^2 (deg f <= max_degree) times a factor with a
/// pole at distance radius / ratio from the center of the sphere. pole_order is the
/// power of m in the m^p ratio^m decay of the factor's expansion: small for a fixed
/// density, about 2 max_degree when f itself is composed with the inversion.
int pole_rule_degree(int max_degree, double ratio, double tolerance = 1e-15, int cap = 600,
                     double pole_order = 4.0);

/// int_{B_{center,radius}} |f_p|^2 (density) dy for every polynomial in the batch.
BatchEstimate ball_squared_norms(const PolynomialBatch& batch, const Vector& center,
                                 double radius, const BallRule& rule,
                                 const Density& density = Density::lebesgue());

}  // namespace threespheres
