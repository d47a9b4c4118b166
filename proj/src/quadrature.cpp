#include "threespheres/quadrature.hpp"

#include <algorithm>
#include <sstream>

#include "threespheres/random.hpp"

namespace threespheres {

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_jacobi_symmetric(int points, double g) {
  if (points < 1) fail(ErrorCode::PreconditionViolated, "Gauss rule needs at least one point");
  if (!(g > -1.0)) fail(ErrorCode::PreconditionViolated, "Jacobi exponent must exceed -1");
  // Golub-Welsch on the symmetric Jacobi matrix of the orthonormal polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double kk = k;
    const double num = kk * (kk + 2.0 * g);
    const double den = (2.0 * kk + 2.0 * g + 1.0) * (2.0 * kk + 2.0 * g - 1.0);
    const double b = den == 0.0 ? std::sqrt(0.5) : std::sqrt(num / den);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  const double mu0 = std::sqrt(std::numbers::pi) * std::exp(std::lgamma(g + 1.0) - std::lgamma(g + 1.5));
  Eigen::VectorXd nodes = eig.eigenvalues();
  Eigen::VectorXd weights = mu0 * eig.eigenvectors().row(0).transpose().array().square();
  // Enforce the exact reflection symmetry of the rule.
  for (int i = 0; i < points / 2; ++i) {
    const int j = points - 1 - i;
    const double x = 0.5 * (nodes[j] - nodes[i]);
    const double w = 0.5 * (weights[i] + weights[j]);
    nodes[i] = -x;
    nodes[j] = x;
    weights[i] = weights[j] = w;
  }
  if (points % 2 == 1) nodes[points / 2] = 0.0;
  return {nodes, weights};
}

SphereRule SphereRule::exact(int n, int degree) {
  if (n < 2) fail(ErrorCode::PreconditionViolated, "sphere rules need n >= 2");
  degree = std::max(degree, 0);
  if (n == 2) {
    const int count = degree + 1;
    Eigen::MatrixXd nodes(2, count);
    for (int j = 0; j < count; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / count;
      nodes(0, j) = std::cos(theta);
      nodes(1, j) = std::sin(theta);
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(count, 2.0 * std::numbers::pi / count);
    return SphereRule(std::move(nodes), std::move(weights), RuleKind::ExactDegree, degree, 0);
  }
  // y = (sqrt(1-u^2) w, u), ds = (1-u^2)^{(n-3)/2} du ds_{n-1}(w).
  const SphereRule sub = exact(n - 1, degree);
  const auto [u, wu] = gauss_jacobi_symmetric(degree / 2 + 1, 0.5 * (n - 3));
  const Eigen::Index count = u.size() * sub.size();
  Eigen::MatrixXd nodes(n, count);
  Eigen::VectorXd weights(count);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - u[i] * u[i]));
    for (Eigen::Index j = 0; j < sub.size(); ++j, ++k) {
      nodes.col(k).head(n - 1) = s * sub.nodes().col(j);
      nodes(n - 1, k) = u[i];
      weights[k] = wu[i] * sub.weights()[j];
    }
  }
  return SphereRule(std::move(nodes), std::move(weights), RuleKind::ExactDegree, degree, 0);
}

SphereRule SphereRule::monte_carlo(int n, int samples, std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::PreconditionViolated, "sphere rules need n >= 2");
  if (samples < 2) fail(ErrorCode::PreconditionViolated, "Monte Carlo rule needs >= 2 samples");
  Rng rng(seed);
  Eigen::MatrixXd nodes(n, samples);
  for (int j = 0; j < samples; ++j) nodes.col(j) = rng.unit_vector(n);
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(samples, unit_sphere_area(n) / samples);
  return SphereRule(std::move(nodes), std::move(weights), RuleKind::MonteCarlo, -1, seed);
}

SphereRule SphereRule::standard(int n, int degree, int mc_samples, std::uint64_t seed) {
  return n <= 3 ? exact(n, degree) : monte_carlo(n, mc_samples, seed);
}

BallRule BallRule::make(SphereRule angular, int radial_points) {
  const auto [u, w] = gauss_legendre(radial_points);
  const int n = angular.dimension();
  Eigen::VectorXd t = 0.5 * (u.array() + 1.0);
  Eigen::VectorXd wt = 0.5 * w.array() * t.array().pow(n - 1);
  return {std::move(t), std::move(wt), std::move(angular)};
}

double Density::at(const Eigen::Ref<const Vector>& y) const {
  switch (kind_) {
    case Kind::Lebesgue:
      return 1.0;
    case Kind::InversionSurface: {
      const double d2 = (y - inv_->center).squaredNorm();
      const double R = inv_->ambient_radius;
      return (d2 + R * R - y.squaredNorm()) / (d2 * d2);
    }
    case Kind::InversionVolume: {
      const double d2 = (y - inv_->center).squaredNorm();
      return 1.0 / (d2 * d2);
    }
  }
  return 1.0;
}

Eigen::VectorXd Density::at_points(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (kind_ == Kind::Lebesgue) return Eigen::VectorXd::Ones(points.cols());
  const Eigen::ArrayXd d2 = (points.colwise() - inv_->center).colwise().squaredNorm().transpose();
  Eigen::ArrayXd w;
  if (kind_ == Kind::InversionSurface) {
    const double R = inv_->ambient_radius;
    w = (d2 + R * R - points.colwise().squaredNorm().transpose().array()) / d2.square();
  } else {
    w = d2.square().inverse();
  }
  if (!(w > 0.0).all()) fail(ErrorCode::NonpositiveDensity, "density is not positive at a node");
  return w.matrix();
}

namespace detail {

void check_rule_dimension(const Vector& center, int rule_dimension) {
  if (center.size() != rule_dimension) {
    std::ostringstream msg;
    msg << "rule dimension " << rule_dimension << " does not match point dimension "
        << center.size();
    fail(ErrorCode::RuleDimensionMismatch, msg.str());
  }
}

}  // namespace detail

namespace {

constexpr Eigen::Index kChunk = 4096;

// Running per-column sums over angular samples h_j (rows of `h`).
struct BatchAccumulator {
  Eigen::VectorXd sum;
  Eigen::VectorXd plain_sum;
  Eigen::VectorXd square_sum;
  double weight = 0.0;
  Eigen::Index count = 0;

  explicit BatchAccumulator(int polys)
      : sum(Eigen::VectorXd::Zero(polys)), plain_sum(Eigen::VectorXd::Zero(polys)),
        square_sum(Eigen::VectorXd::Zero(polys)) {}

  void add(const Eigen::Ref<const Eigen::VectorXd>& w, const Eigen::MatrixXd& h) {
    sum.noalias() += h.transpose() * w;
    plain_sum += h.colwise().sum().transpose();
    square_sum += h.array().square().colwise().sum().matrix().transpose();
    weight = w.size() > 0 ? w[0] : weight;
    count += h.rows();
  }

  BatchEstimate finish(bool monte_carlo, double scale) const {
    BatchEstimate out{scale * sum, Eigen::VectorXd::Zero(sum.size())};
    if (monte_carlo && count >= 2) {
      const double n = static_cast<double>(count);
      const Eigen::ArrayXd mean = plain_sum.array() / n;
      const Eigen::ArrayXd var =
          ((square_sum.array() / n - mean.square()) * n / (n - 1.0)).max(0.0);
      out.std_error = (std::abs(scale) * weight * (var * n).sqrt()).matrix();
    }
    return out;
  }
};

}  // namespace

int pole_rule_degree(int max_degree, double ratio, double tolerance, int cap, double pole_order) {
  int degree = rule_degree_for(max_degree);
  if (ratio >= 1.0) return cap;
  if (ratio > 0.0) {
    // Expansion coefficients of the pole factor decay like m^p ratio^m.
    const double p = pole_order;
    const double log_q = std::log(ratio);
    int m = 1;
    while (m < cap && p * std::log(static_cast<double>(m)) + m * log_q > std::log(tolerance)) ++m;
    degree += m;
  }
  return std::min(degree, cap);
}

BatchEstimate sphere_squared_norms_mapped(const PolynomialBatch& batch, const Vector& center,
                                          double radius, const SphereRule& rule,
                                          const PointMap& map) {
  detail::check_rule_dimension(center, rule.dimension());
  if (batch.dimension() != rule.dimension()) {
    fail(ErrorCode::RuleDimensionMismatch, "batch and rule dimensions differ");
  }
  if (!(radius > 0)) fail(ErrorCode::PreconditionViolated, "sphere radius must be > 0");
  BatchAccumulator acc(batch.size());
  for (Eigen::Index start = 0; start < rule.size(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, rule.size() - start);
    Eigen::MatrixXd points = (radius * rule.nodes().middleCols(start, len)).colwise() + center;
    Eigen::VectorXd m = Eigen::VectorXd::Ones(len);
    map(points, m);
    const Eigen::MatrixXd h = m.asDiagonal() * batch.values(points).squared_modulus();
    acc.add(rule.weights().segment(start, len), h);
  }
  return acc.finish(rule.is_monte_carlo(), std::pow(radius, rule.dimension() - 1));
}

BatchEstimate sphere_squared_norms(const PolynomialBatch& batch, const Vector& center,
                                   double radius, const SphereRule& rule,
                                   const Density& density) {
  detail::check_rule_dimension(center, rule.dimension());
  if (batch.dimension() != rule.dimension()) {
    fail(ErrorCode::RuleDimensionMismatch, "batch and rule dimensions differ");
  }
  if (!(radius > 0)) fail(ErrorCode::PreconditionViolated, "sphere radius must be > 0");
  BatchAccumulator acc(batch.size());
  for (Eigen::Index start = 0; start < rule.size(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, rule.size() - start);
    const Eigen::MatrixXd points =
        (radius * rule.nodes().middleCols(start, len)).colwise() + center;
    Eigen::MatrixXd h = batch.values(points).squared_modulus();
    if (density.kind() != Density::Kind::Lebesgue) {
      h = density.at_points(points).asDiagonal() * h;
    }
    acc.add(rule.weights().segment(start, len), h);
  }
  return acc.finish(rule.is_monte_carlo(), std::pow(radius, rule.dimension() - 1));
}

BatchEstimate ball_squared_norms(const PolynomialBatch& batch, const Vector& center,
                                 double radius, const BallRule& rule, const Density& density) {
  detail::check_rule_dimension(center, rule.dimension());
  if (batch.dimension() != rule.dimension()) {
    fail(ErrorCode::RuleDimensionMismatch, "batch and rule dimensions differ");
  }
  if (!(radius > 0)) fail(ErrorCode::PreconditionViolated, "ball radius must be > 0");
  const Eigen::Index radial = rule.radial_nodes.size();
  const Eigen::Index per_chunk = std::max<Eigen::Index>(1, kChunk / radial);
  const int n = rule.dimension();
  BatchAccumulator acc(batch.size());
  for (Eigen::Index start = 0; start < rule.angular.size(); start += per_chunk) {
    const Eigen::Index dirs = std::min(per_chunk, rule.angular.size() - start);
    // Point (direction j, radial i) sits in column j * radial + i.
    Eigen::MatrixXd points(n, dirs * radial);
    Eigen::VectorXd radial_w(dirs * radial);
    for (Eigen::Index j = 0; j < dirs; ++j) {
      const auto dir = rule.angular.nodes().col(start + j);
      for (Eigen::Index i = 0; i < radial; ++i) {
        points.col(j * radial + i) = center + (radius * rule.radial_nodes[i]) * dir;
        radial_w[j * radial + i] = rule.radial_weights[i];
      }
    }
    if (density.kind() != Density::Kind::Lebesgue) {
      radial_w.array() *= density.at_points(points).array();
    }
    const Eigen::MatrixXd g = radial_w.asDiagonal() * batch.values(points).squared_modulus();
    Eigen::MatrixXd h(dirs, batch.size());
    for (Eigen::Index j = 0; j < dirs; ++j) {
      h.row(j) = g.middleRows(j * radial, radial).colwise().sum();
    }
    acc.add(rule.angular.weights().segment(start, dirs), h);
  }
  return acc.finish(rule.is_monte_carlo(), std::pow(radius, n));
}

}  // namespace threespheres
