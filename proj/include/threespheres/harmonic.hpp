#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "threespheres/common.hpp"
#include "threespheres/geometry.hpp"

namespace threespheres {

using MultiIndex = std::vector<int>;

/// All exponent tuples of length n with total degree exactly `degree`, in lexicographic order.
std::vector<MultiIndex> monomials_of_degree(int n, int degree);

/// All exponent tuples of length n with total degree at most `max_degree`, by degree.
std::vector<MultiIndex> monomials_up_to(int n, int max_degree);

/// Exact integral of y^alpha over the unit sphere S^{n-1}.
double monomial_sphere_integral(const MultiIndex& alpha);

/// Complex polynomial in n real variables with sparse coefficients.
class Polynomial {
 public:
  explicit Polynomial(int dimension);

  static Polynomial constant(int dimension, Complex value);
  /// The coordinate function y_k (0-based k).
  static Polynomial coordinate(int dimension, int k);
  /// |y|^2.
  static Polynomial squared_norm(int dimension);

  int dimension() const { return dimension_; }
  /// Total degree; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }

  const std::map<MultiIndex, Complex>& terms() const { return terms_; }
  Complex coefficient(const MultiIndex& exponent) const;
  void add_term(const MultiIndex& exponent, Complex coefficient);

  Complex operator()(const Eigen::Ref<const Vector>& y) const;

  Polynomial derivative(int k) const;
  Polynomial laplacian() const;
  Polynomial homogeneous_part(int degree) const;
  Polynomial conjugate() const;

  /// Euclidean norm of the coefficient vector.
  double coefficient_norm() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(Complex scale);

  friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) { return lhs += rhs; }
  friend Polynomial operator-(Polynomial lhs, const Polynomial& rhs) { return lhs -= rhs; }
  friend Polynomial operator*(Polynomial lhs, Complex scale) { return lhs *= scale; }
  friend Polynomial operator*(Complex scale, Polynomial rhs) { return rhs *= scale; }
  friend Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs);

  bool operator==(const Polynomial& other) const = default;

 private:
  int dimension_;
  std::map<MultiIndex, Complex> terms_;
};

/// ||Delta p|| relative to the size of the cancelling contributions; 0 for exact harmonics.
double laplacian_defect(const Polynomial& p);

/// Exact integral of |p|^2 over the sphere of radius `radius` centered at the origin.
double sphere_l2_squared(const Polynomial& p, double radius = 1.0);

/// A polynomial whose Laplacian vanishes (checked at construction).
class HarmonicPolynomial {
 public:
  static constexpr double kDefectTolerance = 1e-13;

  /// Throws NotHarmonic if laplacian_defect(p) exceeds kDefectTolerance.
  explicit HarmonicPolynomial(Polynomial p);

  int dimension() const { return poly_.dimension(); }
  int degree() const { return poly_.degree(); }
  const Polynomial& polynomial() const { return poly_; }
  Complex operator()(const Eigen::Ref<const Vector>& y) const { return poly_(y); }

 private:
  Polynomial poly_;
};

/// Random harmonic polynomial of degree <= max_degree, deterministic in `seed`.
///
/// Every homogeneous part p_k of a random complex-Gaussian polynomial is
/// projected onto harmonics by solving Delta(p_k - |y|^2 q) = 0 for q, then
/// rescaled to RMS growth_radius^{-k} on the unit sphere. growth_radius = 1
/// gives every degree equal weight.
HarmonicPolynomial random_harmonic_polynomial(int n, int max_degree, std::uint64_t seed,
                                              double growth_radius = 2.0);

/// The n = 2 complex coordinate z = y_1 + i y_2.
Polynomial complex_coordinate();
/// sum_k c_k z^k with |c_k| = growth_radius^{-k}, random phases; deterministic in `seed`.
Polynomial random_holomorphic_polynomial(int max_degree, std::uint64_t seed,
                                        double growth_radius = 2.0);
/// True iff p (in two variables) is annihilated by d/d(z bar).
bool is_holomorphic(const Polynomial& p, double tol = 1e-13);

/// Kelvin transform f*(y) = (rho/|y-a|)^{n-2} conj(f(phi(y))).
class KelvinFunction {
 public:
  KelvinFunction(HarmonicPolynomial base, Inversion inversion);

  const HarmonicPolynomial& base() const { return base_; }
  const Inversion& inversion() const { return inversion_; }
  int dimension() const { return base_.dimension(); }

  /// Throws SingularPoint at y = a.
  Complex operator()(const Eigen::Ref<const Vector>& y) const;

 private:
  HarmonicPolynomial base_;
  Inversion inversion_;
};

using Field = std::function<Complex(const Vector&)>;

/// |sum_k (f(y + h e_k) + f(y - h e_k) - 2 f(y))| / h^2.
/// Evaluation failures on the stencil are reported as StencilOutOfDomain.
double laplacian_residual(const Field& f, const Vector& y, double h = 1e-3);

/// Residual divided by max(1, |f(y)|).
double normalized_laplacian_residual(const Field& f, const Vector& y, double h = 1e-3);

/// Kelvin overload: additionally rejects stencils passing within h of the pole a.
double laplacian_residual(const KelvinFunction& f, const Vector& y, double h = 1e-3);

std::string to_json(const Polynomial& p);
/// Throws InvalidInput on malformed documents.
Polynomial polynomial_from_json(std::string_view text);

/// A set of polynomials over a shared monomial basis, evaluated together.
///
/// values(points) returns the N x P matrix (f_p(point_i)); the dominant cost is
/// one real GEMM per component, which keeps corpus sweeps tractable.
class PolynomialBatch {
 public:
  PolynomialBatch(int dimension, int max_degree);
  explicit PolynomialBatch(const std::vector<HarmonicPolynomial>& polys);

  void add(const Polynomial& p);

  int dimension() const { return dimension_; }
  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(real_.cols()); }
  const std::vector<MultiIndex>& basis() const { return basis_; }

  /// N x T table of basis monomials at the columns of `points` (n x N).
  Eigen::MatrixXd monomial_table(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

  struct Values {
    Eigen::MatrixXd real;
    Eigen::MatrixXd imag;
    Eigen::MatrixXd squared_modulus() const {
      return real.array().square() + imag.array().square();
    }
  };
  Values values(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

 private:
  int dimension_;
  int max_degree_;
  std::vector<MultiIndex> basis_;
  std::map<MultiIndex, int> index_;
  Eigen::MatrixXd real_;  // T x P
  Eigen::MatrixXd imag_;
};

}  // namespace threespheres
