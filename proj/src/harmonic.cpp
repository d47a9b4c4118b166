#include "threespheres/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "threespheres/random.hpp"

namespace threespheres {

namespace {

void monomials_rec(int n, int remaining, int slot, MultiIndex& current,
                   std::vector<MultiIndex>& out) {
  if (slot == n - 1) {
    current[slot] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[slot] = e;
    monomials_rec(n, remaining - e, slot + 1, current, out);
  }
}

int total_degree(const MultiIndex& e) {
  int d = 0;
  for (int v : e) d += v;
  return d;
}

}  // namespace

std::vector<MultiIndex> monomials_of_degree(int n, int degree) {
  std::vector<MultiIndex> out;
  if (n < 1 || degree < 0) return out;
  MultiIndex current(n, 0);
  monomials_rec(n, degree, 0, current, out);
  return out;
}

std::vector<MultiIndex> monomials_up_to(int n, int max_degree) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_degree; ++k) {
    auto part = monomials_of_degree(n, k);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

double monomial_sphere_integral(const MultiIndex& alpha) {
  double log_num = 0.0;
  double beta_sum = 0.0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    const double beta = 0.5 * (a + 1);
    log_num += std::lgamma(beta);
    beta_sum += beta;
  }
  return 2.0 * std::exp(log_num - std::lgamma(beta_sum));
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(int dimension) : dimension_(dimension) {
  if (dimension < 1) fail(ErrorCode::PreconditionViolated, "polynomial dimension must be >= 1");
}

Polynomial Polynomial::constant(int dimension, Complex value) {
  Polynomial p(dimension);
  p.add_term(MultiIndex(dimension, 0), value);
  return p;
}

Polynomial Polynomial::coordinate(int dimension, int k) {
  Polynomial p(dimension);
  MultiIndex e(dimension, 0);
  e.at(k) = 1;
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::squared_norm(int dimension) {
  Polynomial p(dimension);
  for (int k = 0; k < dimension; ++k) {
    MultiIndex e(dimension, 0);
    e[k] = 2;
    p.add_term(e, 1.0);
  }
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
  return d;
}

Complex Polynomial::coefficient(const MultiIndex& exponent) const {
  auto it = terms_.find(exponent);
  return it == terms_.end() ? Complex{} : it->second;
}

void Polynomial::add_term(const MultiIndex& exponent, Complex coefficient) {
  if (static_cast<int>(exponent.size()) != dimension_) {
    fail(ErrorCode::PreconditionViolated, "exponent length does not match polynomial dimension");
  }
  for (int e : exponent) {
    if (e < 0) fail(ErrorCode::PreconditionViolated, "negative exponent");
  }
  auto [it, inserted] = terms_.try_emplace(exponent, coefficient);
  if (!inserted) it->second += coefficient;
  if (it->second == Complex{}) terms_.erase(it);
}

Complex Polynomial::operator()(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != dimension_) {
    fail(ErrorCode::PreconditionViolated, "evaluation point has the wrong dimension");
  }
  const int d = std::max(degree(), 0);
  Eigen::MatrixXd powers(dimension_, d + 1);
  powers.col(0).setOnes();
  for (int e = 1; e <= d; ++e) powers.col(e) = powers.col(e - 1).cwiseProduct(y);
  Complex sum{};
  for (const auto& [e, c] : terms_) {
    double m = 1.0;
    for (int i = 0; i < dimension_; ++i) m *= powers(i, e[i]);
    sum += c * m;
  }
  return sum;
}

Polynomial Polynomial::derivative(int k) const {
  Polynomial out(dimension_);
  for (const auto& [e, c] : terms_) {
    if (e.at(k) == 0) continue;
    MultiIndex de = e;
    de[k] -= 1;
    out.add_term(de, c * static_cast<double>(e[k]));
  }
  return out;
}

Polynomial Polynomial::laplacian() const {
  Polynomial out(dimension_);
  for (const auto& [e, c] : terms_) {
    for (int k = 0; k < dimension_; ++k) {
      if (e[k] < 2) continue;
      MultiIndex de = e;
      de[k] -= 2;
      out.add_term(de, c * static_cast<double>(e[k] * (e[k] - 1)));
    }
  }
  return out;
}

Polynomial Polynomial::homogeneous_part(int degree) const {
  Polynomial out(dimension_);
  for (const auto& [e, c] : terms_) {
    if (total_degree(e) == degree) out.add_term(e, c);
  }
  return out;
}

Polynomial Polynomial::conjugate() const {
  Polynomial out(dimension_);
  for (const auto& [e, c] : terms_) out.add_term(e, std::conj(c));
  return out;
}

double Polynomial::coefficient_norm() const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += std::norm(c);
  return std::sqrt(s);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.dimension_ != dimension_) fail(ErrorCode::PreconditionViolated, "dimension mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.dimension_ != dimension_) fail(ErrorCode::PreconditionViolated, "dimension mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(Complex scale) {
  if (scale == Complex{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= scale;
  return *this;
}

Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs) {
  if (lhs.dimension_ != rhs.dimension_) {
    fail(ErrorCode::PreconditionViolated, "dimension mismatch");
  }
  Polynomial out(lhs.dimension_);
  for (const auto& [e1, c1] : lhs.terms_) {
    for (const auto& [e2, c2] : rhs.terms_) {
      MultiIndex e(e1.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = e1[i] + e2[i];
      out.add_term(e, c1 * c2);
    }
  }
  return out;
}

double laplacian_defect(const Polynomial& p) {
  std::map<MultiIndex, double> scale;
  for (const auto& [e, c] : p.terms()) {
    for (int k = 0; k < p.dimension(); ++k) {
      if (e[k] < 2) continue;
      MultiIndex de = e;
      de[k] -= 2;
      scale[de] += std::abs(c) * e[k] * (e[k] - 1);
    }
  }
  double scale_norm = 0.0;
  for (const auto& [e, s] : scale) scale_norm += s * s;
  if (scale_norm == 0.0) return 0.0;
  return p.laplacian().coefficient_norm() / std::sqrt(scale_norm);
}

double sphere_l2_squared(const Polynomial& p, double radius) {
  const int n = p.dimension();
  double total = 0.0;
  MultiIndex sum(n);
  for (const auto& [e1, c1] : p.terms()) {
    for (const auto& [e2, c2] : p.terms()) {
      bool even = true;
      for (int i = 0; i < n; ++i) {
        sum[i] = e1[i] + e2[i];
        even = even && sum[i] % 2 == 0;
      }
      if (!even) continue;
      const double moment = monomial_sphere_integral(sum);
      total += (c1 * std::conj(c2)).real() * moment *
               std::pow(radius, total_degree(sum) + n - 1);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Harmonic polynomials

HarmonicPolynomial::HarmonicPolynomial(Polynomial p) : poly_(std::move(p)) {
  const double defect = laplacian_defect(poly_);
  if (defect > kDefectTolerance) {
    std::ostringstream msg;
    msg << "polynomial is not harmonic: relative Laplacian defect " << defect;
    fail(ErrorCode::NotHarmonic, msg.str());
  }
}

HarmonicPolynomial random_harmonic_polynomial(int n, int max_degree, std::uint64_t seed,
                                              double growth_radius) {
  if (n < 2) fail(ErrorCode::PreconditionViolated, "dimension must be at least 2");
  if (max_degree < 0) fail(ErrorCode::PreconditionViolated, "max_degree must be >= 0");
  if (!(growth_radius > 0)) fail(ErrorCode::PreconditionViolated, "growth_radius must be > 0");

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
  const Polynomial norm2 = Polynomial::squared_norm(n);
  const double area = unit_sphere_area(n);
  Polynomial f(n);

  for (int k = 0; k <= max_degree; ++k) {
    Polynomial part(n);
    for (const auto& e : monomials_of_degree(n, k)) {
      const double re = rng.normal();
      const double im = rng.normal();
      part.add_term(e, Complex(re, im));
    }
    if (k >= 2) {
      // Delta(|y|^2 q) = Delta(p_k) has a unique solution q of degree k-2.
      const auto lower = monomials_of_degree(n, k - 2);
      std::map<MultiIndex, int> row;
      for (std::size_t i = 0; i < lower.size(); ++i) row[lower[i]] = static_cast<int>(i);
      const auto m = static_cast<Eigen::Index>(lower.size());
      Eigen::MatrixXd system = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        Polynomial basis(n);
        basis.add_term(lower[j], 1.0);
        const Polynomial image = (norm2 * basis).laplacian();
        for (const auto& [e, c] : image.terms()) {
          system(row.at(e), j) = c.real();
        }
      }
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
      const Polynomial target = part.laplacian();
      for (const auto& [e, c] : target.terms()) {
        rhs(row.at(e), 0) = c.real();
        rhs(row.at(e), 1) = c.imag();
      }
      const Eigen::MatrixXd q = system.partialPivLu().solve(rhs);
      Polynomial correction(n);
      for (Eigen::Index j = 0; j < m; ++j) correction.add_term(lower[j], Complex(q(j, 0), q(j, 1)));
      part -= norm2 * correction;
    }
    const double rms = std::sqrt(sphere_l2_squared(part) / area);
    if (rms > 0) part *= Complex(std::pow(growth_radius, -k) / rms);
    f += part;
  }
  return HarmonicPolynomial(std::move(f));
}

Polynomial complex_coordinate() {
  Polynomial z = Polynomial::coordinate(2, 0);
  z += Polynomial::coordinate(2, 1) * Complex(0.0, 1.0);
  return z;
}

Polynomial random_holomorphic_polynomial(int max_degree, std::uint64_t seed,
                                        double growth_radius) {
  if (max_degree < 0) fail(ErrorCode::PreconditionViolated, "max_degree must be >= 0");
  if (!(growth_radius > 0)) fail(ErrorCode::PreconditionViolated, "growth_radius must be > 0");
  Rng rng(derive_seed(seed, 0x4c));
  const Polynomial z = complex_coordinate();
  Polynomial f = Polynomial::constant(2, 0.0);
  Polynomial power = Polynomial::constant(2, 1.0);
  for (int k = 0; k <= max_degree; ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    // |z^k| = 1 on the unit circle, so RMS scaling is by the coefficient alone.
    f += power * (Complex(re, im) * (std::pow(growth_radius, -k) / std::hypot(re, im)));
    power = power * z;
  }
  return f;
}

bool is_holomorphic(const Polynomial& p, double tol) {
  if (p.dimension() != 2) return false;
  const Polynomial dx = p.derivative(0);
  const Polynomial dy = p.derivative(1);
  const Polynomial dbar = dx + dy * Complex(0.0, 1.0);
  const double scale = std::max(1.0, dx.coefficient_norm() + dy.coefficient_norm());
  return dbar.coefficient_norm() <= tol * scale;
}

// ---------------------------------------------------------------------------
// Kelvin transform

KelvinFunction::KelvinFunction(HarmonicPolynomial base, Inversion inversion)
    : base_(std::move(base)), inversion_(std::move(inversion)) {
  if (base_.dimension() != inversion_.dimension()) {
    fail(ErrorCode::PreconditionViolated, "Kelvin transform: dimension mismatch");
  }
}

Complex KelvinFunction::operator()(const Eigen::Ref<const Vector>& y) const {
  const Vector image = inversion_map(inversion_, y);
  const double dist = (y - inversion_.center).norm();
  const int n = dimension();
  const double prefactor = n == 2 ? 1.0 : std::pow(inversion_.radius / dist, n - 2);
  return prefactor * std::conj(base_(image));
}

// ---------------------------------------------------------------------------
// Finite-difference Laplacian

double laplacian_residual(const Field& f, const Vector& y, double h) {
  if (!(h > 0)) fail(ErrorCode::PreconditionViolated, "finite-difference step must be > 0");
  try {
    const Complex center = f(y);
    Complex sum{};
    Vector p = y;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      p[k] = y[k] + h;
      sum += f(p);
      p[k] = y[k] - h;
      sum += f(p);
      p[k] = y[k];
      sum -= 2.0 * center;
    }
    return std::abs(sum) / (h * h);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularPoint || e.code() == ErrorCode::OutOfRange) {
      fail(ErrorCode::StencilOutOfDomain, std::string("stencil leaves the domain: ") + e.what());
    }
    throw;
  }
}

double normalized_laplacian_residual(const Field& f, const Vector& y, double h) {
  return laplacian_residual(f, y, h) / std::max(1.0, std::abs(f(y)));
}

double laplacian_residual(const KelvinFunction& f, const Vector& y, double h) {
  if ((y - f.inversion().center).norm() <= h * std::sqrt(static_cast<double>(y.size())) * 1.0001) {
    fail(ErrorCode::StencilOutOfDomain, "stencil reaches the pole of the Kelvin transform");
  }
  return laplacian_residual(Field([&f](const Vector& p) { return f(p); }), y, h);
}

// ---------------------------------------------------------------------------
// JSON

std::string to_json(const Polynomial& p) {
  nlohmann::json doc;
  doc["n"] = p.dimension();
  doc["terms"] = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) {
    doc["terms"].push_back({{"exp", e}, {"re", c.real()}, {"im", c.imag()}});
  }
  return doc.dump();
}

Polynomial polynomial_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::InvalidInput, std::string("polynomial JSON: ") + e.what());
  }
  try {
    const int n = doc.at("n").get<int>();
    if (n < 1) fail(ErrorCode::InvalidInput, "polynomial JSON: n must be >= 1");
    Polynomial p(n);
    for (const auto& term : doc.at("terms")) {
      const auto e = term.at("exp").get<MultiIndex>();
      if (static_cast<int>(e.size()) != n) {
        fail(ErrorCode::InvalidInput, "polynomial JSON: exponent length differs from n");
      }
      for (int v : e) {
        if (v < 0) fail(ErrorCode::InvalidInput, "polynomial JSON: negative exponent");
      }
      const double re = term.at("re").get<double>();
      const double im = term.contains("im") ? term.at("im").get<double>() : 0.0;
      p.add_term(e, Complex(re, im));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("polynomial JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Batches

PolynomialBatch::PolynomialBatch(int dimension, int max_degree)
    : dimension_(dimension), max_degree_(max_degree), basis_(monomials_up_to(dimension, max_degree)) {
  for (std::size_t i = 0; i < basis_.size(); ++i) index_[basis_[i]] = static_cast<int>(i);
  real_.resize(static_cast<Eigen::Index>(basis_.size()), 0);
  imag_.resize(static_cast<Eigen::Index>(basis_.size()), 0);
}

PolynomialBatch::PolynomialBatch(const std::vector<HarmonicPolynomial>& polys)
    : PolynomialBatch(polys.empty() ? 2 : polys.front().dimension(), [&polys] {
        int d = 0;
        for (const auto& p : polys) d = std::max(d, p.degree());
        return d;
      }()) {
  for (const auto& p : polys) add(p.polynomial());
}

void PolynomialBatch::add(const Polynomial& p) {
  if (p.dimension() != dimension_) fail(ErrorCode::PreconditionViolated, "batch dimension mismatch");
  if (p.degree() > max_degree_) fail(ErrorCode::PreconditionViolated, "batch degree exceeded");
  const Eigen::Index col = real_.cols();
  real_.conservativeResize(Eigen::NoChange, col + 1);
  imag_.conservativeResize(Eigen::NoChange, col + 1);
  real_.col(col).setZero();
  imag_.col(col).setZero();
  for (const auto& [e, c] : p.terms()) {
    const int i = index_.at(e);
    real_(i, col) = c.real();
    imag_(i, col) = c.imag();
  }
}

Eigen::MatrixXd PolynomialBatch::monomial_table(
    const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (points.rows() != dimension_) {
    fail(ErrorCode::RuleDimensionMismatch, "points have the wrong dimension for this batch");
  }
  const Eigen::Index count = points.cols();
  std::vector<Eigen::MatrixXd> powers(dimension_, Eigen::MatrixXd(count, max_degree_ + 1));
  for (int i = 0; i < dimension_; ++i) {
    powers[i].col(0).setOnes();
    for (int e = 1; e <= max_degree_; ++e) {
      powers[i].col(e) = powers[i].col(e - 1).cwiseProduct(points.row(i).transpose());
    }
  }
  Eigen::MatrixXd table(count, static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t t = 0; t < basis_.size(); ++t) {
    const auto& e = basis_[t];
    auto col = table.col(static_cast<Eigen::Index>(t));
    col = powers[0].col(e[0]);
    for (int i = 1; i < dimension_; ++i) {
      if (e[i] > 0) col.array() *= powers[i].col(e[i]).array();
    }
  }
  return table;
}

PolynomialBatch::Values PolynomialBatch::values(
    const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  const Eigen::MatrixXd table = monomial_table(points);
  return {table * real_, table * imag_};
}

}  // namespace threespheres
