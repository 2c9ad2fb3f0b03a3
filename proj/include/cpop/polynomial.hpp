#pragma once

#include <compare>
#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cpop {

using Complex = std::complex<double>;

// Absolute tolerance for conjugate symmetry and imaginary residues.
inline constexpr double kTolHerm = 1e-9;

// Exponent vector of a monomial z^alpha.
//
// Ordered graded-lex: total degree first, then larger leading exponents first,
// so that the basis of degree <= 2 in two variables reads
// 1, z1, z2, z1^2, z1 z2, z2^2.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  static MultiIndex zero(int n);
  static MultiIndex unit(int n, int k);

  int size() const { return static_cast<int>(e_.size()); }
  int degree() const { return degree_; }
  int operator[](int k) const { return e_[k]; }
  const std::vector<int>& exponents() const { return e_; }
  bool is_zero() const { return degree_ == 0; }

  // Indices k with a nonzero exponent.
  std::vector<int> support() const;

  MultiIndex operator+(const MultiIndex& other) const;

  std::strong_ordering operator<=>(const MultiIndex& other) const;
  bool operator==(const MultiIndex& other) const { return e_ == other.e_; }

  std::string str() const;

 private:
  std::vector<int> e_;
  int degree_ = 0;
};

// All exponent vectors of length n and total degree <= d, graded-lex ordered.
std::vector<MultiIndex> monomials_up_to(int n, int d);

// Same, restricted to the variables in `vars` (other exponents are zero).
std::vector<MultiIndex> monomials_up_to(int n, int d, std::span<const int> vars);

// Key (alpha, beta) of the monomial z^alpha conj(z)^beta.
struct TermKey {
  MultiIndex alpha;
  MultiIndex beta;

  std::strong_ordering operator<=>(const TermKey& other) const;
  bool operator==(const TermKey& other) const = default;
};

// General complex polynomial in z and conj(z).
class Polynomial {
 public:
  using TermMap = std::map<TermKey, Complex>;

  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) {}

  static Polynomial constant(int n, Complex c);
  static Polynomial monomial(const MultiIndex& alpha, const MultiIndex& beta, Complex c = 1.0);
  static Polynomial variable(int n, int k);
  static Polynomial conj_variable(int n, int k);

  int num_vars() const { return n_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const MultiIndex& alpha, const MultiIndex& beta, Complex c);
  Complex coefficient(const MultiIndex& alpha, const MultiIndex& beta) const;

  int half_degree() const;
  int degree() const;
  std::vector<int> variables() const;

  // Coefficients of conj(p(z)), i.e. alpha and beta swapped, conjugated.
  Polynomial conj() const;

  Complex evaluate(std::span<const Complex> z) const;

  bool is_hermitian(double tol = kTolHerm) const;
  double max_abs_coefficient() const;
  Polynomial pruned(double tol) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(Complex c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, Complex c) { return a *= c; }
  friend Polynomial operator*(Complex c, Polynomial a) { return a *= c; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  int n_ = 0;
  TermMap terms_;
};

// Real-valued polynomial: coefficient at (alpha, beta) is the conjugate of
// the coefficient at (beta, alpha). Immutable once built.
class HermitianPoly {
 public:
  HermitianPoly() = default;
  explicit HermitianPoly(int n) : p_(n) {}

  // Symmetrizes mirror pairs by averaging. Throws NonHermitian when a pair
  // disagrees by more than tol.
  static HermitianPoly from_polynomial(const Polynomial& p, double tol = kTolHerm);
  static HermitianPoly constant(int n, double c);

  const Polynomial& poly() const { return p_; }
  const Polynomial::TermMap& terms() const { return p_.terms(); }
  int num_vars() const { return p_.num_vars(); }
  int half_degree() const { return p_.half_degree(); }
  int degree() const { return p_.degree(); }
  std::vector<int> variables() const { return p_.variables(); }
  bool is_zero() const { return p_.is_zero(); }

  double evaluate(std::span<const Complex> z) const;

  HermitianPoly operator+(const HermitianPoly& other) const;
  HermitianPoly operator-(const HermitianPoly& other) const;
  HermitianPoly operator*(const HermitianPoly& other) const;
  HermitianPoly scaled(double s) const;

 private:
  explicit HermitianPoly(Polynomial p) : p_(std::move(p)) {}
  Polynomial p_;
};

struct RawTerm {
  std::vector<int> alpha;
  std::vector<int> beta;
  Complex coeff;
};

// Builds a HermitianPoly from raw terms, summing duplicates. n < 0 infers the
// dimension from the first term. Throws DimensionMismatch or NonHermitian.
HermitianPoly normalize_hermitian(std::span<const RawTerm> terms, int n = -1,
                                  double tol = kTolHerm);

// Real polynomial in real variables x.
class RealPoly {
 public:
  RealPoly() = default;
  explicit RealPoly(int n) : n_(n) {}

  int num_vars() const { return n_; }
  const std::map<MultiIndex, double>& terms() const { return terms_; }
  void add_term(const MultiIndex& gamma, double c);
  double coefficient(const MultiIndex& gamma) const;
  int degree() const;
  double evaluate(std::span<const double> x) const;

 private:
  int n_ = 0;
  std::map<MultiIndex, double> terms_;
};

// Substitutes z_k = x_k + i x_{k+n} and returns the real polynomial in 2n
// variables.
RealPoly realify(const HermitianPoly& p);

// Embeds a real polynomial in x (n variables) as a HermitianPoly that agrees
// with it on real points: x^gamma is split evenly between (alpha, beta) and
// (beta, alpha) with alpha + beta = gamma and |alpha| = ceil(|gamma| / 2).
HermitianPoly hermitian_from_real(const RealPoly& p);

// Folds z^alpha conj(z)^beta onto x^(alpha+beta). Inverse of
// hermitian_from_real up to the choice of split.
RealPoly fold_to_real(const Polynomial& p);

}  // namespace cpop
