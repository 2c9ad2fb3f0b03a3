#include "cpop/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cpop/error.hpp"

namespace cpop {

MultiIndex::MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
  for (int v : e_) {
    if (v < 0) throw Error(ErrorKind::DimensionMismatch, "negative exponent");
    degree_ += v;
  }
}

MultiIndex MultiIndex::zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }

MultiIndex MultiIndex::unit(int n, int k) {
  std::vector<int> e(n, 0);
  e[k] = 1;
  return MultiIndex(std::move(e));
}

std::vector<int> MultiIndex::support() const {
  std::vector<int> s;
  for (int k = 0; k < size(); ++k)
    if (e_[k] != 0) s.push_back(k);
  return s;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw Error(ErrorKind::DimensionMismatch, "multi-index length");
  std::vector<int> e(e_);
  for (int k = 0; k < size(); ++k) e[k] += other.e_[k];
  return MultiIndex(std::move(e));
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = degree_ <=> other.degree_; c != 0) return c;
  // Larger leading exponent sorts first.
  for (size_t k = 0; k < std::min(e_.size(), other.e_.size()); ++k)
    if (e_[k] != other.e_[k]) return other.e_[k] <=> e_[k];
  return e_.size() <=> other.e_.size();
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (size_t k = 0; k < e_.size(); ++k) os << (k ? "," : "") << e_[k];
  os << ')';
  return os.str();
}

namespace {

void enumerate(int n, std::span<const int> vars, size_t pos, int remaining, std::vector<int>& cur,
               std::vector<MultiIndex>& out) {
  if (pos == vars.size()) {
    if (remaining == 0) out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[vars[pos]] = e;
    enumerate(n, vars, pos + 1, remaining - e, cur, out);
  }
  cur[vars[pos]] = 0;
}

}  // namespace

std::vector<MultiIndex> monomials_up_to(int n, int d, std::span<const int> vars) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(n, 0);
  for (int deg = 0; deg <= d; ++deg) {
    if (vars.empty()) {
      if (deg == 0) out.emplace_back(cur);
      continue;
    }
    enumerate(n, vars, 0, deg, cur, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<MultiIndex> monomials_up_to(int n, int d) {
  std::vector<int> vars(n);
  for (int k = 0; k < n; ++k) vars[k] = k;
  return monomials_up_to(n, d, vars);
}

std::strong_ordering TermKey::operator<=>(const TermKey& other) const {
  int da = alpha.degree() + beta.degree();
  int db = other.alpha.degree() + other.beta.degree();
  if (auto c = da <=> db; c != 0) return c;
  if (auto c = alpha <=> other.alpha; c != 0) return c;
  return beta <=> other.beta;
}

Polynomial Polynomial::constant(int n, Complex c) {
  Polynomial p(n);
  p.add_term(MultiIndex::zero(n), MultiIndex::zero(n), c);
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, const MultiIndex& beta, Complex c) {
  if (alpha.size() != beta.size()) throw Error(ErrorKind::DimensionMismatch, "alpha/beta length");
  Polynomial p(alpha.size());
  p.add_term(alpha, beta, c);
  return p;
}

Polynomial Polynomial::variable(int n, int k) {
  return monomial(MultiIndex::unit(n, k), MultiIndex::zero(n));
}

Polynomial Polynomial::conj_variable(int n, int k) {
  return monomial(MultiIndex::zero(n), MultiIndex::unit(n, k));
}

void Polynomial::add_term(const MultiIndex& alpha, const MultiIndex& beta, Complex c) {
  if (alpha.size() != n_ || beta.size() != n_)
    throw Error(ErrorKind::DimensionMismatch,
                "term " + alpha.str() + beta.str() + " in " + std::to_string(n_) + " variables");
  if (c == Complex(0.0)) return;
  auto [it, inserted] = terms_.try_emplace(TermKey{alpha, beta}, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex(0.0)) terms_.erase(it);
  }
}

Complex Polynomial::coefficient(const MultiIndex& alpha, const MultiIndex& beta) const {
  auto it = terms_.find(TermKey{alpha, beta});
  return it == terms_.end() ? Complex(0.0) : it->second;
}

int Polynomial::half_degree() const {
  int k = 0;
  for (const auto& [key, c] : terms_) k = std::max({k, key.alpha.degree(), key.beta.degree()});
  return k;
}

int Polynomial::degree() const {
  int k = 0;
  for (const auto& [key, c] : terms_) k = std::max(k, key.alpha.degree() + key.beta.degree());
  return k;
}

std::vector<int> Polynomial::variables() const {
  std::set<int> vars;
  for (const auto& [key, c] : terms_) {
    for (int v : key.alpha.support()) vars.insert(v);
    for (int v : key.beta.support()) vars.insert(v);
  }
  return {vars.begin(), vars.end()};
}

Polynomial Polynomial::conj() const {
  Polynomial q(n_);
  for (const auto& [key, c] : terms_) q.add_term(key.beta, key.alpha, std::conj(c));
  return q;
}

Complex Polynomial::evaluate(std::span<const Complex> z) const {
  if (static_cast<int>(z.size()) != n_)
    throw Error(ErrorKind::DimensionMismatch, "point has wrong dimension");
  Complex sum = 0.0;
  for (const auto& [key, c] : terms_) {
    Complex t = c;
    for (int k = 0; k < n_; ++k) {
      for (int e = 0; e < key.alpha[k]; ++e) t *= z[k];
      for (int e = 0; e < key.beta[k]; ++e) t *= std::conj(z[k]);
    }
    sum += t;
  }
  return sum;
}

bool Polynomial::is_hermitian(double tol) const {
  for (const auto& [key, c] : terms_) {
    if (std::abs(c - std::conj(coefficient(key.beta, key.alpha))) > tol) return false;
  }
  return true;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [key, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial Polynomial::pruned(double tol) const {
  Polynomial q(n_);
  for (const auto& [key, c] : terms_)
    if (std::abs(c) > tol) q.terms_.emplace(key, c);
  return q;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (n_ == 0 && terms_.empty()) n_ = other.n_;
  if (other.n_ != n_ && !other.terms_.empty())
    throw Error(ErrorKind::DimensionMismatch, "polynomial variable counts differ");
  for (const auto& [key, c] : other.terms_) add_term(key.alpha, key.beta, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (n_ == 0 && terms_.empty()) n_ = other.n_;
  if (other.n_ != n_ && !other.terms_.empty())
    throw Error(ErrorKind::DimensionMismatch, "polynomial variable counts differ");
  for (const auto& [key, c] : other.terms_) add_term(key.alpha, key.beta, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(Complex c) {
  if (c == Complex(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [key, v] : terms_) v *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.n_ != b.n_ && !a.terms_.empty() && !b.terms_.empty())
    throw Error(ErrorKind::DimensionMismatch, "polynomial variable counts differ");
  Polynomial out(std::max(a.n_, b.n_));
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_)
      out.add_term(ka.alpha + kb.alpha, ka.beta + kb.beta, ca * cb);
  return out;
}

HermitianPoly HermitianPoly::from_polynomial(const Polynomial& p, double tol) {
  Polynomial q(p.num_vars());
  for (const auto& [key, c] : p.terms()) {
    if (key.alpha == key.beta) {
      if (std::abs(c.imag()) > tol)
        throw Error(ErrorKind::NonHermitian,
                    "diagonal term " + key.alpha.str() + key.beta.str() + " is not real");
      q.add_term(key.alpha, key.beta, c.real());
      continue;
    }
    Complex mirror = p.coefficient(key.beta, key.alpha);
    if (std::abs(c - std::conj(mirror)) > tol)
      throw Error(ErrorKind::NonHermitian,
                  "term " + key.alpha.str() + key.beta.str() + " has no matching mirror term");
    q.add_term(key.alpha, key.beta, 0.5 * (c + std::conj(mirror)));
  }
  return HermitianPoly(std::move(q));
}

HermitianPoly HermitianPoly::constant(int n, double c) {
  return HermitianPoly(Polynomial::constant(n, c));
}

double HermitianPoly::evaluate(std::span<const Complex> z) const {
  Complex v = p_.evaluate(z);
  double scale = 1.0 + p_.max_abs_coefficient();
  if (std::abs(v.imag()) > kTolHerm * scale * 1e3)
    throw Error(ErrorKind::NonHermitian, "evaluation has an imaginary part");
  return v.real();
}

HermitianPoly HermitianPoly::operator+(const HermitianPoly& other) const {
  return HermitianPoly(p_ + other.p_);
}

HermitianPoly HermitianPoly::operator-(const HermitianPoly& other) const {
  return HermitianPoly(p_ - other.p_);
}

HermitianPoly HermitianPoly::operator*(const HermitianPoly& other) const {
  return HermitianPoly(p_ * other.p_);
}

HermitianPoly HermitianPoly::scaled(double s) const { return HermitianPoly(p_ * Complex(s)); }

HermitianPoly normalize_hermitian(std::span<const RawTerm> terms, int n, double tol) {
  if (n < 0) n = terms.empty() ? 0 : static_cast<int>(terms.front().alpha.size());
  Polynomial p(n);
  for (const auto& t : terms) {
    if (static_cast<int>(t.alpha.size()) != n || static_cast<int>(t.beta.size()) != n)
      throw Error(ErrorKind::DimensionMismatch, "ragged multi-index in term list");
    p.add_term(MultiIndex(t.alpha), MultiIndex(t.beta), t.coeff);
  }
  return HermitianPoly::from_polynomial(p, tol);
}

void RealPoly::add_term(const MultiIndex& gamma, double c) {
  if (gamma.size() != n_) throw Error(ErrorKind::DimensionMismatch, "real term length");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(gamma, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double RealPoly::coefficient(const MultiIndex& gamma) const {
  auto it = terms_.find(gamma);
  return it == terms_.end() ? 0.0 : it->second;
}

int RealPoly::degree() const {
  int d = 0;
  for (const auto& [g, c] : terms_) d = std::max(d, g.degree());
  return d;
}

double RealPoly::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_)
    throw Error(ErrorKind::DimensionMismatch, "point has wrong dimension");
  double sum = 0.0;
  for (const auto& [g, c] : terms_) {
    double t = c;
    for (int k = 0; k < n_; ++k) t *= std::pow(x[k], g[k]);
    sum += t;
  }
  return sum;
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// (x + s*i*y)^a as a list of (power of x, power of y, coefficient).
std::vector<std::tuple<int, int, Complex>> expand_power(int a, double s) {
  std::vector<std::tuple<int, int, Complex>> out;
  Complex unit(0.0, s);
  for (int j = 0; j <= a; ++j) out.emplace_back(a - j, j, binomial(a, j) * std::pow(unit, j));
  return out;
}

}  // namespace

RealPoly realify(const HermitianPoly& p) {
  const int n = p.num_vars();
  std::map<MultiIndex, Complex> acc;
  for (const auto& [key, c] : p.terms()) {
    std::map<MultiIndex, Complex> partial{{MultiIndex::zero(2 * n), c}};
    for (int k = 0; k < n; ++k) {
      for (auto [power, sign] : {std::pair{key.alpha[k], 1.0}, std::pair{key.beta[k], -1.0}}) {
        if (power == 0) continue;
        std::map<MultiIndex, Complex> next;
        for (const auto& [g, v] : partial) {
          for (const auto& [px, py, w] : expand_power(power, sign)) {
            std::vector<int> e = g.exponents();
            e[k] += px;
            e[k + n] += py;
            next[MultiIndex(std::move(e))] += v * w;
          }
        }
        partial = std::move(next);
      }
    }
    for (const auto& [g, v] : partial) acc[g] += v;
  }
  RealPoly out(2 * n);
  double scale = 1.0 + p.poly().max_abs_coefficient();
  for (const auto& [g, v] : acc) {
    if (std::abs(v.imag()) > kTolHerm * scale * 1e3)
      throw Error(ErrorKind::NonHermitian, "realified coefficient is not real");
    if (std::abs(v.real()) > 1e-15 * scale) out.add_term(g, v.real());
  }
  return out;
}

HermitianPoly hermitian_from_real(const RealPoly& p) {
  const int n = p.num_vars();
  Polynomial q(n);
  for (const auto& [gamma, c] : p.terms()) {
    int take = (gamma.degree() + 1) / 2;
    std::vector<int> a(n, 0);
    std::vector<int> b = gamma.exponents();
    for (int k = 0; k < n && take > 0; ++k) {
      int t = std::min(take, b[k]);
      a[k] += t;
      b[k] -= t;
      take -= t;
    }
    MultiIndex alpha(a), beta(b);
    if (alpha == beta) {
      q.add_term(alpha, beta, c);
    } else {
      q.add_term(alpha, beta, 0.5 * c);
      q.add_term(beta, alpha, 0.5 * c);
    }
  }
  return HermitianPoly::from_polynomial(q);
}

RealPoly fold_to_real(const Polynomial& p) {
  RealPoly out(p.num_vars());
  for (const auto& [key, c] : p.terms()) out.add_term(key.alpha + key.beta, c.real());
  return out;
}

}  // namespace cpop
