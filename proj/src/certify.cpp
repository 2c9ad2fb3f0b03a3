#include "cpop/certify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cpop/error.hpp"

namespace cpop {

using Eigen::MatrixXcd;
using nlohmann::json;

namespace {

SymmetryReport report_of(SymmetryKind k) {
  SymmetryReport r;
  r.kind = k;
  return r;
}

MultiIndex index_from(const json& j) { return MultiIndex(j.get<std::vector<int>>()); }

double min_eig(const MatrixXcd& m) {
  MatrixXcd h = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

}  // namespace

bool MomentTable::has(const MultiIndex& alpha, const MultiIndex& beta) const {
  if (report_of(mask).is_zero(alpha, beta)) return true;
  return values.count({alpha, beta}) != 0;
}

Complex MomentTable::at(const MultiIndex& alpha, const MultiIndex& beta) const {
  if (report_of(mask).is_zero(alpha, beta)) return 0.0;
  auto it = values.find({alpha, beta});
  if (it != values.end()) return it->second;
  if (field == Field::real) {
    // Hankel: y_{alpha,beta} depends on alpha + beta only.
    MultiIndex g = alpha + beta;
    for (const auto& [key, v] : values)
      if (key.alpha + key.beta == g) return v;
  }
  throw Error(ErrorKind::UnindexedMoment, "y[" + alpha.str() + ";" + beta.str() + "]");
}

Complex MomentTable::riesz(const Polynomial& p) const {
  Complex v = 0.0;
  for (const auto& [key, c] : p.terms()) v += c * at(key.alpha, key.beta);
  return v;
}

std::vector<MultiIndex> MomentTable::basis(int clique, int t) const {
  return monomials_up_to(n, t, cliques.at(clique));
}

MatrixXcd MomentTable::moment_matrix(int clique, int t) const {
  auto b = basis(clique, t);
  const int s = static_cast<int>(b.size());
  MatrixXcd m(s, s);
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) m(r, c) = at(b[r], b[c]);
  return m;
}

MatrixXcd MomentTable::grid(const std::vector<Polynomial>& polys, int size) const {
  MatrixXcd m(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) m(r, c) = riesz(polys[r * size + c]);
  return m;
}

int MomentTable::full_clique() const {
  for (size_t k = 0; k < cliques.size(); ++k)
    if (static_cast<int>(cliques[k].size()) == n) return static_cast<int>(k);
  return -1;
}

json MomentTable::to_json() const {
  json j;
  j["n"] = n;
  j["field"] = field == Field::real ? "real" : "complex";
  j["d_K"] = d_K;
  j["mask"] = to_string(mask);
  j["cliques"] = cliques;
  j["orders"] = orders;
  json mom = json::array();
  for (const auto& [key, v] : values) {
    if (key.beta < key.alpha) continue;
    mom.push_back({{"alpha", key.alpha.exponents()},
                   {"beta", key.beta.exponents()},
                   {"re", v.real()},
                   {"im", v.imag()}});
  }
  j["moments"] = mom;
  return j;
}

MomentTable MomentTable::from_json(const json& j) {
  try {
    MomentTable t;
    t.n = j.at("n").get<int>();
    t.field = j.value("field", "complex") == "real" ? Field::real : Field::complex;
    t.d_K = j.at("d_K").get<int>();
    std::string mask = j.value("mask", "none");
    t.mask = mask == "balanced" ? SymmetryKind::balanced
             : mask == "even"   ? SymmetryKind::even
                                : SymmetryKind::none;
    t.cliques = j.at("cliques").get<std::vector<std::vector<int>>>();
    t.orders = j.at("orders").get<std::vector<int>>();
    if (t.cliques.size() != t.orders.size())
      throw Error(ErrorKind::ParseError, "one order per clique expected");
    for (const auto& m : j.at("moments")) {
      MultiIndex a = index_from(m.at("alpha")), b = index_from(m.at("beta"));
      if (a.size() != t.n || b.size() != t.n)
        throw Error(ErrorKind::ParseError, "moment index has wrong length");
      Complex v(m.at("re").get<double>(), m.value("im", 0.0));
      t.values[{a, b}] = v;
      t.values[{b, a}] = std::conj(v);
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

MomentTable table_from_relaxation(const Relaxation& relax, const Eigen::VectorXd& x) {
  MomentTable t;
  t.n = relax.pop.n;
  t.field = relax.pop.field;
  t.d_K = relax.d_K;
  t.mask = relax.mask.kind;
  t.cliques = relax.plan.cliques;
  t.orders = relax.plan.clique_orders;
  for (const auto& basis : relax.bases)
    for (const auto& a : basis)
      for (const auto& b : basis) {
        if (relax.mask.is_zero(a, b)) continue;
        Complex v = relax.index.moment(a, b).evaluate(x);
        t.values[{a, b}] = v;
      }
  return t;
}

Eigen::VectorXd moment_vector(const Relaxation& relax, const MomentTable& table) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(relax.sdp.num_vars);
  for (const auto& basis : relax.bases)
    for (const auto& a : basis)
      for (const auto& b : basis) {
        if (relax.mask.is_zero(a, b)) continue;
        const Complex v = table.at(a, b);
        // Each term is a real variable times 1 or +-i.
        for (auto [j, c] : relax.index.moment(a, b).terms) x[j] = (std::conj(c) * v).real();
      }
  return x;
}

MomentTable table_from_atoms(int n, const std::vector<std::vector<Complex>>& atoms,
                             const std::vector<double>& weights,
                             const std::vector<std::vector<int>>& cliques,
                             const std::vector<int>& orders, int d_K, Field field) {
  if (atoms.size() != weights.size())
    throw Error(ErrorKind::DimensionMismatch, "one weight per atom expected");
  MomentTable t;
  t.n = n;
  t.field = field;
  t.d_K = d_K;
  t.cliques = cliques;
  t.orders = orders;
  for (size_t k = 0; k < cliques.size(); ++k) {
    auto basis = monomials_up_to(n, orders[k], cliques[k]);
    for (const auto& a : basis)
      for (const auto& b : basis) {
        Complex v = 0.0;
        for (size_t j = 0; j < atoms.size(); ++j) {
          if (static_cast<int>(atoms[j].size()) != n)
            throw Error(ErrorKind::DimensionMismatch, "atom dimension");
          v += weights[j] * Polynomial::monomial(a, b).evaluate(atoms[j]);
        }
        t.values[{a, b}] = v;
      }
  }
  return t;
}

int numeric_rank(const MatrixXcd& m, double tau) {
  if (m.size() == 0) return 0;
  MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs();
  double smax = ev.maxCoeff();
  if (smax == 0.0) return 0;
  return static_cast<int>((ev.array() > tau * smax).count());
}

Shortcut detect_shortcut(const Pop& pop) {
  if (pop.field == Field::real) return Shortcut::hankel;
  auto every = [&](auto&& matches) {
    for (int k = 0; k < pop.n; ++k) {
      bool found = false;
      for (const auto& c : pop.constraints)
        if (c.sense == Sense::eq && matches(c.poly.poly(), k)) found = true;
      if (!found) return false;
    }
    return pop.n > 0;
  };
  const MultiIndex zero = MultiIndex::zero(pop.n);
  bool toeplitz = every([&](const Polynomial& p, int k) {
    if (p.terms().size() != 2) return false;
    Complex a = p.coefficient(MultiIndex::unit(pop.n, k), MultiIndex::unit(pop.n, k));
    Complex b = p.coefficient(zero, zero);
    return a != Complex(0.0) && std::abs(a + b) <= kTolHerm * std::abs(a);
  });
  if (toeplitz) return Shortcut::toeplitz;
  bool hankel = every([&](const Polynomial& p, int k) {
    if (p.terms().size() != 2) return false;
    Complex a = p.coefficient(MultiIndex::unit(pop.n, k), zero);
    Complex b = p.coefficient(zero, MultiIndex::unit(pop.n, k));
    return a != Complex(0.0) && std::abs(a.real()) <= kTolHerm * std::abs(a) &&
           std::abs(a + b) <= kTolHerm * std::abs(a);
  });
  return hankel ? Shortcut::hankel : Shortcut::none;
}

double hyponormality_min_eig(const MomentTable& table, int t, int clique) {
  const int order = t - table.d_K;
  if (order < 0)
    throw Error(ErrorKind::InsufficientOrder,
                "t = " + std::to_string(t) + " < d_K = " + std::to_string(table.d_K));
  const auto& vars = table.cliques.at(clique);
  auto basis = table.basis(clique, order);
  const int nb = static_cast<int>(basis.size());
  double lo = std::numeric_limits<double>::infinity();
  if (vars.size() == 1) {
    lo = min_eig(table.grid(hyponormal_polys(table.n, basis, vars[0], -1), 2 * nb));
  } else {
    for (size_t a = 0; a < vars.size(); ++a)
      for (size_t b = a + 1; b < vars.size(); ++b)
        lo = std::min(lo, min_eig(table.grid(hyponormal_polys(table.n, basis, vars[a], vars[b]),
                                             3 * nb)));
  }
  return lo;
}

std::vector<OrderVerdict> check_certificate_conditions(const MomentTable& table, const Pop& pop,
                                                       const CertifyOptions& opts) {
  const Shortcut sc = detect_shortcut(pop);
  std::vector<OrderVerdict> out;
  for (size_t k = 0; k < table.cliques.size(); ++k) {
    const int d = table.orders[k];
    std::vector<int> ranks(d + 1);
    double scale = 1.0;
    for (int t = 0; t <= d; ++t) {
      MatrixXcd m = table.moment_matrix(static_cast<int>(k), t);
      ranks[t] = numeric_rank(m, opts.rank_tol);
      scale = std::max(scale, m.cwiseAbs().maxCoeff());
    }
    for (int t = 1; t <= d + table.d_K - 1; ++t) {
      OrderVerdict v;
      v.clique = static_cast<int>(k);
      v.t = t;
      v.waived = sc != Shortcut::none;
      if (t <= d) {
        v.rank_t = ranks[t];
        v.rank_one = ranks[t] == 1;
      }
      if (t >= table.d_K) {
        v.rank_low = ranks[t - table.d_K];
        v.flat = t <= d && v.rank_t == v.rank_low;
        if (t - table.d_K + 1 <= d) {
          v.hypo_checked = true;
          v.hypo_min_eig = hyponormality_min_eig(table, t, static_cast<int>(k));
          v.hypo_ok = v.hypo_min_eig >= -opts.tol_psd * scale;
        }
      }
      v.certified = (v.rank_one && t == d) || (v.flat && (v.waived || v.hypo_ok));
      out.push_back(v);
    }
  }
  return out;
}

std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::rank_one: return "rank_one";
    case CertificateKind::flat_hyponormal: return "flat_hyponormal";
    case CertificateKind::toeplitz: return "toeplitz";
    case CertificateKind::hankel: return "hankel";
    case CertificateKind::torus_orbit: return "torus_orbit";
    case CertificateKind::none: return "none";
  }
  return "?";
}

Certificate extract_atoms(const MomentTable& table, const Pop& pop, int clique, int t,
                          const CertifyOptions& opts) {
  (void)pop;
  const auto& vars = table.cliques.at(clique);
  auto basis = table.basis(clique, t);
  const int s = static_cast<int>(basis.size());
  MatrixXcd m = table.moment_matrix(clique, t);
  m = 0.5 * (m + m.adjoint());
  const int rank = numeric_rank(m, opts.rank_tol);
  Certificate cert;
  cert.rank = rank;
  cert.t = t;
  if (rank == 0) throw Error(ErrorKind::CommutationFailure, "zero moment matrix");

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
  // M = X^* X with X = Lambda^(1/2) V^*, columns x_alpha.
  MatrixXcd x(rank, s);
  for (int r = 0; r < rank; ++r) {
    const int col = s - 1 - r;
    double lam = std::max(0.0, es.eigenvalues()[col]);
    x.row(r) = std::sqrt(lam) * es.eigenvectors().col(col).adjoint();
  }

  std::vector<int> low;
  for (int r = 0; r < s; ++r)
    if (basis[r].degree() <= t - 1) low.push_back(r);
  MatrixXcd x_low(rank, low.size());
  for (size_t a = 0; a < low.size(); ++a) x_low.col(a) = x.col(low[a]);
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(x_low.adjoint());
  cod.setThreshold(opts.rank_tol);
  if (cod.rank() < rank)
    throw Error(ErrorKind::CommutationFailure,
                "rank M_" + std::to_string(t - 1) + " < rank M_" + std::to_string(t));

  std::vector<MatrixXcd> shifts;
  double tnorm = 0.0;
  for (int v : vars) {
    MatrixXcd x_shift(rank, low.size());
    for (size_t a = 0; a < low.size(); ++a) {
      MultiIndex target = basis[low[a]] + MultiIndex::unit(table.n, v);
      auto it = std::find(basis.begin(), basis.end(), target);
      x_shift.col(a) = x.col(it - basis.begin());
    }
    // T x_low = x_shift  <=>  x_low^* T^* = x_shift^*.
    MatrixXcd tk = cod.solve(MatrixXcd(x_shift.adjoint())).adjoint();
    tnorm = std::max(tnorm, tk.norm());
    shifts.push_back(std::move(tk));
  }
  double comm = 0.0;
  for (size_t a = 0; a < shifts.size(); ++a)
    for (size_t b = a + 1; b < shifts.size(); ++b)
      comm = std::max(comm, (shifts[a] * shifts[b] - shifts[b] * shifts[a]).norm());
  if (comm > opts.tol_commute * std::max(1.0, tnorm) * std::max(1.0, tnorm))
    throw Error(ErrorKind::CommutationFailure,
                "commutator residual " + std::to_string(comm));
  cert.diagnostics.push_back("commutator residual " + std::to_string(comm));

  std::mt19937 gen(opts.seed);
  std::uniform_real_distribution<double> coef(0.1, 1.0);
  MatrixXcd p;
  for (int attempt = 0; attempt < 3; ++attempt) {
    MatrixXcd comb = MatrixXcd::Zero(rank, rank);
    for (const auto& tk : shifts) comb += coef(gen) * tk;
    Eigen::ComplexEigenSolver<MatrixXcd> ces(comb);
    const auto& ev = ces.eigenvalues();
    double gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < rank; ++a)
      for (int b = a + 1; b < rank; ++b) gap = std::min(gap, std::abs(ev[a] - ev[b]));
    p = ces.eigenvectors();
    if (gap > 1e-6 * std::max(1.0, comb.norm())) break;
    cert.diagnostics.push_back("clustered eigenvalues, retrying");
  }
  for (int j = 0; j < rank; ++j) p.col(j).normalize();
  MatrixXcd pinv = p.inverse();
  const Eigen::VectorXcd x0 = x.col(0);
  for (int j = 0; j < rank; ++j) {
    std::vector<Complex> z(table.n, 0.0);
    for (size_t k = 0; k < vars.size(); ++k) {
      Complex d = (pinv.row(j) * shifts[k] * p.col(j))(0, 0);
      z[vars[k]] = std::conj(d);
    }
    if (table.field == Field::real)
      for (auto& c : z) c = c.real();
    cert.atoms.push_back(std::move(z));
    cert.weights.push_back(std::norm(p.col(j).dot(x0)));
  }
  cert.kind = CertificateKind::flat_hyponormal;
  return cert;
}

namespace {

bool verify_atoms(Certificate& cert, const Pop& pop, double bound, const CertifyOptions& opts) {
  double wsum = 0.0, obj = 0.0, viol = 0.0;
  for (size_t j = 0; j < cert.atoms.size(); ++j) {
    wsum += cert.weights[j];
    obj += cert.weights[j] * evaluate_objective(pop, cert.atoms[j]);
    for (const auto& c : pop.constraints)
      viol = std::max(viol, constraint_violation(c, cert.atoms[j]) * c.scale);
  }
  cert.bound = bound;
  cert.objective_at_atoms = wsum > 0 ? obj / wsum : 0.0;
  cert.max_violation = viol;
  bool ok = true;
  if (viol > opts.feas_tol) {
    cert.diagnostics.push_back("atom infeasible: violation " + std::to_string(viol));
    ok = false;
  }
  if (std::abs(cert.objective_at_atoms - bound) > opts.objective_rel_tol * std::max(1.0, std::abs(bound))) {
    cert.diagnostics.push_back("objective at atoms " + std::to_string(cert.objective_at_atoms) +
                               " does not match bound " + std::to_string(bound));
    ok = false;
  }
  return ok;
}

// z with z[0] (or the first significant coordinate) real and nonnegative.
std::vector<Complex> fix_phase(std::vector<Complex> z) {
  double scale = 0.0;
  for (auto c : z) scale = std::max(scale, std::abs(c));
  for (auto c : z)
    if (std::abs(c) > 1e-8 * scale) {
      Complex ph = std::conj(c) / std::abs(c);
      for (auto& v : z) v *= ph;
      break;
    }
  return z;
}

// Each degree block of M_d rank at most one: returns the degree-1 vector.
// Off-degree moments are ignored; balanced data never reads them.
std::optional<std::vector<Complex>> torus_vector(const MomentTable& table, int clique,
                                                 const CertifyOptions& opts) {
  const int d = table.orders.at(clique);
  auto basis = table.basis(clique, d);
  MatrixXcd m = table.moment_matrix(clique, d);
  for (int g = 0; g <= d; ++g) {
    std::vector<int> idx;
    for (int r = 0; r < static_cast<int>(basis.size()); ++r)
      if (basis[r].degree() == g) idx.push_back(r);
    MatrixXcd blk(idx.size(), idx.size());
    for (size_t a = 0; a < idx.size(); ++a)
      for (size_t b = 0; b < idx.size(); ++b) blk(a, b) = m(idx[a], idx[b]);
    if (numeric_rank(blk, opts.rank_tol) > 1) return std::nullopt;
  }
  const auto& vars = table.cliques[clique];
  const int nv = static_cast<int>(vars.size());
  MatrixXcd b1(nv, nv);
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b)
      b1(a, b) = table.at(MultiIndex::unit(table.n, vars[a]), MultiIndex::unit(table.n, vars[b]));
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (b1 + b1.adjoint()));
  double lam = std::max(0.0, es.eigenvalues()[nv - 1]);
  std::vector<Complex> u(nv);
  for (int a = 0; a < nv; ++a) u[a] = std::sqrt(lam) * es.eigenvectors()(a, nv - 1);
  return u;
}

}  // namespace

std::vector<Complex> synchronize(int n, const std::vector<std::vector<int>>& cliques,
                                 const std::vector<std::vector<Complex>>& vectors, bool real,
                                 double* spread) {
  const int p = static_cast<int>(cliques.size());
  std::vector<Complex> phase(p, 1.0);
  std::vector<bool> done(p, false);
  auto overlap = [&](int a, int b) {
    std::vector<std::pair<int, int>> out;
    for (size_t i = 0; i < cliques[a].size(); ++i)
      for (size_t j = 0; j < cliques[b].size(); ++j)
        if (cliques[a][i] == cliques[b][j]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return out;
  };
  // Prim on overlap size; a new component starts at its lowest index.
  for (int root = 0; root < p; ++root) {
    if (done[root]) continue;
    done[root] = true;
    while (true) {
      int best_a = -1, best_b = -1;
      size_t best_w = 0;
      for (int a = 0; a < p; ++a) {
        if (!done[a]) continue;
        for (int b = 0; b < p; ++b) {
          if (done[b]) continue;
          size_t w = overlap(a, b).size();
          if (w > best_w) {
            best_w = w;
            best_a = a;
            best_b = b;
          }
        }
      }
      if (best_b < 0) break;
      Complex s = 0.0;
      for (auto [i, j] : overlap(best_a, best_b))
        s += std::conj(vectors[best_b][j]) * phase[best_a] * vectors[best_a][i];
      Complex ph = 1.0;
      if (real)
        ph = s.real() < 0.0 ? -1.0 : 1.0;
      else if (std::abs(s) > 0.0)
        ph = s / std::abs(s);
      phase[best_b] = ph;
      done[best_b] = true;
    }
  }
  std::vector<Complex> z(n, 0.0);
  std::vector<int> count(n, 0);
  for (int k = 0; k < p; ++k)
    for (size_t i = 0; i < cliques[k].size(); ++i) {
      z[cliques[k][i]] += phase[k] * vectors[k][i];
      ++count[cliques[k][i]];
    }
  for (int v = 0; v < n; ++v)
    if (count[v]) z[v] /= static_cast<double>(count[v]);
  if (spread) {
    *spread = 0.0;
    for (int k = 0; k < p; ++k)
      for (size_t i = 0; i < cliques[k].size(); ++i)
        *spread = std::max(*spread, std::abs(phase[k] * vectors[k][i] - z[cliques[k][i]]));
  }
  return z;
}

Certificate certify(const MomentTable& table, const Pop& pop, double bound,
                    const CertifyOptions& opts) {
  Certificate cert;
  cert.bound = bound;
  cert.verdicts = check_certificate_conditions(table, pop, opts);
  const Shortcut sc = detect_shortcut(pop);
  const MultiIndex zero = MultiIndex::zero(table.n);
  const Complex y00 = table.at(zero, zero);
  const int fc = table.full_clique();

  // Rank one at the top order of every clique: read the atom directly.
  bool all_rank_one = true;
  for (size_t k = 0; k < table.cliques.size(); ++k)
    if (numeric_rank(table.moment_matrix(static_cast<int>(k), table.orders[k]), opts.rank_tol) != 1)
      all_rank_one = false;
  if (all_rank_one) {
    std::vector<Complex> z(table.n, 0.0);
    std::vector<bool> seen(table.n, false);
    bool consistent = true;
    for (size_t k = 0; k < table.cliques.size(); ++k)
      for (int v : table.cliques[k]) {
        Complex val = table.at(MultiIndex::unit(table.n, v), zero) / y00;
        if (seen[v] && std::abs(val - z[v]) > opts.tol_atom * std::max(1.0, std::abs(val)))
          consistent = false;
        z[v] = val;
        seen[v] = true;
      }
    if (!consistent) {
      cert.diagnostics.push_back("StitchFailure: clique atoms disagree on overlaps");
    } else {
      Certificate c = cert;
      c.kind = CertificateKind::rank_one;
      c.rank = 1;
      c.t = *std::max_element(table.orders.begin(), table.orders.end());
      c.atoms = {z};
      c.weights = {y00.real()};
      if (verify_atoms(c, pop, bound, opts)) return c;
      cert.diagnostics = c.diagnostics;
    }
  }

  if (fc >= 0) {
    for (auto it = cert.verdicts.rbegin(); it != cert.verdicts.rend(); ++it) {
      if (it->clique != fc || !it->flat || !(it->waived || it->hypo_ok)) continue;
      try {
        Certificate c = extract_atoms(table, pop, fc, it->t, opts);
        c.verdicts = cert.verdicts;
        c.diagnostics.insert(c.diagnostics.begin(), cert.diagnostics.begin(), cert.diagnostics.end());
        c.kind = sc == Shortcut::toeplitz ? CertificateKind::toeplitz
                 : sc == Shortcut::hankel ? CertificateKind::hankel
                                          : CertificateKind::flat_hyponormal;
        if (c.rank > 1 && !pop.ball_radius && sc == Shortcut::none)
          c.diagnostics.push_back("warning: no ball constraint; rank > 1 extraction is not backed by a ball");
        if (verify_atoms(c, pop, bound, opts)) return c;
        cert.diagnostics = c.diagnostics;
      } catch (const Error& e) {
        cert.diagnostics.push_back(e.what());
      }
      break;
    }
  }

  if (pop.field == Field::complex && detect_invariance(pop).kind == SymmetryKind::balanced) {
    std::vector<std::vector<Complex>> vecs;
    bool ok = true;
    for (size_t k = 0; k < table.cliques.size() && ok; ++k) {
      auto u = torus_vector(table, static_cast<int>(k), opts);
      if (!u) ok = false;
      else vecs.push_back(*u);
    }
    if (ok) {
      double spread = 0.0;
      auto z = fix_phase(synchronize(table.n, table.cliques, vecs, false, &spread));
      double zmax = 0.0;
      for (auto c : z) zmax = std::max(zmax, std::abs(c));
      if (spread > 1e3 * opts.tol_atom * std::max(1.0, zmax)) {
        cert.diagnostics.push_back("StitchFailure: torus vectors disagree by " + std::to_string(spread));
      } else {
        Certificate c = cert;
        c.kind = CertificateKind::torus_orbit;
        c.rank = 1;
        c.t = *std::max_element(table.orders.begin(), table.orders.end());
        c.atoms = {z};
        c.weights = {y00.real()};
        if (verify_atoms(c, pop, bound, opts)) return c;
        cert.diagnostics = c.diagnostics;
      }
    }
  }
  cert.kind = CertificateKind::none;
  return cert;
}

SosCertificate extract_sos(const Relaxation& relax, const SdpSolution& sol, double cert_tol) {
  const int n = relax.pop.n;
  SosCertificate out;
  Polynomial residual = relax.pop.objective.poly();
  if (residual.num_vars() != n) residual = Polynomial(n);
  for (size_t b = 0; b < relax.block_origins.size(); ++b) {
    const BlockOrigin& o = relax.block_origins[b];
    const MatrixXcd& g = sol.block_duals.at(b);
    SosBlock blk;
    blk.label = relax.sdp.blocks[b].label;
    blk.kind = o.kind;
    blk.clique = o.clique;
    blk.constraint = o.constraint;
    blk.gram = g;
    blk.basis = o.row_monomials;
    blk.poly = Polynomial(n);
    for (int r = 0; r < o.size; ++r)
      for (int c = 0; c < o.size; ++c) blk.poly += o.entry(r, c) * g(c, r);
    residual -= blk.poly;
    out.blocks.push_back(std::move(blk));
  }
  for (size_t r = 0; r < relax.row_origins.size(); ++r) {
    const RowOrigin& ro = relax.row_origins[r];
    const double mu = sol.row_duals.at(r);
    residual -= ro.poly * Complex(mu);
    if (ro.constraint < 0) out.lambda += mu;
    out.row_multipliers.emplace_back(ro.constraint, mu);
  }
  double res = 0.0;
  if (relax.pop.field == Field::real) {
    RealPoly folded = fold_to_real(residual);
    for (const auto& [gamma, c] : folded.terms())
      if (!relax.mask.is_zero(gamma, MultiIndex::zero(n))) res = std::max(res, std::abs(c));
  } else {
    for (const auto& [key, c] : residual.terms())
      if (!relax.mask.is_zero(key.alpha, key.beta)) res = std::max(res, std::abs(c));
  }
  out.residual = res;
  const double fmax = std::max(1.0, relax.pop.objective.poly().max_abs_coefficient());
  if (res > cert_tol * fmax)
    throw Error(ErrorKind::IdentityResidualTooLarge,
                "identity residual " + std::to_string(res));
  return out;
}

json certificate_to_json(const Certificate& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["certified"] = c.certified();
  j["rank"] = c.rank;
  j["t"] = c.t;
  json atoms = json::array();
  for (const auto& z : c.atoms) {
    std::vector<double> re, im;
    for (auto v : z) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    atoms.push_back({{"re", re}, {"im", im}});
  }
  j["atoms"] = atoms;
  j["weights"] = c.weights;
  j["bound"] = c.bound;
  j["objective_at_atoms"] = c.objective_at_atoms;
  j["max_violation"] = c.max_violation;
  json verdicts = json::array();
  for (const auto& v : c.verdicts) {
    json jv{{"clique", v.clique},     {"t", v.t},
            {"rank_t", v.rank_t},     {"rank_low", v.rank_low},
            {"rank_one", v.rank_one}, {"flat", v.flat},
            {"waived", v.waived},     {"certified", v.certified}};
    if (v.hypo_checked) jv["hypo_min_eig"] = v.hypo_min_eig;
    verdicts.push_back(jv);
  }
  j["verdicts"] = verdicts;
  j["diagnostics"] = c.diagnostics;
  if (c.sos) {
    json blocks = json::array();
    for (const auto& b : c.sos->blocks) {
      json re = json::array(), im = json::array();
      for (int r = 0; r < b.gram.rows(); ++r) {
        std::vector<double> rr, ir;
        for (int cc = 0; cc < b.gram.cols(); ++cc) {
          rr.push_back(b.gram(r, cc).real());
          ir.push_back(b.gram(r, cc).imag());
        }
        re.push_back(rr);
        im.push_back(ir);
      }
      blocks.push_back({{"label", b.label}, {"constraint", b.constraint}, {"re", re}, {"im", im}});
    }
    json mult = json::array();
    for (auto [i, mu] : c.sos->row_multipliers) mult.push_back({{"constraint", i}, {"mu", mu}});
    j["sos"] = {{"lambda", c.sos->lambda},
                {"residual", c.sos->residual},
                {"blocks", blocks},
                {"row_multipliers", mult}};
  }
  return j;
}

}  // namespace cpop
