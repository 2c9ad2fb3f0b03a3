#include "cpop/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpop/error.hpp"

namespace cpop {

MomentBasis moment_basis(int n, const std::vector<int>& orders,
                         const std::vector<std::vector<int>>& cliques) {
  if (orders.size() != cliques.size())
    throw Error(ErrorKind::DimensionMismatch, "one order per clique expected");
  MomentBasis out;
  for (size_t k = 0; k < cliques.size(); ++k) out.push_back(monomials_up_to(n, orders[k], cliques[k]));
  return out;
}

MomentBasis moment_basis(int n, int d) { return {monomials_up_to(n, d)}; }

bool AffineExpr::is_zero(double tol) const {
  if (std::abs(constant) > tol) return false;
  return std::all_of(terms.begin(), terms.end(),
                     [&](const auto& t) { return std::abs(t.second) <= tol; });
}

Complex AffineExpr::evaluate(const Eigen::VectorXd& x) const {
  Complex v = constant;
  for (auto [j, c] : terms) v += c * x[j];
  return v;
}

namespace {

std::string pair_name(const MultiIndex& a, const MultiIndex& b) {
  return "y[" + a.str() + ";" + b.str() + "]";
}

}  // namespace

void MomentIndex::ensure(const MultiIndex& alpha, const MultiIndex& beta) {
  if (mask_.is_zero(alpha, beta)) return;
  if (field_ == Field::real) {
    MultiIndex g = alpha + beta;
    if (real_slots_.count(g)) return;
    real_slots_[g] = num_vars();
    names_.push_back("y[" + g.str() + "]");
    return;
  }
  TermKey key = alpha <= beta ? TermKey{alpha, beta} : TermKey{beta, alpha};
  if (complex_slots_.count(key)) return;
  Slots s;
  s.re = num_vars();
  names_.push_back(pair_name(key.alpha, key.beta) + (alpha == beta ? "" : ".re"));
  if (!(alpha == beta)) {
    s.im = num_vars();
    names_.push_back(pair_name(key.alpha, key.beta) + ".im");
  }
  complex_slots_[key] = s;
}

int MomentIndex::add_aux(const std::string& name) {
  names_.push_back(name);
  return num_vars() - 1;
}

bool MomentIndex::has(const MultiIndex& alpha, const MultiIndex& beta) const {
  if (mask_.is_zero(alpha, beta)) return true;
  if (field_ == Field::real) return real_slots_.count(alpha + beta) != 0;
  TermKey key = alpha <= beta ? TermKey{alpha, beta} : TermKey{beta, alpha};
  return complex_slots_.count(key) != 0;
}

AffineExpr MomentIndex::moment(const MultiIndex& alpha, const MultiIndex& beta) const {
  AffineExpr e;
  if (mask_.is_zero(alpha, beta)) return e;
  if (field_ == Field::real) {
    auto it = real_slots_.find(alpha + beta);
    if (it == real_slots_.end())
      throw Error(ErrorKind::UnindexedMoment, "moment " + pair_name(alpha, beta));
    e.terms.emplace_back(it->second, 1.0);
    return e;
  }
  bool canonical = alpha <= beta;
  TermKey key = canonical ? TermKey{alpha, beta} : TermKey{beta, alpha};
  auto it = complex_slots_.find(key);
  if (it == complex_slots_.end())
    throw Error(ErrorKind::UnindexedMoment, "moment " + pair_name(alpha, beta));
  e.terms.emplace_back(it->second.re, 1.0);
  if (it->second.im >= 0) e.terms.emplace_back(it->second.im, Complex(0.0, canonical ? 1.0 : -1.0));
  return e;
}

AffineExpr MomentIndex::riesz(const Polynomial& p) const {
  std::map<int, Complex> acc;
  for (const auto& [key, c] : p.terms()) {
    AffineExpr m = moment(key.alpha, key.beta);
    for (auto [j, v] : m.terms) acc[j] += c * v;
  }
  AffineExpr e;
  for (auto [j, v] : acc)
    if (v != Complex(0.0)) e.terms.emplace_back(j, v);
  return e;
}

nlohmann::json MomentIndex::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  if (field_ == Field::real) {
    for (const auto& [g, slot] : real_slots_) j.push_back({{"gamma", g.exponents()}, {"var", slot}});
    return j;
  }
  for (const auto& [key, s] : complex_slots_)
    j.push_back({{"alpha", key.alpha.exponents()}, {"beta", key.beta.exponents()}, {"re", s.re},
                 {"im", s.im}});
  return j;
}

int compute_dK(const Pop& pop) {
  int d = pop.n > 1 ? 2 : 1;
  for (const auto& c : pop.constraints) d = std::max(d, c.half_degree());
  return d;
}

std::vector<Polynomial> localizing_polys(const std::vector<MultiIndex>& basis,
                                         const Polynomial& h) {
  const size_t s = basis.size();
  std::vector<Polynomial> out(s * s);
  for (size_t r = 0; r < s; ++r)
    for (size_t c = 0; c < s; ++c) {
      Polynomial p(h.num_vars());
      for (const auto& [key, v] : h.terms()) p.add_term(basis[r] + key.alpha, basis[c] + key.beta, v);
      out[r * s + c] = std::move(p);
    }
  return out;
}

std::vector<Polynomial> hyponormal_polys(int n, const std::vector<MultiIndex>& basis, int i,
                                         int j) {
  std::vector<MultiIndex> shifts{MultiIndex::zero(n), MultiIndex::unit(n, i)};
  if (j >= 0) shifts.push_back(MultiIndex::unit(n, j));
  const size_t nb = basis.size();
  const size_t s = shifts.size() * nb;
  std::vector<Polynomial> out(s * s);
  for (size_t a = 0; a < shifts.size(); ++a)
    for (size_t r = 0; r < nb; ++r)
      for (size_t b = 0; b < shifts.size(); ++b)
        for (size_t c = 0; c < nb; ++c)
          out[(a * nb + r) * s + (b * nb + c)] =
              Polynomial::monomial(basis[r] + shifts[b], basis[c] + shifts[a]);
  return out;
}

Polynomial extend_vars(const Polynomial& p, int n_new) {
  Polynomial q(n_new);
  auto widen = [&](const MultiIndex& m) {
    std::vector<int> e = m.exponents();
    e.resize(n_new, 0);
    return MultiIndex(std::move(e));
  };
  for (const auto& [key, c] : p.terms()) q.add_term(widen(key.alpha), widen(key.beta), c);
  return q;
}

namespace {

HermitianPoly extend_hermitian(const HermitianPoly& p, int n_new) {
  return HermitianPoly::from_polynomial(extend_vars(p.poly(), n_new));
}

Pop widen_pop(const Pop& pop, int n_new) {
  Pop out = pop;
  out.n = n_new;
  out.objective = extend_hermitian(pop.objective, n_new);
  for (auto& q : out.quadratic_costs) q.poly = extend_hermitian(q.poly, n_new);
  for (auto& c : out.constraints) {
    c.poly = extend_hermitian(c.poly, n_new);
    if (c.flow) c.flow->inner = extend_vars(c.flow->inner, n_new);
  }
  return out;
}

}  // namespace

Pop add_sphere_slack(const Pop& pop, double radius) {
  Pop out = widen_pop(pop, pop.n + 1);
  Polynomial sphere = Polynomial::constant(out.n, -radius * radius);
  for (int k = 0; k < out.n; ++k)
    sphere.add_term(MultiIndex::unit(out.n, k), MultiIndex::unit(out.n, k), 1.0);
  out.constraints.push_back(
      Constraint{HermitianPoly::from_polynomial(sphere), Sense::eq, 0.0, 1.0, "sphere", {}});
  if (!out.ball_radius) out.ball_radius = radius;
  return out;
}

Pop add_clique_sphere_slacks(const Pop& pop, const std::vector<std::vector<int>>& cliques,
                             double radius) {
  const int n_new = pop.n + static_cast<int>(cliques.size());
  Pop out = widen_pop(pop, n_new);
  for (size_t k = 0; k < cliques.size(); ++k) {
    Polynomial sphere = Polynomial::constant(n_new, -radius * radius);
    for (int v : cliques[k]) sphere.add_term(MultiIndex::unit(n_new, v), MultiIndex::unit(n_new, v), 1.0);
    int s = pop.n + static_cast<int>(k);
    sphere.add_term(MultiIndex::unit(n_new, s), MultiIndex::unit(n_new, s), 1.0);
    out.constraints.push_back(Constraint{HermitianPoly::from_polynomial(sphere), Sense::eq, 0.0,
                                         1.0, "sphere" + std::to_string(k), {}});
  }
  return out;
}

Pop expand_quadratic_costs(const Pop& pop) {
  Pop out = pop;
  out.objective = pop.full_objective();
  out.quadratic_costs.clear();
  return out;
}

namespace {

class Builder {
 public:
  explicit Builder(Relaxation& r) : r_(r) {}

  // Emits a PSD block given its row-major polynomial grid, splitting it
  // along the zero pattern when the mask is active.
  void psd_block(BlockOrigin origin, const std::string& label,
                 const std::vector<AffineExpr>* extra = nullptr) {
    const int s = origin.size;
    std::vector<AffineExpr> expr(s * s);
    for (int rr = 0; rr < s; ++rr)
      for (int cc = rr; cc < s; ++cc) {
        expr[rr * s + cc] = r_.index.riesz(origin.entry(rr, cc));
        if (extra) {
          for (auto t : (*extra)[rr * s + cc].terms) expr[rr * s + cc].terms.push_back(t);
        }
      }

    std::vector<std::vector<int>> parts;
    if (r_.options.use_mask && r_.mask.kind != SymmetryKind::none) {
      std::vector<int> parent(s);
      std::iota(parent.begin(), parent.end(), 0);
      auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
      };
      for (int rr = 0; rr < s; ++rr)
        for (int cc = rr + 1; cc < s; ++cc)
          if (!expr[rr * s + cc].is_zero()) parent[find(cc)] = find(rr);
      std::map<int, std::vector<int>> comp;
      for (int rr = 0; rr < s; ++rr) comp[find(rr)].push_back(rr);
      for (auto& [root, rows] : comp) parts.push_back(std::move(rows));
      std::sort(parts.begin(), parts.end());
    } else {
      std::vector<int> all(s);
      std::iota(all.begin(), all.end(), 0);
      parts.push_back(std::move(all));
    }

    for (size_t p = 0; p < parts.size(); ++p) {
      const auto& rows = parts[p];
      const int ps = static_cast<int>(rows.size());
      // A masked diagonal entry that is identically zero carries no constraint.
      if (ps == 1 && expr[rows[0] * s + rows[0]].is_zero()) continue;
      BlockOrigin sub;
      sub.kind = origin.kind;
      sub.clique = origin.clique;
      sub.constraint = origin.constraint;
      sub.order = origin.order;
      sub.size = ps;
      sub.entry_polys.resize(ps * ps);
      for (int a = 0; a < ps; ++a) {
        if (!origin.row_monomials.empty()) sub.row_monomials.push_back(origin.row_monomials[rows[a]]);
        for (int b = 0; b < ps; ++b)
          sub.entry_polys[a * ps + b] = origin.entry_polys[rows[a] * s + rows[b]];
      }
      SdpBlock blk;
      blk.size = ps;
      blk.label = parts.size() > 1 ? label + "#" + std::to_string(p) : label;
      for (int a = 0; a < ps; ++a)
        for (int b = a; b < ps; ++b) {
          int ra = rows[a], rb = rows[b];
          if (ra > rb) std::swap(ra, rb);
          for (auto [var, coef] : expr[ra * s + rb].terms) {
            Complex v = rows[a] <= rows[b] ? coef : std::conj(coef);
            if (v == Complex(0.0)) continue;
            if (v.imag() != 0.0 && (a != b)) blk.complex = true;
            blk.entries.push_back({a, b, var, v});
          }
        }
      if (!blk.complex)
        for (auto& e : blk.entries) e.value = e.value.real();
      r_.sdp.blocks.push_back(std::move(blk));
      r_.block_origins.push_back(std::move(sub));
    }
  }

  void row(const Polynomial& poly, double offset, RowSense sense, int constraint,
           const std::string& kind) {
    AffineExpr e = r_.index.riesz(poly);
    SdpRow row;
    row.constant = offset;
    row.sense = sense;
    row.label = kind + (constraint >= 0 ? "[" + std::to_string(constraint) + "]" : "");
    for (auto [j, v] : e.terms) {
      if (std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v)))
        throw Error(ErrorKind::NonHermitian, "row " + row.label + " is not real");
      if (v.real() != 0.0) row.coeffs.emplace_back(j, v.real());
    }
    if (row.coeffs.empty()) return;
    r_.sdp.rows.push_back(std::move(row));
    r_.row_origins.push_back(RowOrigin{constraint, poly, offset, kind});
  }

  // Pins every entry of a localizing matrix to zero.
  void pinned(const std::vector<Polynomial>& polys, int s, int constraint) {
    for (int a = 0; a < s; ++a)
      for (int b = a; b < s; ++b) {
        const Polynomial& p = polys[a * s + b];
        Polynomial re = (p + p.conj()) * Complex(0.5);
        row(re, 0.0, RowSense::eq, constraint, "eq.re");
        if (a != b && r_.pop.field == Field::complex) {
          Polynomial im = (p - p.conj()) * Complex(0.0, -0.5);
          row(im, 0.0, RowSense::eq, constraint, "eq.im");
        }
      }
  }

 private:
  Relaxation& r_;
};

bool all_indexed(const MomentIndex& index, const Polynomial& p) {
  for (const auto& [key, c] : p.terms())
    if (!index.has(key.alpha, key.beta)) return false;
  return true;
}

}  // namespace

Relaxation assemble(const Pop& pop, const CliquePlan& plan, const SymmetryReport* mask,
                    const RelaxationOptions& options) {
  pop.validate();
  Relaxation r;
  r.pop = pop;
  r.plan = plan;
  r.options = options;
  if (mask && options.use_mask) r.mask = *mask;
  r.d_K = compute_dK(pop);
  const int n = pop.n;
  const int m = static_cast<int>(pop.constraints.size());
  if (static_cast<int>(plan.orders.size()) != m)
    throw Error(ErrorKind::DimensionMismatch, "plan has no order for every constraint");
  for (int i = 0; i < m; ++i)
    if (plan.orders[i] < pop.constraints[i].half_degree())
      throw Error(ErrorKind::OrderTooLow, "constraint " + std::to_string(i));

  r.index = MomentIndex(n, pop.field, r.mask);
  r.bases = moment_basis(n, plan.clique_orders, plan.cliques);
  const MultiIndex zero = MultiIndex::zero(n);
  r.index.ensure(zero, zero);
  for (const auto& basis : r.bases)
    for (size_t a = 0; a < basis.size(); ++a)
      for (size_t b = a; b < basis.size(); ++b) r.index.ensure(basis[a], basis[b]);

  std::vector<int> aux;
  std::vector<AffineExpr> aux_extra;
  for (size_t q = 0; q < pop.quadratic_costs.size(); ++q) {
    if (pop.quadratic_costs[q].weight < 0.0)
      throw Error(ErrorKind::NotApplicable, "epigraph needs a nonnegative quadratic weight");
    aux.push_back(r.index.add_aux("t[" + std::to_string(q) + "]"));
  }

  Builder build(r);
  r.y00_var = r.index.moment(zero, zero).terms.front().first;
  build.row(Polynomial::constant(n, 1.0), -1.0, RowSense::eq, -1, "normalization");

  for (size_t k = 0; k < plan.cliques.size(); ++k) {
    BlockOrigin o;
    o.kind = BlockKind::moment;
    o.clique = static_cast<int>(k);
    o.order = plan.clique_orders[k];
    o.row_monomials = r.bases[k];
    o.size = static_cast<int>(r.bases[k].size());
    o.entry_polys = localizing_polys(r.bases[k], Polynomial::constant(n, 1.0));
    build.psd_block(std::move(o), "moment[" + std::to_string(k) + "]");
  }

  for (int i = 0; i < m; ++i) {
    const Constraint& c = pop.constraints[i];
    const Polynomial& g = c.poly.poly();
    Polynomial upper = Polynomial::constant(n, c.upper) - g;
    if (plan.is_high_order(i)) {
      int k = plan.assignment.at(i);
      int order = plan.orders[i] - c.half_degree();
      auto basis = monomials_up_to(n, order, plan.cliques[k]);
      const int s = static_cast<int>(basis.size());
      auto make = [&](const Polynomial& h) {
        BlockOrigin o;
        o.kind = BlockKind::localizing;
        o.clique = k;
        o.constraint = i;
        o.order = order;
        o.size = s;
        o.row_monomials = basis;
        o.entry_polys = localizing_polys(basis, h);
        return o;
      };
      switch (c.sense) {
        case Sense::eq: build.pinned(localizing_polys(basis, g), s, i); break;
        case Sense::ge: build.psd_block(make(g), "loc[" + std::to_string(i) + "]"); break;
        case Sense::range:
          build.psd_block(make(g), "loc[" + std::to_string(i) + "]");
          build.psd_block(make(upper), "loc_upper[" + std::to_string(i) + "]");
          break;
      }
      continue;
    }
    bool schur = false;
    if (c.flow) {
      if (options.flow_mode == FlowMode::schur)
        schur = true;
      else if (options.flow_mode == FlowMode::automatic)
        schur = !all_indexed(r.index, g);
    }
    if (schur) {
      BlockOrigin o;
      o.kind = BlockKind::flow;
      o.constraint = i;
      o.size = 2;
      o.entry_polys = {Polynomial::constant(n, c.flow->limit_sq), c.flow->inner,
                       c.flow->inner.conj(), Polynomial::constant(n, 1.0)};
      build.psd_block(std::move(o), "flow[" + std::to_string(i) + "]");
      continue;
    }
    switch (c.sense) {
      case Sense::ge: build.row(g, 0.0, RowSense::ge, i, "scalar"); break;
      case Sense::eq: build.row(g, 0.0, RowSense::eq, i, "scalar"); break;
      case Sense::range:
        build.row(g, 0.0, RowSense::ge, i, "scalar");
        build.row(upper, 0.0, RowSense::ge, i, "scalar_upper");
        break;
    }
  }

  if (options.hypo_strengthen_t > 0) {
    if (plan.cliques.size() != 1)
      throw Error(ErrorKind::NotApplicable, "hyponormality strengthening needs a dense plan");
    int order = options.hypo_strengthen_t - r.d_K;
    if (order < 0)
      throw Error(ErrorKind::InsufficientOrder,
                  "t = " + std::to_string(options.hypo_strengthen_t) + " < d_K");
    auto basis = monomials_up_to(n, order);
    std::vector<std::pair<int, int>> pairs;
    if (n == 1)
      pairs.emplace_back(0, -1);
    else
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    for (auto [i, j] : pairs) {
      BlockOrigin o;
      o.kind = BlockKind::hyponormal;
      o.order = order;
      o.entry_polys = hyponormal_polys(n, basis, i, j);
      o.size = static_cast<int>(basis.size()) * (j < 0 ? 2 : 3);
      build.psd_block(std::move(o), "hypo[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  }

  for (size_t q = 0; q < pop.quadratic_costs.size(); ++q) {
    BlockOrigin o;
    o.kind = BlockKind::epigraph;
    o.size = 2;
    const Polynomial& p = pop.quadratic_costs[q].poly.poly();
    o.entry_polys = {Polynomial(n), p, p, Polynomial::constant(n, 1.0)};
    std::vector<AffineExpr> extra(4);
    extra[0].terms.emplace_back(aux[q], 1.0);
    build.psd_block(std::move(o), "epigraph[" + std::to_string(q) + "]", &extra);
  }

  r.sdp.num_vars = r.index.num_vars();
  r.sdp.var_names = r.index.names();
  r.sdp.objective.assign(r.sdp.num_vars, 0.0);
  AffineExpr f = r.index.riesz(pop.objective.poly());
  for (auto [j, v] : f.terms) {
    if (std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v)))
      throw Error(ErrorKind::NonHermitian, "objective is not real");
    r.sdp.objective[j] += v.real();
  }
  for (size_t q = 0; q < pop.quadratic_costs.size(); ++q)
    r.sdp.objective[aux[q]] += pop.quadratic_costs[q].weight;
  return r;
}

}  // namespace cpop
