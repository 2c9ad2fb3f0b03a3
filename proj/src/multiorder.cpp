#include "cpop/multiorder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace cpop {

using Eigen::MatrixXcd;
using nlohmann::json;

void LoopParams::validate() const {
  if (h < 1) throw Error(ErrorKind::DimensionMismatch, "h must be at least 1");
  if (delta_max_min < 0) throw Error(ErrorKind::DimensionMismatch, "delta must be nonnegative");
  if (max_iters < 1) throw Error(ErrorKind::DimensionMismatch, "max_iters must be at least 1");
}

json LoopRecord::to_json() const {
  return json{{"iteration", iteration},   {"bound", bound},
              {"orders", orders},         {"incremented", incremented},
              {"max_mismatch", max_mismatch}, {"certified", certified},
              {"status", status}};
}

DiracPoint closest_dirac(const MomentTable& table, const CliquePlan& plan) {
  DiracPoint out;
  const auto& cliques = plan.cliques.empty() ? table.cliques : plan.cliques;
  std::vector<std::vector<Complex>> vecs;
  for (size_t k = 0; k < cliques.size(); ++k) {
    const int nv = static_cast<int>(cliques[k].size());
    MatrixXcd m1 = table.moment_matrix(static_cast<int>(k), 1);
    m1 = 0.5 * (m1 + m1.adjoint());
    double off = 0.0;
    for (int r = 1; r <= nv; ++r) off = std::max(off, std::abs(m1(0, r)));
    const bool coupled = off > 1e-8 * std::max(1.0, m1.cwiseAbs().maxCoeff());

    // Balanced data: degree-1 block only. Otherwise the full order-1 matrix,
    // whose constant component fixes the phase.
    MatrixXcd m = coupled ? m1 : MatrixXcd(m1.bottomRightCorner(nv, nv));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    const int top = static_cast<int>(m.rows()) - 1;
    const double lam = es.eigenvalues()[top];
    std::vector<Complex> v(nv, 0.0);
    if (lam < 1e-10) {
      out.degenerate = true;
    } else {
      Eigen::VectorXcd u = std::sqrt(lam) * es.eigenvectors().col(top);
      Complex ph = 1.0;
      if (coupled && std::abs(u[0]) > 0.0) ph = std::conj(u[0]) / std::abs(u[0]);
      for (int a = 0; a < nv; ++a) v[a] = ph * u[coupled ? a + 1 : a];
    }
    vecs.push_back(std::move(v));
  }
  out.z = synchronize(table.n, cliques, vecs, table.field == Field::real, &out.spread);
  if (table.field == Field::real)
    for (auto& c : out.z) c = c.real();
  return out;
}

std::vector<double> mismatches(const MomentTable& table, const Pop& pop, std::span<const Complex> z) {
  if (static_cast<int>(z.size()) != pop.n)
    throw Error(ErrorKind::DimensionMismatch, "point has " + std::to_string(z.size()) + " coordinates");
  std::vector<double> out;
  out.reserve(pop.constraints.size());
  for (const auto& c : pop.constraints) {
    if (c.poly.is_zero()) {
      out.push_back(0.0);
      continue;
    }
    double ly = table.riesz(c.poly.poly()).real();
    out.push_back(std::abs(ly - c.poly.evaluate(z)) * c.scale);
  }
  return out;
}

LoopState update_orders(const LoopState& state, const std::vector<double>& mism,
                        const LoopParams& params, const Pop& pop) {
  const int m = static_cast<int>(pop.constraints.size());
  if (static_cast<int>(mism.size()) != m || static_cast<int>(state.orders.size()) != m)
    throw Error(ErrorKind::DimensionMismatch, "mismatch/order vectors do not match the constraints");

  std::vector<int> above, fresh;
  for (int i = 0; i < m; ++i)
    if (mism[i] > params.eps) {
      above.push_back(i);
      if (!state.raised[i]) fresh.push_back(i);
    }
  if (above.empty()) return state;

  std::vector<int> pool = fresh.empty() ? above : fresh;
  std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) { return mism[a] > mism[b]; });
  if (static_cast<int>(pool.size()) > params.h) pool.resize(params.h);

  LoopState next = state;
  for (int i : pool) {
    ++next.orders[i];
    next.raised[i] = true;
  }

  // Closure over the host cliques of the raised constraints.
  CliquePlan plan = sparse_plan(pop, next.orders);
  for (int i : pool) {
    auto it = plan.assignment.find(i);
    if (it == plan.assignment.end()) continue;
    const auto& clique = plan.cliques[it->second];
    for (int j = 0; j < m; ++j) {
      if (next.orders[j] >= next.orders[i]) continue;
      auto vars = pop.constraints[j].poly.variables();
      bool inside = std::all_of(vars.begin(), vars.end(), [&](int v) {
        return std::binary_search(clique.begin(), clique.end(), v);
      });
      if (!inside) continue;
      next.orders[j] = next.orders[i];
      next.raised[j] = true;
    }
  }

  if (m > 0) {
    auto [lo, hi] = std::minmax_element(next.orders.begin(), next.orders.end());
    if (*hi - *lo > params.delta_max_min) {
      const int low = *lo;
      for (int j = 0; j < m; ++j)
        if (next.orders[j] == low) {
          ++next.orders[j];
          next.raised[j] = true;
        }
    }
  }

  if (next.orders == state.orders ||
      std::find(state.seen_orders.begin(), state.seen_orders.end(), next.orders) !=
          state.seen_orders.end())
    throw Error(ErrorKind::NoProgress, "order vector repeats");
  next.seen_orders.push_back(next.orders);
  return next;
}

GlobalResult solve_global(const Pop& pop, const LoopParams& params, const GlobalOptions& opts) {
  pop.validate();
  params.validate();
  const int m = static_cast<int>(pop.constraints.size());

  GlobalResult res;
  res.state.orders.resize(m);
  for (int i = 0; i < m; ++i) res.state.orders[i] = std::max(1, pop.constraints[i].half_degree());
  res.state.raised.assign(m, false);
  res.state.seen_orders.push_back(res.state.orders);

  SymmetryReport mask;
  if (opts.relaxation.use_mask) mask = detect_invariance(pop);
  LoopParams p = params;

  for (int it = 0; it < params.max_iters; ++it) {
    LoopRecord rec;
    rec.iteration = it;
    rec.orders = res.state.orders;

    res.plan = sparse_plan(pop, res.state.orders);
    Relaxation relax = assemble(pop, res.plan, opts.relaxation.use_mask ? &mask : nullptr, opts.relaxation);
    SdpSolution sol = opts.solve ? opts.solve(relax.sdp) : solve_sdp(relax.sdp, opts.solver);
    res.sdp_status = sol.status;
    if (sol.status == SdpStatus::infeasible || sol.status == SdpStatus::unbounded) {
      rec.status = to_string(sol.status);
      res.state.history.push_back(rec);
      if (opts.on_record) opts.on_record(rec);
      return res;
    }
    res.bound = sol.primal_objective;
    rec.bound = res.bound;
    res.table = table_from_relaxation(relax, sol.x);
    if (p.eps <= 0.0) p.eps = 1e-4 * (1.0 + std::abs(res.bound));
    res.eps = p.eps;

    res.certificate = certify(res.table, pop, res.bound, opts.certify);
    if (res.certificate.certified()) {
      res.certified = true;
      if (res.certificate.atoms.size() == 1) {
        res.point = res.certificate.atoms[0];
        res.objective_at_point = evaluate_objective(pop, res.point);
      }
      rec.certified = true;
      rec.status = "certified";
      res.state.history.push_back(rec);
      if (opts.on_record) opts.on_record(rec);
      return res;
    }

    DiracPoint dirac = closest_dirac(res.table, res.plan);
    res.point = dirac.z;
    res.objective_at_point = evaluate_objective(pop, res.point);
    auto mism = mismatches(res.table, pop, res.point);
    rec.max_mismatch = mism.empty() ? 0.0 : *std::max_element(mism.begin(), mism.end());
    if (rec.max_mismatch <= p.eps) {
      res.eps_feasible = true;
      rec.status = "eps_feasible";
      res.state.history.push_back(rec);
      if (opts.on_record) opts.on_record(rec);
      return res;
    }

    LoopState next = update_orders(res.state, mism, p, pop);
    for (int i = 0; i < m; ++i)
      if (next.orders[i] != res.state.orders[i]) rec.incremented.push_back(i);
    rec.status = "raised";
    next.history = res.state.history;
    next.history.push_back(rec);
    if (opts.on_record) opts.on_record(rec);
    res.state = std::move(next);
  }
  throw MaxItersExceeded("no certificate after " + std::to_string(params.max_iters) + " iterations",
                         res);
}

}  // namespace cpop
