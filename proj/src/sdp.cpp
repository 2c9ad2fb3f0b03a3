#include "cpop/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>

#include "cpop/error.hpp"
#include "cpop/schur.hpp"

namespace cpop {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::near_optimal: return "near_optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::stalled: return "stalled";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Block {
  int size = 0;
  MatrixXd f0;
  BlockCoeffs coeffs;
  int source = -1;   // index into SdpProblem::blocks, or -1 for an LP row
  int row = -1;      // SdpRow index for LP rows
  bool embedded = false;
};

struct Model {
  int m = 0;
  VectorXd c;
  std::vector<Block> blocks;
  MatrixXd aeq;       // independent equality rows
  VectorXd a0;
  std::vector<int> eq_rows;  // SdpRow index of each kept row
  MatrixXd aeq_all;
  VectorXd a0_all;
  int total_dim = 0;
};

Block make_block(const SdpBlock& blk) {
  Block b;
  b.size = blk.size;
  b.f0 = MatrixXd::Zero(blk.size, blk.size);
  std::map<int, std::map<std::pair<int, int>, double>> per_var;
  for (const auto& e : blk.entries) {
    double v = e.value.real();
    if (e.var < 0) {
      b.f0(e.row, e.col) += v;
      if (e.row != e.col) b.f0(e.col, e.row) += v;
      continue;
    }
    auto& mp = per_var[e.var];
    mp[{e.row, e.col}] += v;
    if (e.row != e.col) mp[{e.col, e.row}] += v;
  }
  b.coeffs.size = blk.size;
  for (auto& [var, mp] : per_var) {
    std::vector<SymEntry> ents;
    for (auto& [rc, v] : mp)
      if (v != 0.0) ents.push_back({rc.first, rc.second, v});
    if (ents.empty()) continue;
    b.coeffs.vars.push_back(var);
    b.coeffs.mats.push_back(std::move(ents));
  }
  return b;
}

Model build_model(const SdpProblem& sdp_in) {
  if (static_cast<int>(sdp_in.objective.size()) != sdp_in.num_vars)
    throw Error(ErrorKind::DimensionMismatch, "objective length != num_vars");
  SdpProblem sdp = hermitian_to_real(sdp_in);
  Model md;
  md.m = sdp.num_vars;
  md.c = Eigen::Map<const VectorXd>(sdp.objective.data(), md.m);
  for (size_t k = 0; k < sdp.blocks.size(); ++k) {
    Block b = make_block(sdp.blocks[k]);
    b.source = static_cast<int>(k);
    b.embedded = sdp_in.blocks[k].complex;
    md.blocks.push_back(std::move(b));
  }
  std::vector<int> eq_all;
  for (size_t r = 0; r < sdp.rows.size(); ++r) {
    const SdpRow& row = sdp.rows[r];
    for (auto [j, a] : row.coeffs)
      if (j < 0 || j >= md.m) throw Error(ErrorKind::DimensionMismatch, "row variable index");
    if (row.sense == RowSense::eq) {
      eq_all.push_back(static_cast<int>(r));
      continue;
    }
    SdpBlock lp;
    lp.size = 1;
    lp.entries.push_back({0, 0, -1, row.constant});
    for (auto [j, a] : row.coeffs) lp.entries.push_back({0, 0, j, a});
    Block b = make_block(lp);
    b.row = static_cast<int>(r);
    md.blocks.push_back(std::move(b));
  }
  for (const auto& b : md.blocks) md.total_dim += b.size;

  const int q0 = static_cast<int>(eq_all.size());
  md.aeq_all = MatrixXd::Zero(q0, md.m);
  md.a0_all = VectorXd::Zero(q0);
  for (int i = 0; i < q0; ++i) {
    const SdpRow& row = sdp.rows[eq_all[i]];
    for (auto [j, a] : row.coeffs) md.aeq_all(i, j) += a;
    md.a0_all[i] = row.constant;
  }
  if (q0 > 0) {
    // Keep a maximal independent subset of the equality rows.
    Eigen::ColPivHouseholderQR<MatrixXd> qr(md.aeq_all.transpose());
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    std::vector<int> keep;
    for (int i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()[i]);
    std::sort(keep.begin(), keep.end());
    md.aeq.resize(rank, md.m);
    md.a0.resize(rank);
    for (int i = 0; i < rank; ++i) {
      md.aeq.row(i) = md.aeq_all.row(keep[i]);
      md.a0[i] = md.a0_all[keep[i]];
      md.eq_rows.push_back(eq_all[keep[i]]);
    }
  } else {
    md.aeq.resize(0, md.m);
    md.a0.resize(0);
  }
  return md;
}

MatrixXd apply_lin(const Block& b, const VectorXd& x) {
  MatrixXd out = MatrixXd::Zero(b.size, b.size);
  for (size_t u = 0; u < b.coeffs.vars.size(); ++u) {
    double xv = x[b.coeffs.vars[u]];
    if (xv == 0.0) continue;
    for (const auto& e : b.coeffs.mats[u]) out(e.row, e.col) += e.value * xv;
  }
  return out;
}

// <F_i, M> for every variable, summed over blocks.
VectorXd adjoint(const Model& md, const std::vector<MatrixXd>& mats) {
  VectorXd g = VectorXd::Zero(md.m);
  for (size_t k = 0; k < md.blocks.size(); ++k) {
    const auto& bc = md.blocks[k].coeffs;
    for (size_t u = 0; u < bc.vars.size(); ++u) {
      double s = 0.0;
      for (const auto& e : bc.mats[u]) s += e.value * mats[k](e.row, e.col);
      g[bc.vars[u]] += s;
    }
  }
  return g;
}

// Largest alpha with X + alpha dX PSD (infinity if unbounded).
double max_step(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd linv_dx = llt.matrixL().solve(dx);
  MatrixXd m = llt.matrixL().solve(linv_dx.transpose());
  m = 0.5 * (m + m.transpose());
  double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

double frob_dot(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

struct Direction {
  VectorXd dx, dlam;
  std::vector<MatrixXd> ds, dy;
};

}  // namespace

SdpSolution solve_sdp(const SdpProblem& sdp, const SolverOptions& opts) {
  Model md = build_model(sdp);
  const int m = md.m;
  const int q = static_cast<int>(md.aeq.rows());
  const int nb = static_cast<int>(md.blocks.size());

  const double sc = std::max(1.0, md.c.lpNorm<Eigen::Infinity>());
  const VectorXd c = md.c / sc;

  SdpSolution sol;

  // Least-norm point on the equality rows.
  VectorXd x = VectorXd::Zero(m);
  if (q > 0) {
    x = md.aeq.completeOrthogonalDecomposition().solve(-md.a0);
    double res = (md.aeq_all * x + md.a0_all).norm();
    if (res > 1e-7 * (1.0 + md.a0_all.norm())) {
      sol.status = SdpStatus::infeasible;
      sol.x = x;
      sol.primal_residual = res;
      return sol;
    }
  }

  double fscale = 1.0;
  for (const auto& b : md.blocks) {
    fscale = std::max(fscale, b.f0.cwiseAbs().maxCoeff());
    for (const auto& mat : b.coeffs.mats)
      for (const auto& e : mat) fscale = std::max(fscale, std::abs(e.value));
  }
  const double f0_norm = [&] {
    double s = 0.0;
    for (const auto& b : md.blocks) s += b.f0.squaredNorm();
    return std::sqrt(s);
  }();

  // Orthonormal split of R^m: A^T = Q1 R and N spanning the nullspace of A.
  MatrixXd q1, nbasis, rfac;
  if (q > 0) {
    Eigen::HouseholderQR<MatrixXd> qr(md.aeq.transpose());
    MatrixXd qfull = qr.householderQ() * MatrixXd::Identity(m, m);
    q1 = qfull.leftCols(q);
    nbasis = qfull.rightCols(m - q);
    rfac = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  }

  std::vector<MatrixXd> s(nb), y(nb);
  for (int k = 0; k < nb; ++k) {
    const int sz = md.blocks[k].size;
    s[k] = 10.0 * fscale * MatrixXd::Identity(sz, sz);
    y[k] = 10.0 * MatrixXd::Identity(sz, sz);
  }
  VectorXd lam = VectorXd::Zero(q);

  std::vector<BlockCoeffs> coeffs;
  for (const auto& b : md.blocks) coeffs.push_back(b.coeffs);

  const double n_tot = std::max(1, md.total_dim);
  int stall = 0;
  double pinf = 0, dinf = 0, rel_gap = 0, pobj = 0, dobj = 0;
  bool converged = false;
  int iter = 0;
  std::string failure;

  struct Snapshot {
    VectorXd x, lam;
    std::vector<MatrixXd> s, y;
    double pinf, dinf, rel_gap, merit = std::numeric_limits<double>::infinity();
    int iter = 0;
  } best;

  auto objectives = [&] {
    pobj = c.dot(x);
    dobj = -lam.dot(md.a0);
    for (int k = 0; k < nb; ++k) dobj -= frob_dot(md.blocks[k].f0, y[k]);
  };

  for (iter = 0; iter < opts.max_iters; ++iter) {
    std::vector<MatrixXd> rs(nb);
    double rs_norm = 0.0;
    for (int k = 0; k < nb; ++k) {
      rs[k] = md.blocks[k].f0 + apply_lin(md.blocks[k], x) - s[k];
      rs_norm += rs[k].squaredNorm();
    }
    VectorXd r_eq = md.aeq * x + md.a0;
    VectorXd rd = c - adjoint(md, y) - md.aeq.transpose() * lam;
    objectives();
    double mu = 0.0;
    for (int k = 0; k < nb; ++k) mu += frob_dot(s[k], y[k]);
    mu /= n_tot;

    pinf = std::max(std::sqrt(rs_norm) / (1.0 + f0_norm), r_eq.norm() / (1.0 + md.a0.norm()));
    dinf = rd.norm() / (1.0 + c.norm());
    rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (opts.verbose)
      std::cerr << "ipm " << iter << " pobj " << pobj * sc << " dobj " << dobj * sc << " pinf "
                << pinf << " dinf " << dinf << " gap " << rel_gap << " mu " << mu << "\n";
    if (pinf < opts.tol_feas && dinf < opts.tol_feas && rel_gap < opts.tol_gap) {
      converged = true;
      break;
    }
    const double merit = std::max({pinf, dinf, rel_gap});
    if (merit < best.merit) {
      best = Snapshot{x, lam, s, y, pinf, dinf, rel_gap, merit, iter};
    } else if (merit > 1e3 * best.merit && best.merit < 1e-5) {
      failure = "diverged";
      break;
    }
    if (iter - best.iter >= 10) break;  // no progress
    // Normalised rays: y / dobj certifies primal infeasibility once its
    // residual against the homogeneous dual constraints is negligible.
    const double dual_ray = (c - rd).norm() / std::max(dobj, 1e-300);
    const double primal_ray = (std::sqrt(rs_norm) + f0_norm + r_eq.norm() + md.a0.norm()) /
                              std::max(-pobj, 1e-300);
    if (dinf < 1e-6 && (dobj * sc > 1e8 || (pinf > opts.tol_feas && dobj > 0 && dual_ray < 1e-6))) {
      sol.status = SdpStatus::infeasible;
      break;
    }
    if (pinf < 1e-6 && (pobj * sc < -1e8 || (dinf > opts.tol_feas && pobj < 0 && primal_ray < 1e-6))) {
      sol.status = SdpStatus::unbounded;
      break;
    }

    std::vector<MatrixXd> s_inv(nb);
    for (int k = 0; k < nb; ++k) {
      Eigen::LLT<MatrixXd> llt(s[k]);
      if (llt.info() != Eigen::Success) {
        failure = "slack lost definiteness";
        break;
      }
      s_inv[k] = llt.solve(MatrixXd::Identity(s[k].rows(), s[k].cols()));
      s_inv[k] = 0.5 * (s_inv[k] + s_inv[k].transpose()).eval();
    }
    if (!failure.empty()) break;
    MatrixXd bmat = MatrixXd::Zero(m, m);
    if (opts.parallel)
      schur_parallel(coeffs, s_inv, y, bmat);
    else
      schur_serial(coeffs, s_inv, y, bmat);
    const MatrixXd bexact = bmat;
    // Reduced Schur matrix N^T B N on the nullspace of the kept equality
    // rows, Jacobi-equilibrated, with a small shift.
    MatrixXd bred = q > 0 ? MatrixXd(nbasis.transpose() * bmat * nbasis) : bmat;
    const int mr = static_cast<int>(bred.rows());
    const double dmax = mr > 0 ? std::max(1e-300, bred.diagonal().cwiseAbs().maxCoeff()) : 1.0;
    VectorXd dscale(mr);
    for (int i = 0; i < mr; ++i) dscale[i] = 1.0 / std::sqrt(std::max(bred(i, i), 1e-14 * dmax));
    bred = dscale.asDiagonal() * bred * dscale.asDiagonal();
    for (int i = 0; i < mr; ++i) bred(i, i) += 1e-13;
    Eigen::LLT<MatrixXd> bchol(bred);
    Eigen::LDLT<MatrixXd> bldlt;
    bool use_ldlt = bchol.info() != Eigen::Success;
    if (use_ldlt) {
      bldlt.compute(bred);
      if (bldlt.info() != Eigen::Success) {
        failure = "Schur complement factorization failed";
        break;
      }
    }
    auto bsolve = [&](const VectorXd& rhs) -> VectorXd {
      VectorXd r = dscale.asDiagonal() * rhs;
      r = use_ldlt ? VectorXd(bldlt.solve(r)) : VectorXd(bchol.solve(r));
      return dscale.asDiagonal() * r;
    };

    std::vector<MatrixXd> sinv_rs_y(nb);
    for (int k = 0; k < nb; ++k) sinv_rs_y[k] = s_inv[k] * rs[k] * y[k];

    auto direction = [&](double sigma_mu, const std::vector<MatrixXd>* corr) {
      Direction d;
      std::vector<MatrixXd> mk(nb);
      for (int k = 0; k < nb; ++k) {
        mk[k] = sigma_mu * s_inv[k] - y[k] - sinv_rs_y[k];
        if (corr) mk[k] -= (*corr)[k];
      }
      const VectorXd rhs1 = adjoint(md, mk) - rd;
      const VectorXd rhs2 = -r_eq;
      // [B -A^T; A 0] [dx; dlam] = [rhs1; rhs2] with dx = Q1 R^-T r2 + N xi,
      // refined against the unregularized B.
      auto kkt_solve = [&](const VectorXd& r1, const VectorXd& r2, VectorXd& sx, VectorXd& sl) {
        if (q == 0) {
          sx = bsolve(r1);
          sl = VectorXd::Zero(0);
          return;
        }
        VectorXd xp = q1 * rfac.transpose().triangularView<Eigen::Lower>().solve(r2);
        VectorXd bxp = bexact * xp;
        sx = xp + nbasis * bsolve(nbasis.transpose() * (r1 - bxp));
        sl = rfac.triangularView<Eigen::Upper>().solve(q1.transpose() * (bexact * sx - r1));
      };
      kkt_solve(rhs1, rhs2, d.dx, d.dlam);
      auto kkt_residual = [&](VectorXd& e1, VectorXd& e2) {
        e1 = rhs1 - bexact * d.dx;
        if (q > 0) e1 += md.aeq.transpose() * d.dlam;
        e2 = q > 0 ? VectorXd(rhs2 - md.aeq * d.dx) : VectorXd::Zero(0);
        return e1.norm() + e2.norm();
      };
      VectorXd e1, e2;
      double res = kkt_residual(e1, e2);
      for (int ref = 0; ref < 4 && res > 1e-13 * (1.0 + rhs1.norm() + rhs2.norm()); ++ref) {
        VectorXd cx, cl;
        kkt_solve(e1, e2, cx, cl);
        if (!cx.allFinite()) break;
        Direction trial = d;
        d.dx += cx;
        if (q > 0) d.dlam += cl;
        double next = kkt_residual(e1, e2);
        if (next >= res) {
          d = trial;
          break;
        }
        res = next;
      }
      d.ds.resize(nb);
      d.dy.resize(nb);
      for (int k = 0; k < nb; ++k) {
        MatrixXd lin = apply_lin(md.blocks[k], d.dx);
        d.ds[k] = lin + rs[k];
        MatrixXd dyk = mk[k] - s_inv[k] * lin * y[k];
        d.dy[k] = 0.5 * (dyk + dyk.transpose());
      }
      return d;
    };
    auto steps = [&](const Direction& d, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(s[k], d.ds[k]));
        ad = std::min(ad, max_step(y[k], d.dy[k]));
      }
    };

    Direction pred = direction(0.0, nullptr);
    double ap, ad;
    steps(pred, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (int k = 0; k < nb; ++k)
      mu_aff += frob_dot(s[k] + ap * pred.ds[k], y[k] + ad * pred.dy[k]);
    mu_aff /= n_tot;
    double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0), 0.0, 1.0);
    if (pinf > 1e-3) sigma = std::max(sigma, 0.1);

    std::vector<MatrixXd> corr(nb);
    for (int k = 0; k < nb; ++k) corr[k] = s_inv[k] * pred.ds[k] * pred.dy[k];
    Direction d = direction(sigma * mu, &corr);
    steps(d, ap, ad);
    const double gamma = rel_gap < 1e-4 ? 0.98 : 0.95;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (!std::isfinite(ap) || !std::isfinite(ad) || !d.dx.allFinite()) {
      failure = "non-finite search direction";
      break;
    }

    x += ap * d.dx;
    for (int k = 0; k < nb; ++k) {
      s[k] += ap * d.ds[k];
      y[k] += ad * d.dy[k];
      s[k] = 0.5 * (s[k] + s[k].transpose());
      y[k] = 0.5 * (y[k] + y[k].transpose());
    }
    if (q > 0) lam += ad * d.dlam;

    stall = (ap < 1e-7 && ad < 1e-7) ? stall + 1 : 0;
    if (stall >= 3) break;
  }
  const bool terminal = sol.status == SdpStatus::infeasible || sol.status == SdpStatus::unbounded;
  if (!converged && !terminal && best.merit < std::max({pinf, dinf, rel_gap})) {
    x = best.x;
    lam = best.lam;
    s = best.s;
    y = best.y;
    pinf = best.pinf;
    dinf = best.dinf;
    rel_gap = best.rel_gap;
  }
  objectives();

  sol.iterations = iter;
  sol.x = x;
  sol.primal_objective = md.c.dot(x) + sdp.objective_constant;
  sol.dual_objective = sc * dobj + sdp.objective_constant;
  sol.primal_residual = pinf;
  sol.dual_residual = dinf;
  sol.relative_gap = rel_gap;

  sol.block_duals.resize(sdp.blocks.size());
  sol.row_duals.assign(sdp.rows.size(), 0.0);
  for (int k = 0; k < nb; ++k) {
    const Block& b = md.blocks[k];
    MatrixXd yk = sc * y[k];
    if (b.row >= 0) {
      sol.row_duals[b.row] = yk(0, 0);
    } else if (b.embedded) {
      sol.block_duals[b.source] = gram_from_embedded(yk);
    } else {
      sol.block_duals[b.source] = yk.cast<Complex>();
    }
  }
  for (int i = 0; i < q; ++i) sol.row_duals[md.eq_rows[i]] = sc * lam[i];

  if (sol.status == SdpStatus::infeasible || sol.status == SdpStatus::unbounded) return sol;
  if (converged) {
    sol.status = SdpStatus::optimal;
  } else if (rel_gap < 1e-5 && pinf < 1e-6 && dinf < 1e-6) {
    sol.status = SdpStatus::near_optimal;
  } else if (!failure.empty()) {
    throw Error(ErrorKind::NumericalFailure, failure);
  } else if (stall >= 3) {
    sol.status = SdpStatus::stalled;
  } else {
    throw Error(ErrorKind::IterationLimit,
                "no convergence in " + std::to_string(opts.max_iters) + " iterations");
  }
  return sol;
}

SolutionCheck check_solution(const SdpProblem& sdp, const SdpSolution& sol) {
  SolutionCheck chk;
  chk.min_block_eig = std::numeric_limits<double>::infinity();
  chk.min_dual_eig = std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad = Eigen::Map<const Eigen::VectorXd>(sdp.objective.data(), sdp.num_vars);
  double dual = sdp.objective_constant;
  for (size_t b = 0; b < sdp.blocks.size(); ++b) {
    Eigen::MatrixXcd val = sdp.block_value(static_cast<int>(b), sol.x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(val, Eigen::EigenvaluesOnly);
    chk.min_block_eig = std::min(chk.min_block_eig, es.eigenvalues()[0]);
    if (b >= sol.block_duals.size() || sol.block_duals[b].rows() != sdp.blocks[b].size) continue;
    const Eigen::MatrixXcd& g = sol.block_duals[b];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eg(g, Eigen::EigenvaluesOnly);
    chk.min_dual_eig = std::min(chk.min_dual_eig, eg.eigenvalues()[0]);
    for (const auto& e : sdp.blocks[b].entries) {
      Complex v = e.value;
      double pair = e.row == e.col ? (v * g(e.row, e.row)).real()
                                   : (v * g(e.col, e.row) + std::conj(v) * g(e.row, e.col)).real();
      if (e.var < 0)
        dual -= pair;
      else
        grad[e.var] -= pair;
    }
  }
  chk.max_row_violation = 0.0;
  for (size_t r = 0; r < sdp.rows.size(); ++r) {
    double v = sdp.row_value(static_cast<int>(r), sol.x);
    const SdpRow& row = sdp.rows[r];
    double viol = row.sense == RowSense::eq ? std::abs(v) : std::max(0.0, -v);
    chk.max_row_violation = std::max(chk.max_row_violation, viol);
    double mu = r < sol.row_duals.size() ? sol.row_duals[r] : 0.0;
    for (auto [j, a] : row.coeffs) grad[j] -= mu * a;
    dual -= mu * row.constant;
  }
  if (sdp.blocks.empty()) chk.min_block_eig = 0.0;
  if (!std::isfinite(chk.min_dual_eig)) chk.min_dual_eig = 0.0;
  chk.stationarity = grad.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0;
  chk.gap = sdp.objective_value(sol.x) - dual;
  return chk;
}

}  // namespace cpop
