#include "cpop/schur.hpp"

namespace cpop {

namespace {

// tr(F_i S^-1 F_j Y) = sum_{(p,q,a) in F_i} sum_{(r,s,c) in F_j} a c Sinv(q,r) Y(s,p)
double pair_trace(const std::vector<SymEntry>& fi, const std::vector<SymEntry>& fj,
                  const Eigen::MatrixXd& s_inv, const Eigen::MatrixXd& y) {
  double acc = 0.0;
  for (const auto& a : fi)
    for (const auto& c : fj) acc += a.value * c.value * s_inv(a.col, c.row) * y(c.col, a.row);
  return acc;
}

void block_rows(const BlockCoeffs& blk, const Eigen::MatrixXd& s_inv, const Eigen::MatrixXd& y,
                Eigen::MatrixXd& b, int u) {
  const int nv = static_cast<int>(blk.vars.size());
  for (int v = u; v < nv; ++v) {
    double t = pair_trace(blk.mats[u], blk.mats[v], s_inv, y);
    b(blk.vars[u], blk.vars[v]) += t;
    if (v != u) b(blk.vars[v], blk.vars[u]) += t;
  }
}

}  // namespace

void schur_serial(const std::vector<BlockCoeffs>& blocks, const std::vector<Eigen::MatrixXd>& s_inv,
                  const std::vector<Eigen::MatrixXd>& y, Eigen::MatrixXd& b) {
  for (size_t k = 0; k < blocks.size(); ++k)
    for (int u = 0; u < static_cast<int>(blocks[k].vars.size()); ++u)
      block_rows(blocks[k], s_inv[k], y[k], b, u);
}

void schur_parallel(const std::vector<BlockCoeffs>& blocks,
                    const std::vector<Eigen::MatrixXd>& s_inv,
                    const std::vector<Eigen::MatrixXd>& y, Eigen::MatrixXd& b) {
  // Variables are distinct within a block, so row u writes only to (u, v>=u)
  // and its mirror (v, u); the pairs touched by different u never collide.
  for (size_t k = 0; k < blocks.size(); ++k) {
    const int nv = static_cast<int>(blocks[k].vars.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int u = 0; u < nv; ++u) block_rows(blocks[k], s_inv[k], y[k], b, u);
  }
}

}  // namespace cpop
