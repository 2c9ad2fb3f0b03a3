#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cpop {

struct SymEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Coefficient matrices F_i restricted to one real symmetric block. Entries
// are stored for both triangles, so F_i = sum value * e_row e_col^T.
struct BlockCoeffs {
  int size = 0;
  std::vector<int> vars;
  std::vector<std::vector<SymEntry>> mats;  // aligned with vars
};

// B_ij += sum_blocks tr(F_i S^-1 F_j Y). B must be num_vars x num_vars.
void schur_serial(const std::vector<BlockCoeffs>& blocks, const std::vector<Eigen::MatrixXd>& s_inv,
                  const std::vector<Eigen::MatrixXd>& y, Eigen::MatrixXd& b);

// Same result; OpenMP over the variables of each block.
void schur_parallel(const std::vector<BlockCoeffs>& blocks,
                    const std::vector<Eigen::MatrixXd>& s_inv,
                    const std::vector<Eigen::MatrixXd>& y, Eigen::MatrixXd& b);

}  // namespace cpop
