#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cpop/polynomial.hpp"

namespace cpop {

// Coefficient of one variable (or the constant, var < 0) at one upper-triangle
// position of a block. For complex blocks the mirrored entry is the conjugate.
struct SdpEntry {
  int row = 0;
  int col = 0;
  int var = -1;
  Complex value;
};

struct SdpBlock {
  int size = 0;
  bool complex = false;
  std::vector<SdpEntry> entries;
  std::string label;
};

enum class RowSense { ge, eq };

// sum_j coeffs_j x_j + constant  (>= 0 or = 0).
struct SdpRow {
  std::vector<std::pair<int, double>> coeffs;
  double constant = 0.0;
  RowSense sense = RowSense::ge;
  std::string label;
};

// minimize objective . x + objective_constant
// subject to every block B(x) >= 0 (PSD) and every row.
struct SdpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<SdpBlock> blocks;
  std::vector<SdpRow> rows;
  std::vector<std::string> var_names;

  bool all_real() const;
  Eigen::MatrixXcd block_value(int b, const Eigen::VectorXd& x) const;
  double row_value(int r, const Eigen::VectorXd& x) const;
  double objective_value(const Eigen::VectorXd& x) const;
};

// Replaces each complex block H of size s by [[Re H, -Im H], [Im H, Re H]]
// of size 2s. Real blocks, rows, variables and objective are unchanged, so a
// solution x maps back as is.
SdpProblem hermitian_to_real(const SdpProblem& sdp);

// Real symmetric matrix [[Re H, -Im H], [Im H, Re H]].
Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h);

// Hermitian G with Re tr(H G) = <embed(H), Y> for every Hermitian H, built
// from a dual block Y of the embedded problem. PSD whenever Y is.
Eigen::MatrixXcd gram_from_embedded(const Eigen::MatrixXd& y);

}  // namespace cpop
