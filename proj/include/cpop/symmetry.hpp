#pragma once

#include <vector>

#include "cpop/pop.hpp"

namespace cpop {

enum class SymmetryKind { none, balanced, even };

// balanced: every monomial has |alpha| = |beta|, so the problem is invariant
// under z -> e^{i theta} z. even: real field with even total degrees only,
// invariant under x -> -x.
struct SymmetryReport {
  SymmetryKind kind = SymmetryKind::none;

  // True when y_{alpha,beta} vanishes for every invariant measure.
  bool is_zero(const MultiIndex& alpha, const MultiIndex& beta) const;
  // Block label of a moment-matrix row.
  int group(const MultiIndex& alpha) const;
};

SymmetryReport detect_invariance(const Pop& pop);

struct MaskPartition {
  // Rows of the basis per block, in basis order.
  std::vector<std::vector<int>> blocks;
  // Pairs (row, col), row <= col, whose moment is forced to zero.
  std::vector<std::pair<int, int>> zero_pairs;
};

// Zero pattern and block partition of the order-d moment matrix on `basis`.
// Throws NotApplicable when report.kind is none.
MaskPartition zero_mask(const SymmetryReport& report, const std::vector<MultiIndex>& basis);

std::string to_string(SymmetryKind kind);

}  // namespace cpop
