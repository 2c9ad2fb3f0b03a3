#pragma once

#include <map>
#include <string>
#include <vector>

#include "cpop/pop.hpp"
#include "cpop/sdp_problem.hpp"
#include "cpop/sparsity.hpp"
#include "cpop/symmetry.hpp"

namespace cpop {

// Per-clique monomial bases; sizes are C(|C_k| + d_k, d_k).
using MomentBasis = std::vector<std::vector<MultiIndex>>;

MomentBasis moment_basis(int n, const std::vector<int>& orders,
                         const std::vector<std::vector<int>>& cliques);
MomentBasis moment_basis(int n, int d);

// Complex affine combination of SDP variables.
struct AffineExpr {
  Complex constant = 0.0;
  std::vector<std::pair<int, Complex>> terms;

  bool is_zero(double tol = 0.0) const;
  Complex evaluate(const Eigen::VectorXd& x) const;
};

// Bijection between pseudo-moments y_{alpha,beta} and real SDP variables.
// Complex field: one variable for y_{a,a}, a (re, im) pair for each
// unordered a != b. Real field: one variable per alpha + beta. Masked
// moments have no variable and evaluate to zero.
class MomentIndex {
 public:
  MomentIndex() = default;
  MomentIndex(int n, Field field, SymmetryReport mask) : n_(n), field_(field), mask_(mask) {}

  int num_vars() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  Field field() const { return field_; }
  const SymmetryReport& mask() const { return mask_; }

  // Creates the variables backing y_{alpha,beta} if needed.
  void ensure(const MultiIndex& alpha, const MultiIndex& beta);
  // Non-moment variable (epigraph).
  int add_aux(const std::string& name);

  bool has(const MultiIndex& alpha, const MultiIndex& beta) const;
  // Throws UnindexedMoment.
  AffineExpr moment(const MultiIndex& alpha, const MultiIndex& beta) const;
  // L_y(p) = sum p_{a,b} y_{a,b}.
  AffineExpr riesz(const Polynomial& p) const;

  nlohmann::json to_json() const;

 private:
  struct Slots {
    int re = -1;
    int im = -1;
  };
  int n_ = 0;
  Field field_ = Field::complex;
  SymmetryReport mask_;
  std::map<TermKey, Slots> complex_slots_;
  std::map<MultiIndex, int> real_slots_;
  std::vector<std::string> names_;
};

enum class BlockKind { moment, localizing, hyponormal, flow, epigraph };

// Where an SDP block comes from. entry_polys holds, row-major, the polynomial
// P_rc with block(r, c) = L_y(P_rc) (+ aux for epigraph blocks).
struct BlockOrigin {
  BlockKind kind = BlockKind::moment;
  int clique = -1;
  int constraint = -1;
  int order = 0;
  // For moment blocks: monomial z^alpha of each row.
  std::vector<MultiIndex> row_monomials;
  std::vector<Polynomial> entry_polys;
  int size = 0;

  const Polynomial& entry(int r, int c) const { return entry_polys[r * size + c]; }
};

// row(x) = L_y(poly) + offset.
struct RowOrigin {
  int constraint = -1;
  Polynomial poly;
  double offset = 0.0;
  std::string kind;
};

enum class FlowMode { automatic, schur, riesz };

struct RelaxationOptions {
  bool use_mask = false;
  FlowMode flow_mode = FlowMode::automatic;
  // Impose the joint hyponormality block at this t (0 = off). Dense plans only.
  int hypo_strengthen_t = 0;
};

struct Relaxation {
  Pop pop;
  CliquePlan plan;
  SymmetryReport mask;
  RelaxationOptions options;
  MomentBasis bases;
  MomentIndex index;
  SdpProblem sdp;
  std::vector<BlockOrigin> block_origins;
  std::vector<RowOrigin> row_origins;
  int y00_var = -1;
  int d_K = 1;
};

// d_K = max{2, k_i} for n > 1 and max{1, k_i} for n = 1.
int compute_dK(const Pop& pop);

// Moment relaxation as an SDP with Hermitian (complex field) or real blocks.
// Throws OrderTooLow, UnindexedMoment, InsufficientOrder.
Relaxation assemble(const Pop& pop, const CliquePlan& plan, const SymmetryReport* mask,
                    const RelaxationOptions& options = {});

// Appends the variable z_{n+1} and the sphere |z_1|^2 + ... + |z_{n+1}|^2 = R^2.
Pop add_sphere_slack(const Pop& pop, double radius);

// One slack per clique: |z_C|^2 + |s_k|^2 = R^2 over each clique's variables.
Pop add_clique_sphere_slacks(const Pop& pop, const std::vector<std::vector<int>>& cliques,
                             double radius);

// Row-major polynomial grid of the localizing matrix of h on `basis`.
std::vector<Polynomial> localizing_polys(const std::vector<MultiIndex>& basis,
                                         const Polynomial& h);

// Row-major polynomial grid of the joint hyponormality matrix for the pair
// (i, j) on `basis`; j < 0 gives the univariate 2x2 block form.
std::vector<Polynomial> hyponormal_polys(int n, const std::vector<MultiIndex>& basis, int i,
                                         int j);

// Folds the quadratic cost terms into the objective (native degree-(2,2)
// objective instead of epigraph variables).
Pop expand_quadratic_costs(const Pop& pop);

// Copy of p in n_new >= p.num_vars() variables.
Polynomial extend_vars(const Polynomial& p, int n_new);

}  // namespace cpop
