#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpop/pop.hpp"
#include "cpop/relaxation.hpp"
#include "cpop/sdp.hpp"

namespace cpop {

// Solved pseudo-moments y_{alpha,beta}, keyed by both (alpha, beta) and
// (beta, alpha). Masked pairs are absent and read as zero.
struct MomentTable {
  int n = 0;
  Field field = Field::complex;
  int d_K = 1;
  SymmetryKind mask = SymmetryKind::none;
  std::vector<std::vector<int>> cliques;
  std::vector<int> orders;  // per clique
  std::map<TermKey, Complex> values;

  bool has(const MultiIndex& alpha, const MultiIndex& beta) const;
  // Throws UnindexedMoment.
  Complex at(const MultiIndex& alpha, const MultiIndex& beta) const;
  Complex riesz(const Polynomial& p) const;
  std::vector<MultiIndex> basis(int clique, int t) const;
  // Rows alpha, columns beta, entry y_{alpha,beta}.
  Eigen::MatrixXcd moment_matrix(int clique, int t) const;
  Eigen::MatrixXcd grid(const std::vector<Polynomial>& polys, int size) const;
  // Index of the clique covering every variable, or -1.
  int full_clique() const;

  nlohmann::json to_json() const;
  static MomentTable from_json(const nlohmann::json& j);
};

MomentTable table_from_relaxation(const Relaxation& relax, const Eigen::VectorXd& x);

// SDP variable vector carrying the moments of `table`; inverse of
// table_from_relaxation. Auxiliary (epigraph) variables are left at zero.
// Throws UnindexedMoment when the table lacks a moment the relaxation uses.
Eigen::VectorXd moment_vector(const Relaxation& relax, const MomentTable& table);

// Moments of sum_j w_j delta_{z_j} up to the given per-clique orders.
MomentTable table_from_atoms(int n, const std::vector<std::vector<Complex>>& atoms,
                             const std::vector<double>& weights,
                             const std::vector<std::vector<int>>& cliques,
                             const std::vector<int>& orders, int d_K,
                             Field field = Field::complex);

// Count of singular values above tau * sigma_max.
int numeric_rank(const Eigen::MatrixXcd& m, double tau = 1e-5);

struct CertifyOptions {
  double rank_tol = 1e-5;
  double tol_psd = 1e-7;
  double tol_atom = 1e-6;
  double tol_commute = 1e-6;  // relative to max |T_k|
  double feas_tol = 1e-5;     // on g_i(z) * scale_i
  double objective_rel_tol = 5e-4;
  unsigned seed = 20170318u;
};

enum class Shortcut { none, toeplitz, hankel };

// Toeplitz when |z_k|^2 = 1 for every k is among the equality constraints,
// Hankel for real-field problems or when i z_k - i conj(z_k) = 0 for every k.
Shortcut detect_shortcut(const Pop& pop);

struct OrderVerdict {
  int clique = 0;
  int t = 0;
  int rank_t = -1;    // rank M_t, -1 when t exceeds the table order
  int rank_low = -1;  // rank M_{t-d_K}
  bool rank_one = false;
  bool flat = false;
  bool hypo_checked = false;
  double hypo_min_eig = 0.0;
  bool hypo_ok = false;
  bool waived = false;
  bool certified = false;
};

// Smallest eigenvalue over the joint hyponormality blocks at t (univariate
// 2x2 form when n = 1). Throws InsufficientOrder when t < d_K.
double hyponormality_min_eig(const MomentTable& table, int t, int clique = 0);

std::vector<OrderVerdict> check_certificate_conditions(const MomentTable& table, const Pop& pop,
                                                       const CertifyOptions& opts = {});

enum class CertificateKind { rank_one, flat_hyponormal, toeplitz, hankel, torus_orbit, none };
std::string to_string(CertificateKind k);

struct SosBlock {
  std::string label;
  BlockKind kind = BlockKind::moment;
  int clique = -1;
  int constraint = -1;
  Eigen::MatrixXcd gram;
  std::vector<MultiIndex> basis;
  Polynomial poly;  // sum_rc G_cr P_rc
};

struct SosCertificate {
  double lambda = 0.0;
  std::vector<SosBlock> blocks;
  std::vector<std::pair<int, double>> row_multipliers;  // (constraint, mu); -1 = normalization
  double residual = 0.0;
};

struct Certificate {
  CertificateKind kind = CertificateKind::none;
  int rank = 0;
  int t = 0;
  std::vector<std::vector<Complex>> atoms;
  std::vector<double> weights;
  double bound = 0.0;
  double objective_at_atoms = 0.0;
  double max_violation = 0.0;
  std::vector<OrderVerdict> verdicts;
  std::optional<SosCertificate> sos;
  std::vector<std::string> diagnostics;

  bool certified() const { return kind != CertificateKind::none; }
};

// Atoms at order t of one clique via shift operators. Throws
// CommutationFailure.
Certificate extract_atoms(const MomentTable& table, const Pop& pop, int clique, int t,
                          const CertifyOptions& opts = {});

// Full decision: rank-one, flat extension (+ hyponormality unless waived),
// torus orbit for balanced data; atoms checked for feasibility and objective
// match against `bound`.
Certificate certify(const MomentTable& table, const Pop& pop, double bound,
                    const CertifyOptions& opts = {});

// Hermitian SOS decomposition read off the dual blocks. Throws
// IdentityResidualTooLarge when the identity residual exceeds
// cert_tol * max(1, max |f coefficient|).
SosCertificate extract_sos(const Relaxation& relax, const SdpSolution& sol,
                           double cert_tol = 1e-6);

// Phase (complex) or sign (real) synchronisation of per-clique vectors along
// a maximum-overlap spanning tree, then per-coordinate averaging. Each
// entry of `vectors` is indexed like the matching clique. Returns the
// largest disagreement on overlaps in `spread` when given.
std::vector<Complex> synchronize(int n, const std::vector<std::vector<int>>& cliques,
                                 const std::vector<std::vector<Complex>>& vectors, bool real,
                                 double* spread = nullptr);

nlohmann::json certificate_to_json(const Certificate& c);

}  // namespace cpop
