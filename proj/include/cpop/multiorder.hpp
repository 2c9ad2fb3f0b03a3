#pragma once

#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "cpop/certify.hpp"
#include "cpop/error.hpp"
#include "cpop/relaxation.hpp"
#include "cpop/sdp.hpp"
#include "cpop/sparsity.hpp"

namespace cpop {

struct LoopParams {
  double eps = 0.0;  // <= 0: 1e-4 * (1 + |bound|) after the first solve
  int h = 2;
  int delta_max_min = 2;
  int max_iters = 10;

  void validate() const;
};

struct LoopRecord {
  int iteration = 0;
  double bound = 0.0;
  std::vector<int> orders;
  std::vector<int> incremented;
  double max_mismatch = 0.0;
  bool certified = false;
  std::string status;

  nlohmann::json to_json() const;
};

struct LoopState {
  std::vector<int> orders;
  // Constraints whose order was raised at some point.
  std::vector<bool> raised;
  std::vector<LoopRecord> history;
  std::vector<std::vector<int>> seen_orders;
};

struct DiracPoint {
  std::vector<Complex> z;
  bool degenerate = false;  // some clique had a vanishing top eigenvalue
  double spread = 0.0;      // disagreement between clique copies
};

// Rank-one proxy of the pseudo-moments: scaled top eigenvector of each
// clique's order-1 moment data, synchronized in phase (sign for real data).
DiracPoint closest_dirac(const MomentTable& table, const CliquePlan& plan);

// |L_y(g_i) - g_i(z)| * scale_i per constraint.
std::vector<double> mismatches(const MomentTable& table, const Pop& pop, std::span<const Complex> z);

// One order update. Returns the state unchanged when every mismatch is at
// most eps. Throws NoProgress when an order vector recurs.
LoopState update_orders(const LoopState& state, const std::vector<double>& mism,
                        const LoopParams& params, const Pop& pop);

struct GlobalOptions {
  SolverOptions solver;
  CertifyOptions certify;
  RelaxationOptions relaxation;
  // Replaces the internal solver (for example the file bridge).
  std::function<SdpSolution(const SdpProblem&)> solve;
  // Receives each history record as it is produced.
  std::function<void(const LoopRecord&)> on_record;
};

struct GlobalResult {
  double bound = 0.0;
  bool certified = false;     // certificate found
  bool eps_feasible = false;  // all mismatches <= eps at the closest Dirac point
  Certificate certificate;
  std::vector<Complex> point;
  double objective_at_point = 0.0;
  double eps = 0.0;
  LoopState state;
  CliquePlan plan;
  MomentTable table;
  SdpStatus sdp_status = SdpStatus::optimal;
};

// Carries the best result seen when the loop runs out of iterations.
class MaxItersExceeded : public Error {
 public:
  MaxItersExceeded(const std::string& what, GlobalResult best)
      : Error(ErrorKind::MaxItersExceeded, what), best_(std::move(best)) {}
  const GlobalResult& best() const { return best_; }

 private:
  GlobalResult best_;
};

// Solve, certify, and raise per-constraint orders until a certificate or an
// eps-feasible Dirac point is found. Infeasible or unbounded relaxations end
// the loop with that status. Throws MaxItersExceeded.
GlobalResult solve_global(const Pop& pop, const LoopParams& params, const GlobalOptions& opts = {});

}  // namespace cpop
