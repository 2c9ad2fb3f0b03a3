#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpop/certify.hpp"
#include "cpop/multiorder.hpp"
#include "cpop/opf.hpp"
#include "cpop/pop.hpp"
#include "cpop/sdp.hpp"

namespace cpop {

inline constexpr const char* kToolName = "cpop";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitCertified = 0,
  kExitBoundOnly = 2,
  kExitInfeasible = 3,
  kExitInputError = 4,
  kExitNumerical = 5,
};

struct RunConfig {
  bool sparse = false;
  int order = 0;  // 0: lowest admissible order
  bool multi_order = false;
  bool symmetry = false;
  int hypo_strengthen = 0;
  std::optional<double> slack;
  bool sos = false;
  std::string solver = "internal";  // internal | file:<path>
  LoopParams loop;
  SolverOptions solver_options;
  CertifyOptions certify_options;
  FlowMode flow_mode = FlowMode::automatic;

  nlohmann::json to_json() const;
};

// "internal" or "file:<path>". The file bridge writes the interchange file to
// <path>, runs $CPOP_SOLVER_CMD <path> <path>.sol.json when that variable is
// set, and reads <path>.sol.json back. Throws ParseError.
std::function<SdpSolution(const SdpProblem&)> make_solver(const std::string& spec,
                                                          const SolverOptions& opts);

struct RunResult {
  int exit_code = kExitBoundOnly;
  std::string status;
  nlohmann::json report;
  MomentTable table;
  std::optional<Certificate> certificate;
  double bound = 0.0;
  std::vector<Complex> point;
};

// One relaxation (dense, or sparse with uniform order) or the multi-order
// loop, followed by certification. Numerical failures are reported, not
// thrown. `on_record` receives multi-order history records.
RunResult run_pop(const Pop& pop, const RunConfig& cfg,
                  const std::function<void(const LoopRecord&)>& on_record = {});

// Replays a certificate decision from a moment table. Without `bound`, the
// epigraph value L_y(f) + sum w L_y(P)^2 is used.
RunResult run_certify(const MomentTable& table, const Pop& pop, std::optional<double> bound,
                      const CertifyOptions& opts);

nlohmann::json complex_vector_json(const std::vector<Complex>& z);

// Human-readable lines for standard output.
std::string summarize(const RunResult& r);

}  // namespace cpop
