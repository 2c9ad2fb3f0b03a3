#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpop/error.hpp"
#include "cpop/opf.hpp"
#include "cpop/pipeline.hpp"
#include "cpop/sdp_format.hpp"
#include "cpop/sparsity.hpp"

using namespace cpop;
using nlohmann::json;

namespace {

struct Outputs {
  std::string report;
  std::string history;
  std::string moments;
  bool json_stdout = false;
};

void add_solve_flags(CLI::App* cmd, RunConfig& cfg, std::string& symmetry, std::string& flow,
                     bool& serial, Outputs& out) {
  cmd->add_flag("--sparse", cfg.sparse, "Correlative/monomial sparsity with chordal cliques");
  cmd->add_option("--order", cfg.order, "Relaxation order (default: lowest admissible)")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--multi-order", cfg.multi_order, "Mismatch-driven per-constraint orders");
  cmd->add_option("--symmetry", symmetry, "Zero-mask from detected invariance")
      ->check(CLI::IsMember({"auto", "off"}));
  cmd->add_option("--hypo-strengthen", cfg.hypo_strengthen, "Impose the joint hyponormality block at t")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--solver", cfg.solver, "internal | file:<path> (default $CPOP_SOLVER or internal)");
  cmd->add_option("--slack", cfg.slack, "Add a sphere slack of radius R");
  cmd->add_flag("--sos", cfg.sos, "Extract the Hermitian SOS certificate from the duals");
  cmd->add_option("--flow-mode", flow, "Order-1 flow limits: auto | schur | riesz")
      ->check(CLI::IsMember({"auto", "schur", "riesz"}));
  cmd->add_option("--eps", cfg.loop.eps, "Mismatch tolerance (0: 1e-4 (1 + |bound|))");
  cmd->add_option("--h", cfg.loop.h, "Constraints raised per iteration");
  cmd->add_option("--delta", cfg.loop.delta_max_min, "Largest allowed order spread");
  cmd->add_option("--max-iters", cfg.loop.max_iters, "Multi-order iteration limit");
  cmd->add_option("--sdp-max-iters", cfg.solver_options.max_iters, "Interior-point iteration limit");
  cmd->add_flag("--serial", serial, "Serial Schur-complement assembly");
  cmd->add_option("--report", out.report, "Write the JSON report to this file");
  cmd->add_option("--history", out.history, "Stream multi-order records as JSON lines");
  cmd->add_option("--moments", out.moments, "Write the solved moment table");
  cmd->add_flag("--json", out.json_stdout, "Print the JSON report instead of the summary");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, "cannot write " + path);
  f << text;
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, "cannot open " + path);
  try {
    json j;
    f >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

int emit(const RunResult& r, const Outputs& out) {
  if (!out.report.empty()) write_file(out.report, r.report.dump(2) + "\n");
  if (!out.moments.empty() && r.report.contains("moments"))
    write_file(out.moments, r.report["moments"].dump(2) + "\n");
  if (out.json_stdout)
    std::cout << r.report.dump(2) << "\n";
  else
    std::cout << summarize(r);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex moment-SOS hierarchy for polynomial optimization"};
  app.require_subcommand(1);
  // -h is taken by --h (constraints raised per iteration).
  app.set_help_flag("--help", "Print this help message and exit");

  RunConfig cfg;
  if (const char* s = std::getenv("CPOP_SOLVER"); s && *s) cfg.solver = s;
  std::string symmetry = "off", flow = "auto";
  bool serial = false;
  Outputs out;
  std::string input;

  auto* solve = app.add_subcommand("solve", "Solve a problem given as JSON");
  solve->add_option("problem", input, "Problem JSON")->required();
  add_solve_flags(solve, cfg, symmetry, flow, serial, out);

  PreprocessOptions pre;
  bool no_epigraph = false;
  std::string emit_pop;
  auto* opf = app.add_subcommand("opf", "Optimal power flow from a MATPOWER-style case file");
  opf->add_option("case", input, "Case file")->required();
  add_solve_flags(opf, cfg, symmetry, flow, serial, out);
  opf->add_option("--min-r", pre.min_r, "Clamp branch resistance from below (p.u.)");
  opf->add_option("--merge-impedance", pre.merge_impedance, "Merge buses joined by |r + ix| below this (p.u.)");
  opf->add_flag("--loss", pre.loss_objective, "Minimize active losses");
  opf->add_flag("--no-epigraph", no_epigraph, "Quadratic costs as a degree-(2,2) objective");
  opf->add_option("--emit-pop", emit_pop, "Write the problem JSON and exit");
  // Power rows are scaled to MVA, so the generic default would mean 1e-7 p.u.
  double opf_feas_tol = 1e-3;
  opf->add_option("--feas-tol", opf_feas_tol, "Atom feasibility tolerance (MVA; p.u.^2 for voltages)");
  solve->add_option("--feas-tol", cfg.certify_options.feas_tol, "Atom feasibility tolerance");

  int analyze_order = 0;
  auto* analyze = app.add_subcommand("analyze", "Sparsity graph and clique report");
  analyze->add_option("problem", input, "Problem JSON")->required();
  analyze->add_option("--order", analyze_order, "Uniform relaxation order");

  std::string moments_path;
  std::optional<double> bound;
  CertifyOptions copts;
  auto* certify_cmd = app.add_subcommand("certify", "Certify a solved moment table");
  certify_cmd->add_option("moments", moments_path, "Moment table or run report")->required();
  certify_cmd->add_option("problem", input, "Problem JSON")->required();
  certify_cmd->add_option("--bound", bound, "Relaxation bound (default: from the report or L_y(f))");
  certify_cmd->add_option("--rank-tol", copts.rank_tol, "Relative singular value threshold");
  certify_cmd->add_option("--report", out.report, "Write the JSON report to this file");
  certify_cmd->add_flag("--json", out.json_stdout, "Print the JSON report instead of the summary");

  std::string sdp_in, sdp_out;
  auto* sdp_cmd = app.add_subcommand("sdp-solve", "Solve an SDP interchange file with the internal solver");
  sdp_cmd->add_option("problem", sdp_in, "Interchange file")->required();
  sdp_cmd->add_option("solution", sdp_out, "Solution file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInputError;
  }

  cfg.symmetry = symmetry == "auto";
  cfg.flow_mode = flow == "schur" ? FlowMode::schur : flow == "riesz" ? FlowMode::riesz : FlowMode::automatic;
  cfg.solver_options.parallel = !serial;

  try {
    if (*sdp_cmd) {
      SdpProblem sdp = sdp_from_json(read_json(sdp_in));
      SdpSolution sol = solve_sdp(sdp, cfg.solver_options);
      write_file(sdp_out, solution_to_json(sol).dump() + "\n");
      return 0;
    }
    if (*analyze) {
      Pop pop = load_pop(input);
      std::vector<int> orders;
      for (const auto& c : pop.constraints) orders.push_back(std::max({analyze_order, 1, c.half_degree()}));
      std::set<int> high;
      for (size_t i = 0; i < orders.size(); ++i)
        if (orders[i] > pop.constraints[i].half_degree()) high.insert(static_cast<int>(i));
      CliquePlan plan = sparse_plan(pop, orders);
      std::cout << analyze_json(build_graphs(pop, high), plan).dump(2) << "\n";
      return 0;
    }
    if (*certify_cmd) {
      Pop pop = load_pop(input);
      json mj = read_json(moments_path);
      if (mj.contains("moments") && mj["moments"].is_object()) {  // a run report
        if (!bound && mj.contains("bound")) bound = mj["bound"].get<double>();
        mj = mj["moments"];
      }
      RunResult r = run_certify(MomentTable::from_json(mj), pop, bound, copts);
      return emit(r, out);
    }

    Pop pop;
    if (*opf) {
      cfg.certify_options.feas_tol = opf_feas_tol;
      NetworkCase c = preprocess(load_case(input), pre);
      OpfOptions oo;
      oo.epigraph = !no_epigraph;
      pop = build_opf_pop(c, oo);
      if (!emit_pop.empty()) {
        write_file(emit_pop, pop_to_json(pop).dump(2) + "\n");
        return 0;
      }
    } else {
      pop = load_pop(input);
    }

    std::ofstream history;
    if (!out.history.empty()) {
      history.open(out.history);
      if (!history) throw Error(ErrorKind::ParseError, "cannot write " + out.history);
    }
    RunResult r = run_pop(pop, cfg, [&](const LoopRecord& rec) {
      if (history) history << rec.to_json().dump() << "\n" << std::flush;
    });
    r.report["config"]["command"] = *opf ? "opf" : "solve";
    r.report["config"]["input"] = input;
    if (*opf)
      r.report["config"]["preprocess"] = {{"min_r", pre.min_r},
                                          {"merge_impedance", pre.merge_impedance},
                                          {"loss", pre.loss_objective},
                                          {"epigraph", !no_epigraph}};
    return emit(r, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::NumericalFailure ? kExitNumerical : kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}
