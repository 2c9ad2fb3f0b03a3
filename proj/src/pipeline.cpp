#include "cpop/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpop/error.hpp"
#include "cpop/relaxation.hpp"
#include "cpop/sdp_format.hpp"
#include "cpop/sparsity.hpp"
#include "cpop/symmetry.hpp"

namespace cpop {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string flow_mode_name(FlowMode m) {
  switch (m) {
    case FlowMode::automatic: return "auto";
    case FlowMode::schur: return "schur";
    case FlowMode::riesz: return "riesz";
  }
  return "auto";
}

json sdp_summary(const SdpProblem& sdp, const SdpSolution& sol) {
  std::vector<int> sizes;
  for (const auto& b : sdp.blocks) sizes.push_back(b.complex ? -b.size : b.size);
  return {{"status", to_string(sol.status)},
          {"iterations", sol.iterations},
          {"primal_objective", sol.primal_objective},
          {"dual_objective", sol.dual_objective},
          {"relative_gap", sol.relative_gap},
          {"primal_residual", sol.primal_residual},
          {"dual_residual", sol.dual_residual},
          {"num_vars", sdp.num_vars},
          {"num_rows", sdp.rows.size()},
          // negative entries are Hermitian blocks
          {"block_sizes", sizes},
          {"solver", sol.solver}};
}

json plan_json(const CliquePlan& plan) {
  json assignment = json::object();
  for (auto [i, k] : plan.assignment) assignment[std::to_string(i)] = k;
  return {{"cliques", plan.cliques},
          {"clique_orders", plan.clique_orders},
          {"orders", plan.orders},
          {"assignment", assignment}};
}

int exit_for_error(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NumericalFailure:
    case ErrorKind::IterationLimit:
    case ErrorKind::CommutationFailure:
    case ErrorKind::StitchFailure:
    case ErrorKind::IdentityResidualTooLarge:
    case ErrorKind::DegenerateClique:
    case ErrorKind::NoProgress:
      return kExitNumerical;
    default:
      return kExitInputError;
  }
}

void finish_certificate(RunResult& r, const Pop& pop, const Certificate& cert) {
  r.certificate = cert;
  r.report["certificate"] = certificate_to_json(cert);
  if (cert.certified() && cert.atoms.size() == 1) r.point = cert.atoms[0];
  if (!r.point.empty()) {
    r.report["point"] = complex_vector_json(r.point);
    r.report["objective_at_point"] = evaluate_objective(pop, r.point);
  }
}

}  // namespace

json RunConfig::to_json() const {
  json j{{"sparse", sparse},
         {"order", order},
         {"multi_order", multi_order},
         {"symmetry", symmetry ? "auto" : "off"},
         {"hypo_strengthen", hypo_strengthen},
         {"sos", sos},
         {"solver", solver},
         {"flow_mode", flow_mode_name(flow_mode)},
         {"loop",
          {{"eps", loop.eps}, {"h", loop.h}, {"delta", loop.delta_max_min}, {"max_iters", loop.max_iters}}},
         {"sdp",
          {{"tol_gap", solver_options.tol_gap},
           {"tol_feas", solver_options.tol_feas},
           {"tol_psd", solver_options.tol_psd},
           {"max_iters", solver_options.max_iters},
           {"parallel", solver_options.parallel}}},
         {"certify",
          {{"rank_tol", certify_options.rank_tol},
           {"tol_psd", certify_options.tol_psd},
           {"tol_atom", certify_options.tol_atom},
           {"feas_tol", certify_options.feas_tol},
           {"objective_rel_tol", certify_options.objective_rel_tol}}}};
  j["slack"] = slack ? json(*slack) : json(nullptr);
  return j;
}

json complex_vector_json(const std::vector<Complex>& z) {
  std::vector<double> re, im;
  for (auto v : z) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return {{"re", re}, {"im", im}};
}

std::function<SdpSolution(const SdpProblem&)> make_solver(const std::string& spec,
                                                          const SolverOptions& opts) {
  if (spec.empty() || spec == "internal")
    return [opts](const SdpProblem& sdp) { return solve_sdp(sdp, opts); };
  if (spec.rfind("file:", 0) != 0 || spec.size() == 5)
    throw Error(ErrorKind::ParseError, "unknown solver '" + spec + "' (expected internal or file:<path>)");
  const std::string path = spec.substr(5);
  return [path](const SdpProblem& sdp) {
    const std::string sol_path = path + ".sol.json";
    {
      std::ofstream out(path);
      if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path);
      out << sdp_to_json(sdp).dump() << "\n";
    }
    if (const char* cmd = std::getenv("CPOP_SOLVER_CMD"); cmd && *cmd) {
      std::filesystem::remove(sol_path);
      const std::string line = std::string(cmd) + " '" + path + "' '" + sol_path + "'";
      if (int rc = std::system(line.c_str()); rc != 0)
        throw Error(ErrorKind::NumericalFailure, "external solver exited with status " + std::to_string(rc));
    }
    std::ifstream in(sol_path);
    if (!in) throw Error(ErrorKind::ParseError, "no solution file " + sol_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, sol_path + ": " + e.what());
    }
    return solution_from_json(j, sdp);
  };
}

RunResult run_pop(const Pop& input, const RunConfig& cfg,
                  const std::function<void(const LoopRecord&)>& on_record) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  r.report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  r.report["config"] = cfg.to_json();
  r.report["history"] = json::array();
  double solve_seconds = 0.0;

  auto fail = [&](int code, const std::string& status, const std::string& message) {
    r.exit_code = code;
    r.status = status;
    r.report["status"] = status;
    r.report["error"] = message;
  };

  try {
    Pop pop = input;
    pop.validate();
    RelaxationOptions ropts;
    ropts.flow_mode = cfg.flow_mode;
    ropts.hypo_strengthen_t = cfg.hypo_strengthen;
    SymmetryReport mask;
    if (cfg.symmetry) mask = detect_invariance(pop);
    ropts.use_mask = mask.kind != SymmetryKind::none;
    r.report["symmetry"] = to_string(mask.kind);
    auto solve = make_solver(cfg.solver, cfg.solver_options);

    if (cfg.multi_order) {
      if (cfg.slack) pop = add_sphere_slack(pop, *cfg.slack);
      GlobalOptions g;
      g.solver = cfg.solver_options;
      g.certify = cfg.certify_options;
      g.relaxation = ropts;
      g.solve = solve;
      g.on_record = [&](const LoopRecord& rec) {
        r.report["history"].push_back(rec.to_json());
        if (on_record) on_record(rec);
      };
      GlobalResult res;
      bool exhausted = false;
      const auto ts = std::chrono::steady_clock::now();
      try {
        res = solve_global(pop, cfg.loop, g);
      } catch (const MaxItersExceeded& e) {
        res = e.best();
        exhausted = true;
      }
      solve_seconds = seconds_since(ts);
      r.report["plan"] = plan_json(res.plan);
      r.report["eps"] = res.eps;
      r.report["sdp_status"] = to_string(res.sdp_status);
      if (res.sdp_status == SdpStatus::infeasible || res.sdp_status == SdpStatus::unbounded) {
        fail(kExitInfeasible, to_string(res.sdp_status), "relaxation is " + to_string(res.sdp_status));
      } else {
        r.bound = res.bound;
        r.table = res.table;
        r.point = res.point;
        r.report["bound"] = r.bound;
        r.report["moments"] = r.table.to_json();
        finish_certificate(r, pop, res.certificate);
        if (res.certified) {
          r.status = "certified";
          r.exit_code = kExitCertified;
        } else if (res.eps_feasible) {
          r.status = "eps_feasible";
          r.exit_code = kExitCertified;
        } else {
          r.status = exhausted ? "max_iters" : "bound_only";
          r.exit_code = kExitBoundOnly;
        }
        r.report["status"] = r.status;
      }
    } else {
      int d = cfg.order > 0 ? cfg.order : pop.min_order();
      CliquePlan plan;
      if (cfg.sparse) {
        auto orders_for = [&](const Pop& p) {
          std::vector<int> o;
          for (const auto& c : p.constraints) o.push_back(std::max(d, std::max(1, c.half_degree())));
          return o;
        };
        if (cfg.slack) pop = add_clique_sphere_slacks(pop, sparse_plan(pop, orders_for(pop)).cliques, *cfg.slack);
        plan = sparse_plan(pop, orders_for(pop));
      } else {
        if (cfg.slack) pop = add_sphere_slack(pop, *cfg.slack);
        plan = dense_plan(pop, d);
      }
      r.report["plan"] = plan_json(plan);
      Relaxation relax = assemble(pop, plan, ropts.use_mask ? &mask : nullptr, ropts);
      const auto ts = std::chrono::steady_clock::now();
      SdpSolution sol = solve(relax.sdp);
      solve_seconds = seconds_since(ts);
      r.report["sdp"] = sdp_summary(relax.sdp, sol);
      if (sol.status == SdpStatus::infeasible || sol.status == SdpStatus::unbounded) {
        fail(kExitInfeasible, to_string(sol.status), "relaxation is " + to_string(sol.status));
      } else if (sol.status == SdpStatus::stalled) {
        fail(kExitNumerical, "numerical_failure", "solver stalled");
        r.bound = sol.primal_objective;
        r.report["bound"] = r.bound;
      } else {
        r.bound = sol.primal_objective;
        r.table = table_from_relaxation(relax, sol.x);
        r.report["bound"] = r.bound;
        r.report["moments"] = r.table.to_json();
        Certificate cert = certify(r.table, pop, r.bound, cfg.certify_options);
        if (cfg.sos) {
          try {
            cert.sos = extract_sos(relax, sol);
          } catch (const Error& e) {
            cert.diagnostics.push_back(e.what());
          }
        }
        finish_certificate(r, pop, cert);
        r.status = cert.certified() ? "certified" : "bound_only";
        r.exit_code = cert.certified() ? kExitCertified : kExitBoundOnly;
        r.report["status"] = r.status;
      }
    }
  } catch (const Error& e) {
    int code = exit_for_error(e);
    fail(code, code == kExitNumerical ? "numerical_failure" : "input_error", e.what());
  }
  r.report["exit_code"] = r.exit_code;
  r.report["timings"] = {{"solve_seconds", solve_seconds}, {"total_seconds", seconds_since(t0)}};
  return r;
}

RunResult run_certify(const MomentTable& table, const Pop& pop, std::optional<double> bound,
                      const CertifyOptions& opts) {
  RunResult r;
  r.report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  try {
    r.table = table;
    if (bound) {
      r.bound = *bound;
    } else {
      // Epigraph value: L_y(f) + sum w L_y(P)^2.
      r.bound = table.riesz(pop.objective.poly()).real();
      for (const auto& q : pop.quadratic_costs) {
        const double lp = table.riesz(q.poly.poly()).real();
        r.bound += q.weight * lp * lp;
      }
    }
    r.report["bound"] = r.bound;
    Certificate cert = certify(table, pop, r.bound, opts);
    finish_certificate(r, pop, cert);
    r.status = cert.certified() ? "certified" : "bound_only";
    r.exit_code = cert.certified() ? kExitCertified : kExitBoundOnly;
  } catch (const Error& e) {
    r.exit_code = exit_for_error(e);
    r.status = r.exit_code == kExitNumerical ? "numerical_failure" : "input_error";
    r.report["error"] = e.what();
  }
  r.report["status"] = r.status;
  r.report["exit_code"] = r.exit_code;
  return r;
}

std::string summarize(const RunResult& r) {
  std::ostringstream out;
  out.precision(10);
  out << "status: " << r.status << " (exit " << r.exit_code << ")\n";
  if (r.report.contains("error")) out << "error: " << r.report["error"].get<std::string>() << "\n";
  if (r.report.contains("bound")) out << "bound: " << r.bound << "\n";
  if (r.certificate) {
    out << "certificate: " << to_string(r.certificate->kind);
    if (r.certificate->certified()) out << " (rank " << r.certificate->rank << ", t = " << r.certificate->t << ")";
    out << "\n";
    for (size_t k = 0; k < r.certificate->atoms.size(); ++k) {
      out << "atom " << k << " (weight " << r.certificate->weights[k] << "):";
      for (auto v : r.certificate->atoms[k]) out << " " << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i";
      out << "\n";
    }
  }
  if (r.report.contains("history") && !r.report["history"].empty())
    out << "iterations: " << r.report["history"].size() << "\n";
  if (!r.point.empty() && !(r.certificate && r.certificate->certified())) {
    out << "point:";
    for (auto v : r.point) out << " " << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i";
    out << "\n";
  }
  return out.str();
}

}  // namespace cpop
