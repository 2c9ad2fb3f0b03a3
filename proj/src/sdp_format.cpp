#include "cpop/sdp_format.hpp"

#include "cpop/error.hpp"

namespace cpop {

using nlohmann::json;

json sdp_to_json(const SdpProblem& sdp) {
  json j;
  j["format"] = "cpop-sdp";
  j["version"] = 1;
  j["num_vars"] = sdp.num_vars;
  j["objective"] = sdp.objective;
  j["objective_constant"] = sdp.objective_constant;
  j["var_names"] = sdp.var_names;
  json blocks = json::array();
  for (const auto& b : sdp.blocks) {
    json entries = json::array();
    for (const auto& e : b.entries)
      entries.push_back({e.row, e.col, e.var, e.value.real(), e.value.imag()});
    blocks.push_back({{"size", b.size}, {"complex", b.complex}, {"label", b.label},
                      {"entries", entries}});
  }
  j["blocks"] = blocks;
  json rows = json::array();
  for (const auto& r : sdp.rows) {
    json coeffs = json::array();
    for (auto [v, a] : r.coeffs) coeffs.push_back({v, a});
    rows.push_back({{"sense", r.sense == RowSense::eq ? "eq" : "ge"},
                    {"constant", r.constant},
                    {"coeffs", coeffs},
                    {"label", r.label}});
  }
  j["rows"] = rows;
  return j;
}

SdpProblem sdp_from_json(const json& j) {
  try {
    SdpProblem sdp;
    sdp.num_vars = j.at("num_vars").get<int>();
    sdp.objective = j.at("objective").get<std::vector<double>>();
    sdp.objective_constant = j.value("objective_constant", 0.0);
    if (j.contains("var_names")) sdp.var_names = j["var_names"].get<std::vector<std::string>>();
    if (static_cast<int>(sdp.objective.size()) != sdp.num_vars)
      throw Error(ErrorKind::ParseError, "objective length != num_vars");
    for (const auto& jb : j.at("blocks")) {
      SdpBlock b;
      b.size = jb.at("size").get<int>();
      b.complex = jb.value("complex", false);
      b.label = jb.value("label", "");
      for (const auto& je : jb.at("entries")) {
        SdpEntry e;
        e.row = je.at(0).get<int>();
        e.col = je.at(1).get<int>();
        e.var = je.at(2).get<int>();
        e.value = Complex(je.at(3).get<double>(), je.size() > 4 ? je.at(4).get<double>() : 0.0);
        if (e.row < 0 || e.col < e.row || e.col >= b.size || e.var >= sdp.num_vars)
          throw Error(ErrorKind::ParseError, "block entry out of range");
        b.entries.push_back(e);
      }
      sdp.blocks.push_back(std::move(b));
    }
    for (const auto& jr : j.at("rows")) {
      SdpRow r;
      std::string sense = jr.at("sense").get<std::string>();
      if (sense != "eq" && sense != "ge") throw Error(ErrorKind::ParseError, "row sense " + sense);
      r.sense = sense == "eq" ? RowSense::eq : RowSense::ge;
      r.constant = jr.value("constant", 0.0);
      r.label = jr.value("label", "");
      for (const auto& jc : jr.at("coeffs")) {
        int v = jc.at(0).get<int>();
        if (v < 0 || v >= sdp.num_vars) throw Error(ErrorKind::ParseError, "row variable index");
        r.coeffs.emplace_back(v, jc.at(1).get<double>());
      }
      sdp.rows.push_back(std::move(r));
    }
    return sdp;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

SdpStatus status_from_string(const std::string& s) {
  for (SdpStatus st : {SdpStatus::optimal, SdpStatus::near_optimal, SdpStatus::infeasible,
                       SdpStatus::unbounded, SdpStatus::stalled})
    if (to_string(st) == s) return st;
  throw Error(ErrorKind::ParseError, "unknown status " + s);
}

json solution_to_json(const SdpSolution& sol) {
  json j;
  j["status"] = to_string(sol.status);
  j["x"] = std::vector<double>(sol.x.data(), sol.x.data() + sol.x.size());
  j["primal_objective"] = sol.primal_objective;
  j["dual_objective"] = sol.dual_objective;
  j["row_duals"] = sol.row_duals;
  j["iterations"] = sol.iterations;
  j["solver"] = sol.solver;
  json duals = json::array();
  for (const auto& g : sol.block_duals) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      json rr = json::array(), ir = json::array();
      for (Eigen::Index c = 0; c < g.cols(); ++c) {
        rr.push_back(g(r, c).real());
        ir.push_back(g(r, c).imag());
      }
      re.push_back(rr);
      im.push_back(ir);
    }
    duals.push_back({{"re", re}, {"im", im}});
  }
  j["block_duals"] = duals;
  return j;
}

SdpSolution solution_from_json(const json& j, const SdpProblem& sdp) {
  try {
    SdpSolution sol;
    sol.status = status_from_string(j.at("status").get<std::string>());
    auto x = j.at("x").get<std::vector<double>>();
    if (static_cast<int>(x.size()) != sdp.num_vars)
      throw Error(ErrorKind::ParseError, "x has wrong length");
    sol.x = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    sol.primal_objective = j.value("primal_objective", sdp.objective_value(sol.x));
    sol.dual_objective = j.value("dual_objective", sol.primal_objective);
    sol.iterations = j.value("iterations", 0);
    sol.solver = j.value("solver", "file");
    sol.row_duals = j.value("row_duals", std::vector<double>(sdp.rows.size(), 0.0));
    if (sol.row_duals.size() != sdp.rows.size())
      throw Error(ErrorKind::ParseError, "row_duals has wrong length");
    if (j.contains("block_duals")) {
      const auto& jd = j["block_duals"];
      if (jd.size() != sdp.blocks.size())
        throw Error(ErrorKind::ParseError, "block_duals has wrong length");
      for (size_t b = 0; b < jd.size(); ++b) {
        const int s = sdp.blocks[b].size;
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(s, s);
        const auto& re = jd[b].at("re");
        if (static_cast<int>(re.size()) != s)
          throw Error(ErrorKind::ParseError, "block dual has wrong size");
        for (int r = 0; r < s; ++r)
          for (int c = 0; c < s; ++c) {
            double im = jd[b].contains("im") ? jd[b]["im"].at(r).at(c).get<double>() : 0.0;
            g(r, c) = Complex(re.at(r).at(c).get<double>(), im);
          }
        sol.block_duals.push_back(std::move(g));
      }
    } else {
      for (const auto& b : sdp.blocks) sol.block_duals.push_back(Eigen::MatrixXcd::Zero(b.size, b.size));
    }
    return sol;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

}  // namespace cpop
