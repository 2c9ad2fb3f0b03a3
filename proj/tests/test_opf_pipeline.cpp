#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "cpop/error.hpp"
#include "cpop/opf.hpp"
#include "cpop/pipeline.hpp"
#include "test_util.hpp"

using namespace cpop;
using namespace cpop::testing;

namespace {

const std::vector<Complex> kWb5Point{{1.0467, 0.0}, {0.9550, -0.0578}, {0.9485, -0.0533},
                                     {0.7791, 0.6011}, {0.7362, 0.7487}};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ParseError;
}

nlohmann::json without_timings(nlohmann::json j) {
  j.erase("timings");
  return j;
}

}  // namespace

TEST_CASE("case files parse") {
  NetworkCase c = load_case(kData + "/wb5.m");
  CHECK(c.base_mva == 100.0);
  CHECK(c.buses.size() == 5);
  CHECK(c.gens.size() == 2);
  CHECK(c.branches.size() == 6);
  NetworkCase two = load_case(kData + "/wb2.m");
  CHECK(std::isinf(two.gens[0].pmax));
  CHECK(two.buses[1].vmax == doctest::Approx(1.022));
  CHECK(two.buses[1].pd == doctest::Approx(3.5));  // per-unit
}

TEST_CASE("malformed case files are rejected") {
  CHECK(kind_of([] { parse_case("mpc.baseMVA = 100;\n"); }) == ErrorKind::MissingSection);
  std::string bad = "mpc.baseMVA = 100;\nmpc.bus = [\n 1 3 x 0 0 0 1 1 0 345 1 1.05 0.95;\n];\n";
  try {
    parse_case(bad);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(kind_of([] { load_case("/nonexistent/case.m"); }) == ErrorKind::ParseError);
}

TEST_CASE("admittance matrix of a lossless-shunt-free network annihilates flat voltages") {
  NetworkCase c = load_case(kData + "/wb5.m");
  for (auto& br : c.branches) br.b = 0.0;
  auto y = admittance_matrix(c);
  for (size_t i = 0; i < y.size(); ++i) {
    Complex row = 0.0;
    for (size_t j = 0; j < y.size(); ++j) {
      row += y[i][j];
      CHECK(std::abs(y[i][j] - y[j][i]) < 1e-12);
    }
    CHECK(std::abs(row) < 1e-12);
  }
}

TEST_CASE("total active injection equals series losses") {
  NetworkCase c = load_case(kData + "/wb5.m");
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Complex> z(5);
    for (auto& v : z) v = std::polar(1.0 + u(rng) / 2, u(rng));
    auto s = power_injections(c, z);
    double total = 0.0;
    for (auto v : s) total += v.real();
    CHECK(total >= -1e-12);
  }
}

TEST_CASE("OPF problem layout and the reference WB5 point") {
  NetworkCase c = load_case(kData + "/wb5.m");
  Pop p = build_opf_pop(c);
  CHECK(p.n == 5);
  REQUIRE(p.constraints.size() == 20);
  CHECK(p.constraints[0].label == "P1");
  CHECK(p.constraints[1].label == "Q1");
  CHECK(p.constraints[10].label == "Vmin1");
  CHECK(p.constraints[11].label == "Vmax1");
  CHECK(p.constraints[0].scale == 100.0);
  CHECK(p.constraints[10].scale == 1.0);
  // The reference voltages are rounded to four digits.
  CHECK(evaluate_objective(p, kWb5Point) == doctest::Approx(946.6).epsilon(2e-3));
  for (const auto& con : p.constraints) CHECK(constraint_violation(con, kWb5Point) * con.scale < 2.0);

  // Bus 2 has no generator: g_P2(z) = P_2(z) + Pd_2.
  auto s = power_injections(c, kWb5Point);
  CHECK(p.constraints[2].poly.evaluate(kWb5Point) ==
        doctest::Approx(s[1].real() + c.buses[1].pd).epsilon(1e-9));
}

TEST_CASE("disconnected networks are rejected") {
  NetworkCase c = load_case(kData + "/wb5.m");
  c.branches.resize(2);  // buses 4 and 5 now isolated
  CHECK(kind_of([&] { build_opf_pop(c); }) == ErrorKind::DisconnectedNetwork);
}

TEST_CASE("preprocessing clamps resistance and merges short lines") {
  NetworkCase c = load_case(kData + "/wb5.m");
  PreprocessOptions o;
  o.min_r = 0.3;
  NetworkCase clamped = preprocess(c, o);
  for (const auto& br : clamped.branches) CHECK(br.r >= 0.3);
  PreprocessOptions m;
  m.merge_impedance = 0.12;  // the 1-2 line has |z| ~ 0.098
  NetworkCase merged = preprocess(c, m);
  CHECK(merged.buses.size() < c.buses.size());
  CHECK_NOTHROW(build_opf_pop(merged));
  PreprocessOptions l;
  l.loss_objective = true;
  CHECK(preprocess(c, l).loss_objective);
}

TEST_CASE("pipeline certifies the torus problem") {
  RunResult r = run_pop(load_pop(kData + "/ex32.json"), RunConfig{});
  CHECK(r.exit_code == kExitCertified);
  CHECK(r.status == "certified");
  CHECK(r.bound == doctest::Approx(-2.0).epsilon(1e-6));
  REQUIRE(r.point.size() == 1);
  CHECK(std::abs(r.point[0] + 1.0) < 1e-6);
  for (const char* key : {"tool", "config", "plan", "sdp", "bound", "moments", "certificate", "point",
                          "status", "exit_code", "timings"})
    CHECK_MESSAGE(r.report.contains(key), key);
  CHECK(summarize(r).find("status: certified") != std::string::npos);
}

TEST_CASE("reports are deterministic apart from timings") {
  Pop p = load_pop(kData + "/ex51.json");
  RunConfig cfg;
  cfg.order = 3;
  CHECK(without_timings(run_pop(p, cfg).report) == without_timings(run_pop(p, cfg).report));
}

TEST_CASE("certificates replay from a moment table") {
  Pop p = load_pop(kData + "/ex51.json");
  RunConfig cfg;
  cfg.order = 3;
  RunResult r = run_pop(p, cfg);
  REQUIRE(r.certificate);
  MomentTable t = MomentTable::from_json(r.report["moments"]);
  RunResult c = run_certify(t, p, r.bound, cfg.certify_options);
  CHECK(c.exit_code == r.exit_code);
  REQUIRE(c.certificate);
  CHECK(c.certificate->kind == r.certificate->kind);
  RunResult d = run_certify(t, p, std::nullopt, cfg.certify_options);
  CHECK(d.bound == doctest::Approx(r.bound).epsilon(1e-6));
}

TEST_CASE("exit codes") {
  SUBCASE("infeasible") {
    Pop p;
    p.n = 1;
    p.objective = HermitianPoly::from_polynomial(Polynomial::variable(1, 0) * Polynomial::conj_variable(1, 0));
    Polynomial zz = Polynomial::variable(1, 0) * Polynomial::conj_variable(1, 0);
    p.constraints = {constraint(unit_ball(1)), constraint(zz - Polynomial::constant(1, 2.0))};
    CHECK(run_pop(p, RunConfig{}).exit_code == kExitInfeasible);
  }
  SUBCASE("input error") {
    RunConfig cfg;
    cfg.order = 1;  // below the constraint degree
    RunResult r = run_pop(load_pop(kData + "/ex51.json"), cfg);
    CHECK(r.exit_code == kExitInputError);
    CHECK(r.report.contains("error"));
  }
  SUBCASE("bound only") {
    RunConfig cfg;
    cfg.order = 2;
    CHECK(run_pop(load_pop(kData + "/ex51.json"), cfg).exit_code == kExitBoundOnly);
  }
  SUBCASE("unknown solver") {
    RunConfig cfg;
    cfg.solver = "mosek";
    CHECK(run_pop(load_pop(kData + "/ex32.json"), cfg).exit_code == kExitInputError);
  }
}

TEST_CASE("multi-order runs record their history") {
  RunConfig cfg;
  cfg.multi_order = true;
  int records = 0;
  RunResult r = run_pop(load_pop(kData + "/ex32.json"), cfg, [&](const LoopRecord&) { ++records; });
  CHECK(r.exit_code == kExitCertified);
  CHECK(records == 1);
  CHECK(r.report["history"].size() == 1);
}

TEST_CASE("file solver bridge") {
  const auto dir = std::filesystem::temp_directory_path() / "cpop_bridge_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "problem.json").string();
  Pop p = load_pop(kData + "/ex41.json");
  RunConfig cfg;
  cfg.solver = "file:" + path;

  ::unsetenv("CPOP_SOLVER_CMD");
  std::filesystem::remove(path + ".sol.json");
  RunResult missing = run_pop(p, cfg);
  CHECK(missing.exit_code == kExitInputError);
  CHECK(std::filesystem::exists(path));

  const std::string cmd = std::string("'") + CPOP_CLI_PATH + "' sdp-solve";
  ::setenv("CPOP_SOLVER_CMD", cmd.c_str(), 1);
  RunResult bridged = run_pop(p, cfg);
  ::unsetenv("CPOP_SOLVER_CMD");
  RunResult internal = run_pop(p, RunConfig{});
  CHECK(bridged.exit_code == internal.exit_code);
  CHECK(bridged.bound == doctest::Approx(internal.bound).epsilon(1e-9));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run configuration is echoed") {
  RunConfig cfg;
  cfg.sparse = true;
  cfg.slack = 2.0;
  auto j = cfg.to_json();
  CHECK(j["sparse"] == true);
  CHECK(j["slack"] == 2.0);
  CHECK(complex_vector_json({Complex(1, 2)}).dump().find("2") != std::string::npos);
}
