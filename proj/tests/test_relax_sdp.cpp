#include <doctest.h>

#include <random>

#include "cpop/certify.hpp"
#include "cpop/error.hpp"
#include "cpop/opf.hpp"
#include "cpop/relaxation.hpp"
#include "cpop/schur.hpp"
#include "cpop/sdp.hpp"
#include "cpop/sdp_format.hpp"
#include "test_util.hpp"

using namespace cpop;
using namespace cpop::testing;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Every non-epigraph block and every row of the relaxation, evaluated at the
// moments of delta_z, equals its origin polynomial evaluated at z.
void check_dirac_assembly(const Relaxation& relax, const std::vector<Complex>& z) {
  MomentTable t = table_from_atoms(relax.pop.n, {z}, {1.0}, relax.plan.cliques,
                                   relax.plan.clique_orders, relax.d_K, relax.pop.field);
  VectorXd x = moment_vector(relax, t);
  REQUIRE(relax.block_origins.size() == relax.sdp.blocks.size());
  for (size_t b = 0; b < relax.sdp.blocks.size(); ++b) {
    const auto& o = relax.block_origins[b];
    if (o.kind == BlockKind::epigraph) continue;
    MatrixXcd v = relax.sdp.block_value(static_cast<int>(b), x);
    double err = 0.0;
    for (int r = 0; r < o.size; ++r)
      for (int c = 0; c < o.size; ++c) err = std::max(err, std::abs(v(r, c) - o.entry(r, c).evaluate(z)));
    CHECK_MESSAGE(err < 1e-9, relax.sdp.blocks[b].label);
  }
  REQUIRE(relax.row_origins.size() == relax.sdp.rows.size());
  for (size_t r = 0; r < relax.sdp.rows.size(); ++r) {
    const auto& o = relax.row_origins[r];
    double want = o.poly.evaluate(z).real() + o.offset;
    CHECK(relax.sdp.row_value(static_cast<int>(r), x) == doctest::Approx(want).epsilon(1e-9));
  }
}

SdpProblem two_by_two() {
  // min x  s.t.  [[x, 1], [1, 1]] PSD.
  SdpProblem p;
  p.num_vars = 1;
  p.objective = {1.0};
  SdpBlock b;
  b.size = 2;
  b.entries = {{0, 0, 0, 1.0}, {0, 1, -1, 1.0}, {1, 1, -1, 1.0}};
  p.blocks.push_back(b);
  return p;
}

MatrixXcd random_hermitian_matrix(int s, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  MatrixXcd a(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) a(i, j) = Complex(nd(rng), nd(rng));
  return a + a.adjoint();
}

}  // namespace

TEST_CASE("d_K follows the variable count") {
  Pop one = load_pop(kData + "/ex32.json");
  CHECK(compute_dK(one) == 1);
  CHECK(compute_dK(load_pop(kData + "/ex41.json")) == 1);  // only the constraints count
  Pop two = load_pop(kData + "/ex51.json");
  CHECK(compute_dK(two) == 2);
  Pop lin = two;
  lin.objective = HermitianPoly::from_polynomial(Polynomial::variable(2, 0) + Polynomial::conj_variable(2, 0));
  lin.constraints = {constraint(unit_ball(2))};
  CHECK(compute_dK(lin) == 2);
}

TEST_CASE("moment variable counts") {
  Pop c = load_pop(kData + "/ex32.json");
  Relaxation r = assemble(c, dense_plan(c, 1), nullptr);
  // y00, y11 real; y01 as (re, im).
  CHECK(r.index.num_vars() == 4);
  CHECK(r.sdp.blocks[0].complex);

  Pop real;
  real.n = 1;
  real.field = Field::real;
  real.objective = hermitian_from_real(real_poly(1, {{{1}, 1.0}}));
  real.constraints = {constraint(hermitian_from_real(real_poly(1, {{{0}, 1.0}, {{2}, -1.0}})).poly())};
  Relaxation rr = assemble(real, dense_plan(real, 2), nullptr);
  CHECK(rr.index.num_vars() == 5);  // Hankel: y_0 .. y_4
  CHECK_FALSE(rr.sdp.blocks[0].complex);
}

TEST_CASE("moment bases have binomial sizes") {
  auto b = moment_basis(5, {2, 1}, {{0, 1, 2}, {2, 3, 4}});
  CHECK(b[0].size() == 10);
  CHECK(b[1].size() == 4);
  CHECK(moment_basis(3, 2)[0].size() == 10);
}

TEST_CASE("dirac moments reproduce every block and row") {
  std::mt19937 rng(11);
  SUBCASE("dense complex") {
    Pop p = load_pop(kData + "/ex51.json");
    for (int d = 2; d <= 3; ++d) check_dirac_assembly(assemble(p, dense_plan(p, d), nullptr), random_point(2, rng));
  }
  SUBCASE("dense complex with hyponormal block") {
    Pop p = load_pop(kData + "/ex51.json");
    RelaxationOptions o;
    o.hypo_strengthen_t = 3;
    check_dirac_assembly(assemble(p, dense_plan(p, 3), nullptr, o), random_point(2, rng));
  }
  SUBCASE("sparse mixed orders") {
    Pop p = build_opf_pop(load_case(kData + "/wb5.m"));
    std::vector<int> orders(p.constraints.size(), 1);
    for (int i : {6, 7, 8, 9, 16, 17, 18, 19}) orders[i] = 2;
    check_dirac_assembly(assemble(p, sparse_plan(p, orders), nullptr), random_point(5, rng, 1.0));
  }
  SUBCASE("real field") {
    Pop p = realify_pop(load_pop(kData + "/ex41.json"));
    auto z = random_point(2, rng);
    std::vector<Complex> x{z[0].real(), z[1].real()};
    check_dirac_assembly(assemble(p, dense_plan(p, 2), nullptr), x);
  }
  SUBCASE("sphere slack") {
    Pop p = add_sphere_slack(load_pop(kData + "/ex41.json"), 1.0);
    auto z = random_point(2, rng, 1.0);
    check_dirac_assembly(assemble(p, dense_plan(p, 2), nullptr), z);
  }
}

TEST_CASE("sphere slack appends a variable and an equality") {
  Pop p = load_pop(kData + "/ex41.json");
  Pop s = add_sphere_slack(p, 2.0);
  CHECK(s.n == 2);
  REQUIRE(s.constraints.size() == p.constraints.size() + 1);
  const Constraint& c = s.constraints.back();
  CHECK(c.sense == Sense::eq);
  std::vector<Complex> z{Complex(1.2, 0.0), Complex(0.0, 1.6)};
  CHECK(c.poly.evaluate(z) == doctest::Approx(0.0));
  std::vector<Complex> w{z[0]};
  CHECK(evaluate_objective(s, z) == doctest::Approx(evaluate_objective(p, w)));

  Pop two = load_pop(kData + "/ex51.json");
  Pop sl = add_clique_sphere_slacks(two, {{0}, {1}}, 1.0);
  CHECK(sl.n == 4);
  CHECK(sl.constraints.size() == two.constraints.size() + 2);
}

TEST_CASE("orders below the problem degree are rejected") {
  Pop p = load_pop(kData + "/ex51.json");
  CHECK_THROWS_AS(assemble(p, dense_plan(p, 1), nullptr), Error);
}

TEST_CASE("localizing grid of the constant is the moment grid") {
  auto basis = monomials_up_to(2, 1);
  auto polys = localizing_polys(basis, Polynomial::constant(2, 1.0));
  REQUIRE(polys.size() == 9);
  for (size_t r = 0; r < 3; ++r)
    for (size_t c = 0; c < 3; ++c) {
      const auto& p = polys[r * 3 + c];
      REQUIRE(p.terms().size() == 1);
      CHECK(p.coefficient(basis[r], basis[c]) == Complex(1.0));
    }
}

TEST_CASE("bounds increase with the order") {
  Pop p = load_pop(kData + "/ex51.json");
  SdpSolution s2 = solve_sdp(assemble(p, dense_plan(p, 2), nullptr).sdp);
  SdpSolution s3 = solve_sdp(assemble(p, dense_plan(p, 3), nullptr).sdp);
  CHECK(s2.primal_objective <= s3.primal_objective + 1e-6);
}

TEST_CASE("quadratic costs become epigraph blocks or objective terms") {
  std::string text = R"(mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 345 1 1.05 0.95;
  2 1 350 -350 0 0 1 1 0 345 1 1.022 0.95;
];
mpc.gen = [
  1 0 0 Inf -Inf 1 100 1 Inf -Inf;
];
mpc.branch = [
  1 2 0.04 0.2 0 0 0 0 0 0 1 -360 360;
];
mpc.gencost = [
  2 0 0 3 0.01 2 0;
];
)";
  Pop p = build_opf_pop(parse_case(text));
  REQUIRE(p.quadratic_costs.size() == 1);
  Relaxation r = assemble(p, dense_plan(p, 1), nullptr);
  int epi = 0;
  for (const auto& o : r.block_origins) epi += o.kind == BlockKind::epigraph;
  CHECK(epi == 1);
  Pop folded = expand_quadratic_costs(p);
  CHECK(folded.quadratic_costs.empty());
  CHECK(folded.objective.half_degree() == 2);
  std::mt19937 rng(12);
  auto z = random_point(p.n, rng, 1.0);
  CHECK(evaluate_objective(folded, z) == doctest::Approx(evaluate_objective(p, z)));
  OpfOptions no_epi;
  no_epi.epigraph = false;
  CHECK(build_opf_pop(parse_case(text), no_epi).quadratic_costs.empty());
}

TEST_CASE("small SDP solves to its analytic optimum") {
  SdpProblem p = two_by_two();
  SdpSolution s = solve_sdp(p);
  CHECK((s.status == SdpStatus::optimal || s.status == SdpStatus::near_optimal));
  CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.dual_objective == doctest::Approx(1.0).epsilon(1e-7));
  SolutionCheck ck = check_solution(p, s);
  CHECK(ck.ok(1e-7));
  CHECK(std::abs(ck.gap) < 1e-6);
}

TEST_CASE("infeasible and unbounded SDPs are reported") {
  SdpProblem inf = two_by_two();
  inf.rows.push_back({{{0, -1.0}}, 0.0, RowSense::ge, "x <= 0"});
  CHECK(solve_sdp(inf).status == SdpStatus::infeasible);

  SdpProblem unb;
  unb.num_vars = 1;
  unb.objective = {1.0};
  SdpBlock b;
  b.size = 1;
  b.entries = {{0, 0, 0, -1.0}};
  unb.blocks.push_back(b);  // x <= 0, minimize x
  CHECK(solve_sdp(unb).status == SdpStatus::unbounded);
}

TEST_CASE("serial and parallel Schur assembly agree") {
  std::mt19937 rng(13);
  std::normal_distribution<double> nd;
  std::vector<BlockCoeffs> blocks;
  std::vector<MatrixXd> s_inv, y;
  int nv = 0;
  for (int k = 0; k < 3; ++k) {
    BlockCoeffs b;
    b.size = 4 + k;
    for (int i = 0; i < b.size; ++i)
      for (int j = i; j < b.size; ++j) {
        std::vector<SymEntry> m{{i, j, nd(rng)}};
        if (i != j) m.push_back({j, i, m[0].value});
        b.vars.push_back(nv++ % 9);
        b.mats.push_back(m);
      }
    MatrixXd a = MatrixXd::Random(b.size, b.size);
    s_inv.push_back(a * a.transpose() + MatrixXd::Identity(b.size, b.size));
    a = MatrixXd::Random(b.size, b.size);
    y.push_back(a * a.transpose());
    blocks.push_back(b);
  }
  MatrixXd bs = MatrixXd::Zero(9, 9), bp = MatrixXd::Zero(9, 9);
  schur_serial(blocks, s_inv, y, bs);
  schur_parallel(blocks, s_inv, y, bp);
  CHECK((bs - bp).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + bs.cwiseAbs().maxCoeff()));
  CHECK((bs - bs.transpose()).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + bs.cwiseAbs().maxCoeff()));
}

TEST_CASE("serial and parallel solves agree") {
  Pop p = load_pop(kData + "/ex51.json");
  Relaxation r = assemble(p, dense_plan(p, 2), nullptr);
  SolverOptions ser;
  ser.parallel = false;
  SdpSolution a = solve_sdp(r.sdp, ser), b = solve_sdp(r.sdp);
  CHECK(a.primal_objective == doctest::Approx(b.primal_objective).epsilon(1e-8));
}

TEST_CASE("hermitian embedding doubles the spectrum") {
  std::mt19937 rng(14);
  for (int s = 1; s <= 5; ++s) {
    MatrixXcd h = random_hermitian_matrix(s, rng);
    MatrixXd e = embed_hermitian(h);
    REQUIRE(e.rows() == 2 * s);
    VectorXd eh = Eigen::SelfAdjointEigenSolver<MatrixXcd>(h).eigenvalues();
    VectorXd ee = Eigen::SelfAdjointEigenSolver<MatrixXd>(e).eigenvalues();
    for (int k = 0; k < s; ++k) {
      CHECK(ee[2 * k] == doctest::Approx(eh[k]));
      CHECK(ee[2 * k + 1] == doctest::Approx(eh[k]));
    }
  }
}

TEST_CASE("gram_from_embedded preserves the pairing") {
  std::mt19937 rng(15);
  for (int s = 1; s <= 4; ++s) {
    MatrixXcd h = random_hermitian_matrix(s, rng);
    MatrixXd a = MatrixXd::Random(2 * s, 2 * s);
    MatrixXd y = a * a.transpose();
    MatrixXcd g = gram_from_embedded(y);
    double lhs = (h * g).trace().real();
    double rhs = (embed_hermitian(h).array() * y.array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    CHECK(Eigen::SelfAdjointEigenSolver<MatrixXcd>(g).eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("relaxation bound survives the real embedding") {
  Pop p = load_pop(kData + "/ex51.json");
  Relaxation r = assemble(p, dense_plan(p, 2), nullptr);
  SdpProblem e = hermitian_to_real(r.sdp);
  CHECK(e.all_real());
  CHECK(e.num_vars == r.sdp.num_vars);
  CHECK(solve_sdp(e).primal_objective == doctest::Approx(solve_sdp(r.sdp).primal_objective).epsilon(1e-7));
}

TEST_CASE("interchange format round trip") {
  Pop p = load_pop(kData + "/ex51.json");
  Relaxation r = assemble(p, dense_plan(p, 2), nullptr);
  SdpProblem q = sdp_from_json(nlohmann::json::parse(sdp_to_json(r.sdp).dump()));
  CHECK(q.num_vars == r.sdp.num_vars);
  CHECK(q.blocks.size() == r.sdp.blocks.size());
  CHECK(q.rows.size() == r.sdp.rows.size());
  VectorXd x = VectorXd::Random(q.num_vars);
  CHECK(q.objective_value(x) == doctest::Approx(r.sdp.objective_value(x)));
  for (size_t b = 0; b < q.blocks.size(); ++b)
    CHECK((q.block_value(int(b), x) - r.sdp.block_value(int(b), x)).cwiseAbs().maxCoeff() < 1e-14);

  SdpSolution s = solve_sdp(r.sdp);
  SdpSolution t = solution_from_json(nlohmann::json::parse(solution_to_json(s).dump()), r.sdp);
  CHECK(t.status == s.status);
  CHECK(t.primal_objective == s.primal_objective);
  CHECK((t.x - s.x).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(t.block_duals.size() == s.block_duals.size());

  CHECK_THROWS_AS(sdp_from_json(nlohmann::json{{"num_vars", "three"}}), Error);
  CHECK_THROWS_AS(status_from_string("solved"), Error);
  auto bad = solution_to_json(s);
  bad["block_duals"].erase(0);
  CHECK_THROWS_AS(solution_from_json(bad, r.sdp), Error);
}
