#include "cpop/pop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cpop/error.hpp"

namespace cpop {

using nlohmann::json;

int Pop::objective_half_degree() const {
  int k = objective.half_degree();
  // Epigraph blocks only read L_y(P) of each quadratic cost.
  for (const auto& q : quadratic_costs) k = std::max(k, q.poly.half_degree());
  return k;
}

int Pop::min_order() const {
  int d = std::max(1, objective_half_degree());
  for (const auto& c : constraints) d = std::max(d, c.half_degree());
  return d;
}

HermitianPoly Pop::full_objective() const {
  HermitianPoly f = objective;
  for (const auto& q : quadratic_costs) f = f + (q.poly * q.poly).scaled(q.weight);
  return f;
}

void Pop::validate() const {
  auto check = [&](const HermitianPoly& p, const std::string& what) {
    if (!p.is_zero() && p.num_vars() != n)
      throw Error(ErrorKind::DimensionMismatch, what + " has " + std::to_string(p.num_vars()) +
                                                    " variables, expected " + std::to_string(n));
  };
  check(objective, "objective");
  for (const auto& q : quadratic_costs) check(q.poly, "quadratic cost");
  for (size_t i = 0; i < constraints.size(); ++i) {
    check(constraints[i].poly, "constraint " + std::to_string(i));
    if (constraints[i].sense == Sense::range && constraints[i].upper < 0.0)
      throw Error(ErrorKind::DimensionMismatch, "range constraint with negative width");
  }
}

double evaluate_objective(const Pop& pop, std::span<const Complex> z) {
  double v = pop.objective.is_zero() ? 0.0 : pop.objective.evaluate(z);
  for (const auto& q : pop.quadratic_costs) {
    double p = q.poly.evaluate(z);
    v += q.weight * p * p;
  }
  return v;
}

double constraint_violation(const Constraint& c, std::span<const Complex> z) {
  double g = c.poly.is_zero() ? 0.0 : c.poly.evaluate(z);
  switch (c.sense) {
    case Sense::ge: return std::max(0.0, -g);
    case Sense::eq: return std::abs(g);
    case Sense::range: return std::max({0.0, -g, g - c.upper});
  }
  return 0.0;
}

Pop realify_pop(const Pop& pop) {
  if (pop.field == Field::real) return pop;
  auto conv = [](const HermitianPoly& p) { return hermitian_from_real(realify(p)); };
  Pop out;
  out.n = 2 * pop.n;
  out.field = Field::real;
  out.objective = pop.objective.is_zero() ? HermitianPoly(out.n) : conv(pop.objective);
  for (const auto& q : pop.quadratic_costs) out.quadratic_costs.push_back({conv(q.poly), q.weight, q.label});
  for (const auto& c : pop.constraints) {
    Constraint r = c;
    r.poly = conv(c.poly);
    r.flow.reset();
    out.constraints.push_back(std::move(r));
  }
  out.ball_radius = pop.ball_radius;
  return out;
}

std::string to_string(Sense s) {
  switch (s) {
    case Sense::ge: return "ge";
    case Sense::eq: return "eq";
    case Sense::range: return "range";
  }
  return "?";
}

namespace {

std::vector<int> index_array(const json& j, const char* key, int n) {
  if (!j.contains(key)) return std::vector<int>(n, 0);
  auto v = j.at(key).get<std::vector<int>>();
  if (static_cast<int>(v.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, std::string(key) + " has length " +
                                                  std::to_string(v.size()) + ", expected " +
                                                  std::to_string(n));
  return v;
}

std::vector<RawTerm> raw_terms(const json& arr, int n) {
  std::vector<RawTerm> out;
  for (const auto& t : arr) {
    RawTerm r;
    r.alpha = index_array(t, "alpha", n);
    r.beta = index_array(t, "beta", n);
    r.coeff = Complex(t.value("re", 0.0), t.value("im", 0.0));
    out.push_back(std::move(r));
  }
  return out;
}

HermitianPoly read_poly(const json& arr, int n, Field field) {
  auto terms = raw_terms(arr, n);
  if (field == Field::complex) return normalize_hermitian(terms, n);
  RealPoly p(n);
  for (const auto& t : terms) {
    if (std::any_of(t.beta.begin(), t.beta.end(), [](int b) { return b != 0; }) ||
        t.coeff.imag() != 0.0)
      throw Error(ErrorKind::ParseError, "real-field terms need beta = 0 and im = 0");
    p.add_term(MultiIndex(t.alpha), t.coeff.real());
  }
  return hermitian_from_real(p);
}

json term_json(const MultiIndex& a, const MultiIndex& b, Complex c) {
  return json{{"alpha", a.exponents()}, {"beta", b.exponents()}, {"re", c.real()},
              {"im", c.imag()}};
}

json write_poly(const Polynomial& p, Field field) {
  json arr = json::array();
  if (field == Field::real) {
    for (const auto& [g, c] : fold_to_real(p).terms())
      arr.push_back(term_json(g, MultiIndex::zero(p.num_vars()), c));
    return arr;
  }
  for (const auto& [key, c] : p.terms()) arr.push_back(term_json(key.alpha, key.beta, c));
  return arr;
}

Sense parse_sense(const std::string& s) {
  if (s == "ge") return Sense::ge;
  if (s == "eq") return Sense::eq;
  if (s == "range") return Sense::range;
  throw Error(ErrorKind::ParseError, "unknown constraint sense '" + s + "'");
}

}  // namespace

Pop pop_from_json(const json& j) {
  try {
    Pop pop;
    pop.n = j.at("n").get<int>();
    if (pop.n < 1) throw Error(ErrorKind::DimensionMismatch, "n must be positive");
    std::string field = j.value("field", "complex");
    if (field == "complex")
      pop.field = Field::complex;
    else if (field == "real")
      pop.field = Field::real;
    else
      throw Error(ErrorKind::ParseError, "unknown field '" + field + "'");
    pop.objective = read_poly(j.at("objective"), pop.n, pop.field);
    if (j.contains("quadratic_costs")) {
      for (const auto& q : j.at("quadratic_costs")) {
        pop.quadratic_costs.push_back(QuadraticCost{read_poly(q.at("terms"), pop.n, pop.field),
                                                    q.at("weight").get<double>(),
                                                    q.value("label", std::string())});
      }
    }
    if (j.contains("constraints")) {
      for (const auto& cj : j.at("constraints")) {
        Constraint c;
        c.poly = read_poly(cj.at("terms"), pop.n, pop.field);
        c.sense = parse_sense(cj.value("sense", "ge"));
        c.upper = cj.value("upper", 0.0);
        c.scale = cj.value("scale", 1.0);
        c.label = cj.value("label", std::string());
        if (cj.contains("flow")) {
          const auto& fj = cj.at("flow");
          Polynomial inner(pop.n);
          for (const auto& t : raw_terms(fj.at("terms"), pop.n))
            inner.add_term(MultiIndex(t.alpha), MultiIndex(t.beta), t.coeff);
          c.flow = FlowLimit{std::move(inner), fj.at("limit_sq").get<double>()};
        }
        pop.constraints.push_back(std::move(c));
      }
    }
    if (j.contains("ball_radius") && !j.at("ball_radius").is_null())
      pop.ball_radius = j.at("ball_radius").get<double>();
    pop.validate();
    return pop;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

json pop_to_json(const Pop& pop) {
  json j;
  j["n"] = pop.n;
  j["field"] = pop.field == Field::complex ? "complex" : "real";
  j["objective"] = write_poly(pop.objective.poly(), pop.field);
  if (!pop.quadratic_costs.empty()) {
    json arr = json::array();
    for (const auto& q : pop.quadratic_costs)
      arr.push_back(
          {{"weight", q.weight}, {"terms", write_poly(q.poly.poly(), pop.field)}, {"label", q.label}});
    j["quadratic_costs"] = arr;
  }
  json cons = json::array();
  for (const auto& c : pop.constraints) {
    json cj{{"terms", write_poly(c.poly.poly(), pop.field)}, {"sense", to_string(c.sense)}};
    if (c.sense == Sense::range) cj["upper"] = c.upper;
    if (c.scale != 1.0) cj["scale"] = c.scale;
    if (!c.label.empty()) cj["label"] = c.label;
    if (c.flow) {
      json terms = json::array();
      for (const auto& [key, v] : c.flow->inner.terms())
        terms.push_back(term_json(key.alpha, key.beta, v));
      cj["flow"] = {{"terms", terms}, {"limit_sq", c.flow->limit_sq}};
    }
    cons.push_back(std::move(cj));
  }
  j["constraints"] = cons;
  if (pop.ball_radius) j["ball_radius"] = *pop.ball_radius;
  return j;
}

Pop load_pop(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return pop_from_json(j);
}

}  // namespace cpop
