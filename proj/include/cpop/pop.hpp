#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpop/polynomial.hpp"

namespace cpop {

enum class Field { complex, real };

// ge: g >= 0. eq: g = 0. range: 0 <= g <= upper.
enum class Sense { ge, eq, range };

// |inner|^2 <= limit_sq, stored next to the quartic constraint polynomial so
// that order-1 relaxations can use a Schur-complement block instead.
struct FlowLimit {
  Polynomial inner;
  double limit_sq = 0.0;
};

struct Constraint {
  HermitianPoly poly;
  Sense sense = Sense::ge;
  double upper = 0.0;
  // Multiplies mismatches so that they are reported in problem units.
  double scale = 1.0;
  std::string label;
  std::optional<FlowLimit> flow;

  int half_degree() const { return poly.half_degree(); }
};

// weight * poly^2 added to the objective. Kept separate so the relaxation can
// bound it through an epigraph variable.
struct QuadraticCost {
  HermitianPoly poly;
  double weight = 0.0;
  std::string label;
};

struct Pop {
  int n = 0;
  Field field = Field::complex;
  HermitianPoly objective;
  std::vector<QuadraticCost> quadratic_costs;
  std::vector<Constraint> constraints;
  std::optional<double> ball_radius;

  // Quadratic costs count with the half-degree of P (epigraph form).
  int objective_half_degree() const;
  // max{k_0, k_1, ..., k_m}, at least 1.
  int min_order() const;
  // Objective including the expanded quadratic cost terms.
  HermitianPoly full_objective() const;
  // Throws DimensionMismatch on inconsistent variable counts.
  void validate() const;
};

double evaluate_objective(const Pop& pop, std::span<const Complex> z);

// Signed violation of constraint i at z: 0 when satisfied.
double constraint_violation(const Constraint& c, std::span<const Complex> z);

// Real-field copy in 2n variables x with z_k = x_k + i x_{k+n}. Flow limits
// become plain quartic constraints.
Pop realify_pop(const Pop& pop);

// JSON problem format.
Pop pop_from_json(const nlohmann::json& j);
nlohmann::json pop_to_json(const Pop& pop);
Pop load_pop(const std::string& path);

std::string to_string(Sense s);

}  // namespace cpop
