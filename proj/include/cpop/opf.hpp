#pragma once

#include <string>
#include <vector>

#include "cpop/pop.hpp"

namespace cpop {

// Power quantities are stored in per-unit of base_mva, costs in $ per MW
// (c1), $ per MW^2 (c2) and $ (c0).
struct Bus {
  int id = 0;
  int type = 1;
  double pd = 0.0, qd = 0.0;
  double gs = 0.0, bs = 0.0;
  double vmin = 0.9, vmax = 1.1;
};

struct Generator {
  int bus = 0;
  double pmin = 0.0, pmax = 0.0;
  double qmin = 0.0, qmax = 0.0;
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
  bool on = true;
};

struct Branch {
  int from = 0, to = 0;
  double r = 0.0, x = 0.0, b = 0.0;
  double ratio = 0.0;  // 0 means 1
  double angle = 0.0;  // degrees
  double rate = 0.0;   // per-unit apparent power, 0 = unlimited
  bool on = true;
};

struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> gens;
  std::vector<Branch> branches;
  // Minimize active losses instead of generation cost.
  bool loss_objective = false;
};

// MATPOWER-style text: mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch and
// mpc.gencost (polynomial model) matrices, % comments. Inf/-Inf accepted.
// Throws ParseError (with line number) or MissingSection.
NetworkCase parse_case(const std::string& text);
NetworkCase load_case(const std::string& path);

struct PreprocessOptions {
  double min_r = 0.0;             // 0 = off
  double merge_impedance = 0.0;   // |r + ix| below this merges the endpoints; 0 = off
  bool loss_objective = false;
};

NetworkCase preprocess(const NetworkCase& c, const PreprocessOptions& opts = {});

struct OpfOptions {
  // Quadratic costs through epigraph variables; false folds them into a
  // degree-(2,2) objective.
  bool epigraph = true;
};

// Bus admittance matrix (pi model with taps and shunts), per-unit.
std::vector<std::vector<Complex>> admittance_matrix(const NetworkCase& c);

// Complex QCQP in the bus voltages. Constraint order: (P_i, Q_i) per bus,
// then (Vmin_i, Vmax_i) per bus, then flow limits per branch (from end, to
// end). Power rows are in per-unit with scale = base_mva, objective in $.
// Throws DisconnectedNetwork.
Pop build_opf_pop(const NetworkCase& c, const OpfOptions& opts = {});

// Net complex power injections S_i = z_i conj((Y z)_i), per-unit.
std::vector<Complex> power_injections(const NetworkCase& c, std::span<const Complex> z);

}  // namespace cpop
