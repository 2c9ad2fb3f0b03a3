#include "cpop/opf.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <sstream>

#include "cpop/error.hpp"

namespace cpop {

namespace {

using Matrix = std::vector<std::vector<double>>;

struct Section {
  Matrix rows;
  int line = 0;
};

double parse_number(const std::string& tok, int line) {
  if (tok == "Inf" || tok == "inf" || tok == "+Inf") return std::numeric_limits<double>::infinity();
  if (tok == "-Inf" || tok == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

// Splits matrix body text into rows of numbers.
void add_rows(const std::string& body, int line, Matrix& out) {
  std::string row;
  std::stringstream ss(body);
  while (std::getline(ss, row, ';')) {
    for (char& ch : row)
      if (ch == ',' || ch == '\t') ch = ' ';
    std::stringstream ts(row);
    std::vector<double> vals;
    std::string tok;
    while (ts >> tok) vals.push_back(parse_number(tok, line));
    if (!vals.empty()) out.push_back(std::move(vals));
  }
}

double col(const std::vector<double>& row, size_t k, int line, const char* what) {
  if (k >= row.size())
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what +
                                           " row has " + std::to_string(row.size()) + " columns");
  return row[k];
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
  void join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

std::map<int, int> bus_positions(const NetworkCase& c) {
  std::map<int, int> pos;
  for (size_t i = 0; i < c.buses.size(); ++i) pos[c.buses[i].id] = static_cast<int>(i);
  return pos;
}

int position(const std::map<int, int>& pos, int id, const char* what) {
  auto it = pos.find(id);
  if (it == pos.end())
    throw Error(ErrorKind::ParseError, std::string(what) + " references unknown bus " + std::to_string(id));
  return it->second;
}

struct BranchAdmittance {
  Complex yff, yft, ytf, ytt;
};

BranchAdmittance branch_admittance(const Branch& br) {
  const Complex ys = 1.0 / Complex(br.r, br.x);
  const double tap = br.ratio == 0.0 ? 1.0 : br.ratio;
  const Complex t = std::polar(tap, br.angle * M_PI / 180.0);
  const Complex ytt = ys + Complex(0.0, br.b / 2.0);
  return {ytt / (tap * tap), -ys / std::conj(t), -ys / t, ytt};
}

}  // namespace

NetworkCase parse_case(const std::string& text) {
  NetworkCase c;
  std::map<std::string, Section> sections;
  std::optional<double> base;
  static const std::regex start_re(R"(mpc\.(\w+)\s*=\s*\[(.*))");
  static const std::regex base_re(R"(mpc\.baseMVA\s*=\s*([^;]+);?)");
  static const std::regex func_re(R"(function\s+\w+\s*=\s*(\w+))");

  std::stringstream in(text);
  std::string raw;
  int line = 0;
  std::string open;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw.substr(0, raw.find('%'));
    std::smatch m;
    if (!open.empty()) {
      auto close = s.find(']');
      add_rows(s.substr(0, close), line, sections[open].rows);
      if (close != std::string::npos) open.clear();
      continue;
    }
    if (std::regex_search(s, m, func_re)) {
      c.name = m[1];
    } else if (std::regex_search(s, m, base_re)) {
      std::string v = m[1];
      v.erase(v.find_last_not_of(" \t") + 1);
      v.erase(0, v.find_first_not_of(" \t"));
      base = parse_number(v, line);
    } else if (std::regex_search(s, m, start_re)) {
      std::string name = m[1];
      std::string rest = m[2];
      sections[name].line = line;
      sections[name].rows.clear();
      auto close = rest.find(']');
      add_rows(rest.substr(0, close), line, sections[name].rows);
      if (close == std::string::npos) open = name;
    }
  }
  if (!open.empty()) throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": unterminated matrix mpc." + open);
  if (!base) throw Error(ErrorKind::MissingSection, "mpc.baseMVA");
  for (const char* name : {"bus", "gen", "branch", "gencost"}) {
    auto it = sections.find(name);
    if (it == sections.end() || it->second.rows.empty())
      throw Error(ErrorKind::MissingSection, std::string("mpc.") + name);
  }
  c.base_mva = *base;
  const double mva = c.base_mva;

  int ln = sections["bus"].line;
  for (const auto& row : sections["bus"].rows) {
    Bus b;
    b.id = static_cast<int>(col(row, 0, ln, "bus"));
    b.type = static_cast<int>(col(row, 1, ln, "bus"));
    b.pd = col(row, 2, ln, "bus") / mva;
    b.qd = col(row, 3, ln, "bus") / mva;
    b.gs = col(row, 4, ln, "bus") / mva;
    b.bs = col(row, 5, ln, "bus") / mva;
    b.vmax = col(row, 11, ln, "bus");
    b.vmin = col(row, 12, ln, "bus");
    c.buses.push_back(b);
  }
  auto pos = bus_positions(c);
  if (pos.size() != c.buses.size())
    throw Error(ErrorKind::ParseError, "line " + std::to_string(ln) + ": duplicate bus id");

  ln = sections["gen"].line;
  for (const auto& row : sections["gen"].rows) {
    Generator g;
    g.bus = static_cast<int>(col(row, 0, ln, "gen"));
    position(pos, g.bus, "generator");
    g.qmax = col(row, 3, ln, "gen") / mva;
    g.qmin = col(row, 4, ln, "gen") / mva;
    g.on = col(row, 7, ln, "gen") > 0;
    g.pmax = col(row, 8, ln, "gen") / mva;
    g.pmin = col(row, 9, ln, "gen") / mva;
    c.gens.push_back(g);
  }

  ln = sections["gencost"].line;
  const auto& costs = sections["gencost"].rows;
  if (costs.size() < c.gens.size())
    throw Error(ErrorKind::ParseError, "line " + std::to_string(ln) + ": fewer gencost rows than generators");
  for (size_t k = 0; k < c.gens.size(); ++k) {
    const auto& row = costs[k];
    if (col(row, 0, ln, "gencost") != 2)
      throw Error(ErrorKind::ParseError, "line " + std::to_string(ln) + ": only polynomial costs (model 2) are supported");
    int ncost = static_cast<int>(col(row, 3, ln, "gencost"));
    if (ncost < 1 || ncost > 3)
      throw Error(ErrorKind::ParseError, "line " + std::to_string(ln) + ": cost degree above 2");
    std::vector<double> coef(3, 0.0);  // c0, c1, c2
    for (int j = 0; j < ncost; ++j) coef[ncost - 1 - j] = col(row, 4 + j, ln, "gencost");
    c.gens[k].c0 = coef[0];
    c.gens[k].c1 = coef[1];
    c.gens[k].c2 = coef[2];
  }

  ln = sections["branch"].line;
  for (const auto& row : sections["branch"].rows) {
    Branch br;
    br.from = static_cast<int>(col(row, 0, ln, "branch"));
    br.to = static_cast<int>(col(row, 1, ln, "branch"));
    position(pos, br.from, "branch");
    position(pos, br.to, "branch");
    br.r = col(row, 2, ln, "branch");
    br.x = col(row, 3, ln, "branch");
    br.b = col(row, 4, ln, "branch");
    br.rate = col(row, 5, ln, "branch") / mva;
    if (row.size() > 8) br.ratio = row[8];
    if (row.size() > 9) br.angle = row[9];
    if (row.size() > 10) br.on = row[10] > 0;
    c.branches.push_back(br);
  }
  return c;
}

NetworkCase load_case(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_case(ss.str());
}

NetworkCase preprocess(const NetworkCase& in, const PreprocessOptions& opts) {
  NetworkCase c = in;
  if (opts.loss_objective) c.loss_objective = true;
  if (opts.min_r > 0.0)
    for (auto& br : c.branches) br.r = std::max(br.r, opts.min_r);
  if (opts.merge_impedance <= 0.0) return c;

  auto pos = bus_positions(c);
  UnionFind uf(static_cast<int>(c.buses.size()));
  std::vector<bool> merged(c.branches.size(), false);
  for (size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    if (!br.on || std::hypot(br.r, br.x) >= opts.merge_impedance) continue;
    uf.join(pos.at(br.from), pos.at(br.to));
    merged[k] = true;
  }

  NetworkCase out = c;
  out.buses.clear();
  out.branches.clear();
  std::map<int, int> rep_index;
  for (size_t i = 0; i < c.buses.size(); ++i) {
    int r = uf.find(static_cast<int>(i));
    if (r == static_cast<int>(i)) {
      rep_index[r] = static_cast<int>(out.buses.size());
      out.buses.push_back(c.buses[i]);
    }
  }
  for (size_t i = 0; i < c.buses.size(); ++i) {
    int r = uf.find(static_cast<int>(i));
    if (r == static_cast<int>(i)) continue;
    Bus& target = out.buses[rep_index[r]];
    const Bus& b = c.buses[i];
    target.pd += b.pd;
    target.qd += b.qd;
    target.gs += b.gs;
    target.bs += b.bs;
    target.vmin = std::max(target.vmin, b.vmin);
    target.vmax = std::min(target.vmax, b.vmax);
    target.type = std::max(target.type, b.type);
  }
  auto rep_id = [&](int id) { return c.buses[uf.find(pos.at(id))].id; };
  for (auto& g : out.gens) g.bus = rep_id(g.bus);
  for (size_t k = 0; k < c.branches.size(); ++k) {
    if (merged[k]) continue;
    Branch br = c.branches[k];
    br.from = rep_id(br.from);
    br.to = rep_id(br.to);
    if (br.from == br.to) continue;
    out.branches.push_back(br);
  }
  return out;
}

std::vector<std::vector<Complex>> admittance_matrix(const NetworkCase& c) {
  const int n = static_cast<int>(c.buses.size());
  auto pos = bus_positions(c);
  std::vector<std::vector<Complex>> y(n, std::vector<Complex>(n, 0.0));
  for (int i = 0; i < n; ++i) y[i][i] += Complex(c.buses[i].gs, c.buses[i].bs);
  for (const auto& br : c.branches) {
    if (!br.on) continue;
    int f = position(pos, br.from, "branch"), t = position(pos, br.to, "branch");
    auto a = branch_admittance(br);
    y[f][f] += a.yff;
    y[f][t] += a.yft;
    y[t][f] += a.ytf;
    y[t][t] += a.ytt;
  }
  return y;
}

std::vector<Complex> power_injections(const NetworkCase& c, std::span<const Complex> z) {
  auto y = admittance_matrix(c);
  const int n = static_cast<int>(y.size());
  std::vector<Complex> s(n);
  for (int i = 0; i < n; ++i) {
    Complex cur = 0.0;
    for (int j = 0; j < n; ++j) cur += y[i][j] * z[j];
    s[i] = z[i] * std::conj(cur);
  }
  return s;
}

Pop build_opf_pop(const NetworkCase& c, const OpfOptions& opts) {
  const int n = static_cast<int>(c.buses.size());
  auto pos = bus_positions(c);
  {
    UnionFind uf(n);
    for (const auto& br : c.branches)
      if (br.on) uf.join(position(pos, br.from, "branch"), position(pos, br.to, "branch"));
    for (int i = 0; i < n; ++i)
      if (uf.find(i) != 0)
        throw Error(ErrorKind::DisconnectedNetwork, "bus " + std::to_string(c.buses[i].id) + " is not connected to bus " + std::to_string(c.buses[0].id));
  }
  auto y = admittance_matrix(c);

  // S_i = sum_j conj(Y_ij) z_i conj(z_j).
  std::vector<Polynomial> sp(n, Polynomial(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (y[i][j] != 0.0)
        sp[i].add_term(MultiIndex::unit(n, i), MultiIndex::unit(n, j), std::conj(y[i][j]));
  auto real_part = [&](const Polynomial& s) {
    return HermitianPoly::from_polynomial((s + s.conj()) * Complex(0.5));
  };
  auto imag_part = [&](const Polynomial& s) {
    return HermitianPoly::from_polynomial((s - s.conj()) * Complex(0.0, -0.5));
  };

  struct GenBox {
    bool any = false;
    double pmin = 0, pmax = 0, qmin = 0, qmax = 0;
    double c2 = 0, c1 = 0, c0 = 0;
  };
  std::vector<GenBox> box(n);
  for (const auto& g : c.gens) {
    if (!g.on) continue;
    GenBox& b = box[position(pos, g.bus, "generator")];
    if (b.any && (b.c2 != g.c2 || b.c1 != g.c1))
      throw Error(ErrorKind::NotApplicable, "generators at bus " + std::to_string(g.bus) + " have different costs");
    b.pmin += g.pmin;
    b.pmax += g.pmax;
    b.qmin += g.qmin;
    b.qmax += g.qmax;
    b.c2 = g.c2;
    b.c1 = g.c1;
    b.c0 += g.c0;
    b.any = true;
  }

  Pop pop;
  pop.n = n;
  pop.field = Field::complex;
  HermitianPoly obj(n);
  double obj_const = 0.0;
  for (int i = 0; i < n; ++i) {
    const HermitianPoly p = real_part(sp[i]);
    if (c.loss_objective) {
      obj = obj + p.scaled(c.base_mva);
      continue;
    }
    if (!box[i].any) continue;
    // Generation P_i + Pd_i in per-unit, cost per MW.
    HermitianPoly pg = p + HermitianPoly::constant(n, c.buses[i].pd);
    obj = obj + pg.scaled(box[i].c1 * c.base_mva);
    obj_const += box[i].c0;
    if (box[i].c2 != 0.0)
      pop.quadratic_costs.push_back({pg, box[i].c2 * c.base_mva * c.base_mva, "Pg" + std::to_string(c.buses[i].id)});
  }
  pop.objective = obj + HermitianPoly::constant(n, obj_const);

  auto add = [&](HermitianPoly g, Sense sense, double upper, double scale, std::string label) {
    Constraint con;
    con.poly = std::move(g);
    con.sense = sense;
    con.upper = upper;
    con.scale = scale;
    con.label = std::move(label);
    pop.constraints.push_back(std::move(con));
  };
  // lo <= inj + dem <= hi, with missing generators meaning lo = hi = 0.
  auto injection = [&](const HermitianPoly& inj, double dem, double lo, double hi, const std::string& label) {
    HermitianPoly shifted = inj + HermitianPoly::constant(n, dem);
    const bool lo_inf = !std::isfinite(lo), hi_inf = !std::isfinite(hi);
    if (lo_inf && hi_inf) return;
    if (lo_inf) {
      add(HermitianPoly::constant(n, hi) - shifted, Sense::ge, 0.0, c.base_mva, label);
    } else if (hi_inf) {
      add(shifted - HermitianPoly::constant(n, lo), Sense::ge, 0.0, c.base_mva, label);
    } else if (hi - lo <= 0.0) {
      add(shifted - HermitianPoly::constant(n, lo), Sense::eq, 0.0, c.base_mva, label);
    } else {
      add(shifted - HermitianPoly::constant(n, lo), Sense::range, hi - lo, c.base_mva, label);
    }
  };
  for (int i = 0; i < n; ++i) {
    const std::string id = std::to_string(c.buses[i].id);
    const GenBox& b = box[i];
    injection(real_part(sp[i]), c.buses[i].pd, b.pmin, b.pmax, "P" + id);
    injection(imag_part(sp[i]), c.buses[i].qd, b.qmin, b.qmax, "Q" + id);
  }
  for (int i = 0; i < n; ++i) {
    const std::string id = std::to_string(c.buses[i].id);
    Polynomial v2 = Polynomial::monomial(MultiIndex::unit(n, i), MultiIndex::unit(n, i));
    HermitianPoly mag = HermitianPoly::from_polynomial(v2);
    const Bus& b = c.buses[i];
    add(mag - HermitianPoly::constant(n, b.vmin * b.vmin), Sense::ge, 0.0, 1.0, "Vmin" + id);
    add(HermitianPoly::constant(n, b.vmax * b.vmax) - mag, Sense::ge, 0.0, 1.0, "Vmax" + id);
  }
  for (size_t k = 0; k < c.branches.size(); ++k) {
    const Branch& br = c.branches[k];
    if (!br.on || br.rate <= 0.0 || !std::isfinite(br.rate)) continue;
    int f = position(pos, br.from, "branch"), t = position(pos, br.to, "branch");
    auto a = branch_admittance(br);
    auto flow = [&](int i, int j, Complex self, Complex mutual, const std::string& label) {
      Polynomial inner(n);
      inner.add_term(MultiIndex::unit(n, i), MultiIndex::unit(n, i), std::conj(self));
      inner.add_term(MultiIndex::unit(n, i), MultiIndex::unit(n, j), std::conj(mutual));
      const double lim = br.rate * br.rate;
      HermitianPoly g = HermitianPoly::from_polynomial(Polynomial::constant(n, lim) - inner * inner.conj());
      add(std::move(g), Sense::ge, 0.0, c.base_mva, label);
      pop.constraints.back().flow = FlowLimit{inner, lim};
    };
    const std::string tag = std::to_string(br.from) + "-" + std::to_string(br.to);
    flow(f, t, a.yff, a.yft, "S" + tag);
    flow(t, f, a.ytt, a.ytf, "S" + std::to_string(br.to) + "-" + std::to_string(br.from));
  }

  if (!opts.epigraph && !pop.quadratic_costs.empty()) {
    pop.objective = pop.full_objective();
    pop.quadratic_costs.clear();
  }
  return pop;
}

}  // namespace cpop
