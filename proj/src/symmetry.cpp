#include "cpop/symmetry.hpp"

#include <map>

#include "cpop/error.hpp"

namespace cpop {

bool SymmetryReport::is_zero(const MultiIndex& alpha, const MultiIndex& beta) const {
  switch (kind) {
    case SymmetryKind::none: return false;
    case SymmetryKind::balanced: return alpha.degree() != beta.degree();
    case SymmetryKind::even: return (alpha.degree() + beta.degree()) % 2 != 0;
  }
  return false;
}

int SymmetryReport::group(const MultiIndex& alpha) const {
  switch (kind) {
    case SymmetryKind::none: return 0;
    case SymmetryKind::balanced: return alpha.degree();
    case SymmetryKind::even: return alpha.degree() % 2;
  }
  return 0;
}

namespace {

bool all_terms(const Polynomial& p, bool (*pred)(const TermKey&)) {
  for (const auto& [key, c] : p.terms())
    if (!pred(key)) return false;
  return true;
}

bool balanced_term(const TermKey& k) { return k.alpha.degree() == k.beta.degree(); }
bool even_term(const TermKey& k) { return (k.alpha.degree() + k.beta.degree()) % 2 == 0; }

}  // namespace

SymmetryReport detect_invariance(const Pop& pop) {
  auto pred = pop.field == Field::complex ? balanced_term : even_term;
  bool ok = all_terms(pop.objective.poly(), pred);
  for (const auto& q : pop.quadratic_costs) ok = ok && all_terms(q.poly.poly(), pred);
  for (const auto& c : pop.constraints) {
    ok = ok && all_terms(c.poly.poly(), pred);
    if (c.flow) ok = ok && all_terms(c.flow->inner, pred);
  }
  SymmetryReport r;
  if (ok) r.kind = pop.field == Field::complex ? SymmetryKind::balanced : SymmetryKind::even;
  return r;
}

MaskPartition zero_mask(const SymmetryReport& report, const std::vector<MultiIndex>& basis) {
  if (report.kind == SymmetryKind::none)
    throw Error(ErrorKind::NotApplicable, "problem has no balanced or even structure");
  MaskPartition out;
  std::map<int, std::vector<int>> groups;
  for (int r = 0; r < static_cast<int>(basis.size()); ++r) {
    groups[report.group(basis[r])].push_back(r);
    for (int c = r; c < static_cast<int>(basis.size()); ++c)
      if (report.is_zero(basis[r], basis[c])) out.zero_pairs.emplace_back(r, c);
  }
  for (auto& [g, rows] : groups) out.blocks.push_back(std::move(rows));
  return out;
}

std::string to_string(SymmetryKind kind) {
  switch (kind) {
    case SymmetryKind::none: return "none";
    case SymmetryKind::balanced: return "balanced";
    case SymmetryKind::even: return "even";
  }
  return "?";
}

}  // namespace cpop
