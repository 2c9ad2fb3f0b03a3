#include "cpop/sparsity.hpp"

#include <algorithm>
#include <limits>

#include "cpop/error.hpp"

namespace cpop {

void SparsityGraph::add_edge(int i, int j) {
  if (i == j) return;
  edges.emplace(std::min(i, j), std::max(i, j));
}

bool SparsityGraph::has_edge(int i, int j) const {
  return edges.count({std::min(i, j), std::max(i, j)}) != 0;
}

std::vector<std::set<int>> SparsityGraph::adjacency() const {
  std::vector<std::set<int>> adj(n);
  for (auto [i, j] : edges) {
    adj[i].insert(j);
    adj[j].insert(i);
  }
  return adj;
}

namespace {

void add_monomial_edges(SparsityGraph& g, const Polynomial& p) {
  for (const auto& [key, c] : p.terms()) {
    std::set<int> vars;
    for (int v : key.alpha.support()) vars.insert(v);
    for (int v : key.beta.support()) vars.insert(v);
    for (auto a = vars.begin(); a != vars.end(); ++a)
      for (auto b = std::next(a); b != vars.end(); ++b) g.add_edge(*a, *b);
  }
}

bool contains_all(const std::vector<int>& clique, std::span<const int> vars) {
  return std::all_of(vars.begin(), vars.end(), [&](int v) {
    return std::binary_search(clique.begin(), clique.end(), v);
  });
}

int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return static_cast<int>(out.size());
}

}  // namespace

SparsityGraph build_graphs(const Pop& pop, const std::set<int>& high_order) {
  SparsityGraph g;
  g.n = pop.n;
  add_monomial_edges(g, pop.objective.poly());
  for (const auto& q : pop.quadratic_costs) add_monomial_edges(g, q.poly.poly());
  for (const auto& c : pop.constraints) add_monomial_edges(g, c.poly.poly());
  for (int i : high_order) {
    if (i < 0 || i >= static_cast<int>(pop.constraints.size()))
      throw Error(ErrorKind::DimensionMismatch, "high-order index out of range");
    auto vars = pop.constraints[i].poly.variables();
    for (size_t a = 0; a < vars.size(); ++a)
      for (size_t b = a + 1; b < vars.size(); ++b) g.add_edge(vars[a], vars[b]);
  }
  return g;
}

SparsityGraph eliminate(const SparsityGraph& g, const std::vector<int>& order) {
  auto adj = g.adjacency();
  SparsityGraph filled = g;
  std::vector<bool> gone(g.n, false);
  for (int v : order) {
    std::vector<int> nb;
    for (int u : adj[v])
      if (!gone[u]) nb.push_back(u);
    for (size_t a = 0; a < nb.size(); ++a)
      for (size_t b = a + 1; b < nb.size(); ++b) {
        adj[nb[a]].insert(nb[b]);
        adj[nb[b]].insert(nb[a]);
        filled.add_edge(nb[a], nb[b]);
      }
    gone[v] = true;
  }
  return filled;
}

CliquePlan chordal_cliques(const SparsityGraph& g) {
  CliquePlan plan;
  auto adj = g.adjacency();
  std::vector<bool> gone(g.n, false);
  std::vector<std::vector<int>> candidates;

  for (int step = 0; step < g.n; ++step) {
    int best = -1;
    size_t best_deg = std::numeric_limits<size_t>::max();
    for (int v = 0; v < g.n; ++v) {
      if (gone[v]) continue;
      if (adj[v].size() < best_deg) {
        best = v;
        best_deg = adj[v].size();
      }
    }
    std::vector<int> nb(adj[best].begin(), adj[best].end());
    for (size_t a = 0; a < nb.size(); ++a)
      for (size_t b = a + 1; b < nb.size(); ++b) {
        adj[nb[a]].insert(nb[b]);
        adj[nb[b]].insert(nb[a]);
      }
    std::vector<int> clique = nb;
    clique.push_back(best);
    std::sort(clique.begin(), clique.end());
    candidates.push_back(std::move(clique));
    for (int u : nb) adj[u].erase(best);
    adj[best].clear();
    gone[best] = true;
    plan.elimination_order.push_back(best);
  }

  // Keep maximal candidates only.
  std::vector<std::vector<int>> maximal;
  for (size_t a = 0; a < candidates.size(); ++a) {
    bool dominated = false;
    for (size_t b = 0; b < candidates.size() && !dominated; ++b) {
      if (a == b) continue;
      const auto& ca = candidates[a];
      const auto& cb = candidates[b];
      if (ca.size() > cb.size()) continue;
      if (!std::includes(cb.begin(), cb.end(), ca.begin(), ca.end())) continue;
      // Equal sets: keep the first occurrence only.
      dominated = ca.size() < cb.size() || b < a;
    }
    if (!dominated) maximal.push_back(candidates[a]);
  }
  std::sort(maximal.begin(), maximal.end());

  // Prim on intersection sizes; emission order is parent-before-child.
  const int p = static_cast<int>(maximal.size());
  std::vector<bool> in_tree(p, false);
  std::vector<int> best_w(p, -1), best_parent(p, -1);
  std::vector<int> emitted_parent;
  std::vector<int> new_index(p, -1);
  for (int step = 0; step < p; ++step) {
    int pick = -1;
    for (int k = 0; k < p; ++k) {
      if (in_tree[k]) continue;
      if (pick < 0 || best_w[k] > best_w[pick]) pick = k;
    }
    in_tree[pick] = true;
    new_index[pick] = step;
    plan.cliques.push_back(maximal[pick]);
    plan.parent.push_back(best_parent[pick] < 0 ? -1 : new_index[best_parent[pick]]);
    for (int k = 0; k < p; ++k) {
      if (in_tree[k]) continue;
      int w = intersection_size(maximal[pick], maximal[k]);
      if (w > best_w[k]) {
        best_w[k] = w;
        best_parent[k] = w > 0 ? pick : -1;
      }
    }
  }
  return plan;
}

int smallest_containing_clique(const std::vector<std::vector<int>>& cliques,
                               std::span<const int> vars) {
  int best = -1;
  for (int k = 0; k < static_cast<int>(cliques.size()); ++k) {
    if (!contains_all(cliques[k], vars)) continue;
    if (best < 0 || cliques[k].size() < cliques[best].size()) best = k;
  }
  return best;
}

bool has_running_intersection(const std::vector<std::vector<int>>& cliques) {
  std::set<int> seen;
  for (size_t k = 0; k < cliques.size(); ++k) {
    if (k > 0) {
      std::vector<int> shared;
      for (int v : cliques[k])
        if (seen.count(v)) shared.push_back(v);
      bool covered = false;
      for (size_t j = 0; j < k && !covered; ++j) covered = contains_all(cliques[j], shared);
      if (!covered) return false;
    }
    seen.insert(cliques[k].begin(), cliques[k].end());
  }
  return true;
}

namespace {

// Raises clique orders so that every monomial of p is indexable somewhere.
void host_monomials(const Polynomial& p, const std::vector<std::vector<int>>& cliques,
                    std::vector<int>& clique_orders) {
  for (const auto& [key, c] : p.terms()) {
    std::set<int> vs;
    for (int v : key.alpha.support()) vs.insert(v);
    for (int v : key.beta.support()) vs.insert(v);
    std::vector<int> vars(vs.begin(), vs.end());
    int need = std::max(key.alpha.degree(), key.beta.degree());
    int host = -1;
    for (int k = 0; k < static_cast<int>(cliques.size()); ++k) {
      if (!contains_all(cliques[k], vars)) continue;
      if (clique_orders[k] >= need) {
        host = k;
        break;
      }
    }
    if (host >= 0) continue;
    host = smallest_containing_clique(cliques, vars);
    if (host < 0)
      throw Error(ErrorKind::NoContainingClique,
                  "monomial " + key.alpha.str() + key.beta.str() + " spans several cliques");
    clique_orders[host] = std::max(clique_orders[host], need);
  }
}

}  // namespace

CliquePlan assign_constraints(CliquePlan plan, const Pop& pop, const std::set<int>& high_order,
                              const std::vector<int>& orders) {
  const int m = static_cast<int>(pop.constraints.size());
  if (static_cast<int>(orders.size()) != m)
    throw Error(ErrorKind::DimensionMismatch, "one order per constraint expected");
  plan.orders = orders;
  plan.assignment.clear();
  for (int i = 0; i < m; ++i)
    if (orders[i] < pop.constraints[i].half_degree())
      throw Error(ErrorKind::OrderTooLow, "constraint " + std::to_string(i) + " has order " +
                                              std::to_string(orders[i]) + " < k_i = " +
                                              std::to_string(pop.constraints[i].half_degree()));

  plan.clique_orders.assign(plan.cliques.size(), 1);
  for (int i : high_order) {
    auto vars = pop.constraints[i].poly.variables();
    int k = smallest_containing_clique(plan.cliques, vars);
    if (k < 0)
      throw Error(ErrorKind::NoContainingClique,
                  "constraint " + std::to_string(i) + " is not inside any clique");
    plan.assignment[i] = k;
    plan.clique_orders[k] = std::max(plan.clique_orders[k], orders[i]);
  }

  host_monomials(pop.objective.poly(), plan.cliques, plan.clique_orders);
  for (const auto& q : pop.quadratic_costs) host_monomials(q.poly.poly(), plan.cliques, plan.clique_orders);
  for (int i = 0; i < m; ++i) {
    if (plan.is_high_order(i)) continue;
    const auto& c = pop.constraints[i];
    if (c.flow)
      host_monomials(c.flow->inner, plan.cliques, plan.clique_orders);
    else
      host_monomials(c.poly.poly(), plan.cliques, plan.clique_orders);
  }
  return plan;
}

CliquePlan sparse_plan(const Pop& pop, const std::vector<int>& orders) {
  std::set<int> high;
  for (int i = 0; i < static_cast<int>(pop.constraints.size()); ++i)
    if (orders.at(i) > pop.constraints[i].half_degree()) high.insert(i);
  return assign_constraints(chordal_cliques(build_graphs(pop, high)), pop, high, orders);
}

CliquePlan dense_plan(const Pop& pop, int d) {
  if (d < pop.min_order())
    throw Error(ErrorKind::OrderTooLow, "order " + std::to_string(d) + " below d_min = " +
                                            std::to_string(pop.min_order()));
  CliquePlan plan;
  std::vector<int> all(pop.n);
  for (int k = 0; k < pop.n; ++k) all[k] = k;
  plan.cliques = {all};
  plan.parent = {-1};
  plan.elimination_order = all;
  plan.orders.assign(pop.constraints.size(), d);
  for (int i = 0; i < static_cast<int>(pop.constraints.size()); ++i) plan.assignment[i] = 0;
  plan.clique_orders = {d};
  return plan;
}

nlohmann::json analyze_json(const SparsityGraph& g, const CliquePlan& plan) {
  nlohmann::json j;
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : g.edges) edges.push_back({a, b});
  j["edges"] = edges;
  j["cliques"] = plan.cliques;
  nlohmann::json assign = nlohmann::json::object();
  for (auto [i, k] : plan.assignment) assign[std::to_string(i)] = k;
  j["assignment"] = assign;
  j["orders"] = plan.orders;
  j["clique_orders"] = plan.clique_orders;
  return j;
}

}  // namespace cpop
