#pragma once

#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cpop/pop.hpp"

namespace cpop {

// Undirected graph on the problem variables; edges stored with i < j.
struct SparsityGraph {
  int n = 0;
  std::set<std::pair<int, int>> edges;

  void add_edge(int i, int j);
  bool has_edge(int i, int j) const;
  std::vector<std::set<int>> adjacency() const;
};

struct CliquePlan {
  // Sorted vertex lists in running-intersection order.
  std::vector<std::vector<int>> cliques;
  // Clique-tree parent of each clique, -1 for the root of each component.
  std::vector<int> parent;
  std::vector<int> elimination_order;
  // High-order constraint index -> clique index.
  std::map<int, int> assignment;
  // Relaxation order d_i per constraint.
  std::vector<int> orders;
  // Moment order per clique.
  std::vector<int> clique_orders;

  bool is_high_order(int i) const { return assignment.count(i) != 0; }
};

// Monomial sparsity graph plus the complete graph on the variables of every
// high-order constraint.
SparsityGraph build_graphs(const Pop& pop, const std::set<int>& high_order);

// Minimum-degree chordal extension (lowest index breaks ties) and its maximal
// cliques, ordered along a maximum-weight clique tree.
CliquePlan chordal_cliques(const SparsityGraph& g);

// Completes `plan`: assigns high-order constraints to the smallest containing
// clique (lowest index on ties) and sets per-clique moment orders.
// Throws NoContainingClique or OrderTooLow.
CliquePlan assign_constraints(CliquePlan plan, const Pop& pop, const std::set<int>& high_order,
                              const std::vector<int>& orders);

// Sparse plan for per-constraint orders; constraint i is high-order iff
// orders[i] > k_i.
CliquePlan sparse_plan(const Pop& pop, const std::vector<int>& orders);

// Single clique {0..n-1} at order d with every constraint high-order.
CliquePlan dense_plan(const Pop& pop, int d);

// Smallest clique (then lowest index) containing all of `vars`, or -1.
int smallest_containing_clique(const std::vector<std::vector<int>>& cliques,
                               std::span<const int> vars);

bool has_running_intersection(const std::vector<std::vector<int>>& cliques);

// Graph with fill edges from eliminating in `order`.
SparsityGraph eliminate(const SparsityGraph& g, const std::vector<int>& order);

nlohmann::json analyze_json(const SparsityGraph& g, const CliquePlan& plan);

}  // namespace cpop
