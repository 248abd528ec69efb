#pragma once

#include <set>
#include <vector>

#include "netsyn/block_matrix.hpp"

namespace netsyn {

/// Directed interconnection graph. `in_neighbors[i]` holds every j with
/// j -> i, i.e. subsystem j feeds subsystem i (j in E_i). Indices are
/// zero-based; self loops are never stored.
class Topology {
 public:
  Topology() = default;
  explicit Topology(int n) : in_(static_cast<std::size_t>(n)) {}
  explicit Topology(std::vector<std::set<int>> in_neighbors);

  int size() const { return static_cast<int>(in_.size()); }

  /// Adds j to E_i.
  void add_edge(int i, int j);
  void remove_edge(int i, int j);

  /// True iff j in E_i.
  bool has_edge(int i, int j) const;
  /// True iff there is an edge between i and j in either direction.
  bool linked(int i, int j) const { return has_edge(i, j) || has_edge(j, i); }

  const std::set<int>& in_neighbors(int i) const { return in_.at(i); }
  /// F_i = {j : i in E_j}.
  std::set<int> out_neighbors(int i) const;

  int edge_count() const;
  /// Realized density: edges / (N (N - 1)).
  double density() const;

  /// Undirected hop distances; -1 marks unreachable pairs.
  std::vector<std::vector<int>> hop_distances() const;

  bool operator==(const Topology& o) const { return in_ == o.in_; }

 private:
  void check(int i) const;
  std::vector<std::set<int>> in_;
};

/// Structural test of a network matrix: Theta_ij = Theta_ji = 0 whenever i
/// and j are not linked.
bool is_network_matrix(const BlockMatrixd& theta, const Topology& topology,
                       double tol = 0.0);

}  // namespace netsyn
