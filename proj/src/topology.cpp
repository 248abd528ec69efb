#include "netsyn/topology.hpp"

#include <deque>
#include <string>

namespace netsyn {

Topology::Topology(std::vector<std::set<int>> in_neighbors)
    : in_(std::move(in_neighbors)) {
  for (int i = 0; i < size(); ++i) {
    for (int j : in_[i]) {
      check(j);
      if (j == i) throw StructureError("self loops are not edges");
    }
  }
}

void Topology::check(int i) const {
  if (i < 0 || i >= size())
    throw StructureError("subsystem index " + std::to_string(i) +
                         " out of range");
}

void Topology::add_edge(int i, int j) {
  check(i);
  check(j);
  if (i == j) throw StructureError("self loops are not edges");
  in_[i].insert(j);
}

void Topology::remove_edge(int i, int j) {
  check(i);
  check(j);
  in_[i].erase(j);
}

bool Topology::has_edge(int i, int j) const {
  check(i);
  check(j);
  return in_[i].count(j) > 0;
}

std::set<int> Topology::out_neighbors(int i) const {
  check(i);
  std::set<int> out;
  for (int j = 0; j < size(); ++j)
    if (in_[j].count(i)) out.insert(j);
  return out;
}

int Topology::edge_count() const {
  int e = 0;
  for (const auto& s : in_) e += static_cast<int>(s.size());
  return e;
}

double Topology::density() const {
  const int n = size();
  if (n < 2) return 0.0;
  return static_cast<double>(edge_count()) / (n * (n - 1));
}

std::vector<std::vector<int>> Topology::hop_distances() const {
  const int n = size();
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j : in_[i]) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::deque<int> q{s};
    dist[s][s] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int v : adj[u]) {
        if (dist[s][v] < 0) {
          dist[s][v] = dist[s][u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  return dist;
}

bool is_network_matrix(const BlockMatrixd& theta, const Topology& topology,
                       double tol) {
  if (!theta.square_partitioned() || theta.block_rows() != topology.size())
    throw StructureError("network matrix partition does not match topology");
  const int n = topology.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!topology.linked(i, j) &&
          (!theta.block_is_zero(i, j, tol) || !theta.block_is_zero(j, i, tol)))
        return false;
  return true;
}

}  // namespace netsyn
