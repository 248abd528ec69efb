#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netsyn/block_matrix.hpp"
#include "netsyn/topology.hpp"

namespace netsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Linear networked system
///   x' = A x + B u + E w,   y = C x + D u + F w,   optionally u = K x.
/// Block (i, j) of every matrix couples subsystem j into subsystem i and must
/// vanish unless j is i or an in-neighbor of i.
struct NetworkedSystem {
  Topology topology;
  std::vector<Index> nx, nu, nw, ny;
  BlockMatrixd A, B, C, D, E, F;
  std::optional<BlockMatrixd> K;

  /// All matrices zero with the given partitions.
  static NetworkedSystem zeros(const Topology& topology, std::vector<Index> nx,
                               std::vector<Index> nu, std::vector<Index> nw,
                               std::vector<Index> ny);

  int size() const { return topology.size(); }

  /// Checks partitions and the zero pattern; throws StructureError.
  void validate(double tol = 0.0) const;

  /// Declared edges whose blocks are all zero.
  std::vector<std::pair<int, int>> vacuous_edges(double tol = 0.0) const;

  /// Edges j -> i for which some coupling block (A, B, E, C, D, F or K) is
  /// nonzero beyond `tol`.
  Topology realized_topology(double tol = 0.0) const;

  /// A + B K (A when no gain is present).
  MatrixXd closed_loop_a() const;
};

/// Quadratic supply rate [y; u]' [Q S; S' R] [y; u].
struct QsrSpec {
  BlockMatrixd Q, S, R;

  /// Checks -Q > 0, R = R' and the partition shapes; throws SpecError.
  void validate(double tol = 1e-12) const;

  /// Q = -delta I, S = I/2, R = 0; passivity with a small output margin so
  /// that -Q stays definite.
  static QsrSpec passive(const std::vector<Index>& ydims,
                         const std::vector<Index>& udims, double delta = 1e-3);
  /// Q = -rho I, S = I/2, R = -nu I.
  static QsrSpec strictly_passive(const std::vector<Index>& ydims,
                                  const std::vector<Index>& udims, double nu,
                                  double rho);
  /// Q = -I, S = 0, R = gamma^2 I.
  static QsrSpec l2_gain(const std::vector<Index>& ydims,
                         const std::vector<Index>& udims, double gamma);
  /// Q = -I, S = (a + b)/2 I, R = -a b I, i.e. (y - a u)'(b u - y) >= 0.
  static QsrSpec sector(const std::vector<Index>& ydims,
                        const std::vector<Index>& udims, double a, double b);
};

}  // namespace netsyn
