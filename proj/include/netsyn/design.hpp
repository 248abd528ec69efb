#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "netsyn/system.hpp"

namespace netsyn {

enum class Designation { Fixed, Designable, Removable };

const char* to_string(Designation d);

/// Which interconnection blocks a synthesis may change, toward what target,
/// and at what price.
///
/// Pair (i, j) refers to the block coupling j into i. Designable pairs are
/// pulled toward their reference (default: the system's current block);
/// Removable pairs are pulled toward zero at `removal_cost_factor` times the
/// largest cost.
struct DesignSpec {
  std::vector<std::vector<Designation>> designation;
  std::map<std::pair<int, int>, MatrixXd> reference;
  /// Per subsystem: output matrices C_ii and D_ii become variables.
  std::vector<bool> intrinsic_output;
  /// B (resp. E) blocks follow the designation of the A block of the pair.
  bool design_inputs = false;
  double removal_cost_factor = 1e6;

  int size() const { return static_cast<int>(designation.size()); }
  Designation at(int i, int j) const { return designation.at(i).at(j); }
  bool fixed(int i, int j) const { return at(i, j) == Designation::Fixed; }

  /// Existing edges fixed, every absent pair designable toward zero.
  static DesignSpec free_non_edges(const NetworkedSystem& sys);
  /// Nothing designable.
  static DesignSpec all_fixed(int n);
  /// Every off-diagonal pair designated `d`.
  static DesignSpec uniform(int n, Designation d);

  /// Objective target for pair (i, j) given the current A block.
  MatrixXd target(int i, int j, const MatrixXd& current) const;
};

struct CostModel {
  enum class Kind { FixedLevels, GraphDistance, Explicit };
  Kind kind = Kind::FixedLevels;
  double c_exist = 1.0;
  double c_new = 10.0;
  double c_base = 1.0;
  /// Cost of unreachable pairs; negative means c_base * 10 * diameter.
  double c_max = -1.0;
  MatrixXd explicit_costs;

  static CostModel fixed_levels(double c_exist = 1.0, double c_new = 10.0);
  static CostModel graph_distance(double c_base = 1.0, double c_max = -1.0);
  static CostModel explicit_matrix(const MatrixXd& c);
};

const char* to_string(CostModel::Kind k);

/// c_ij for every ordered pair; the diagonal is zero.
MatrixXd cost_matrix(const CostModel& model, const Topology& initial);

struct TopologyCost {
  double deviation = 0.0;  // sum_{i != j} c_ij ||A*_ij - Abar_ij||_F
  double nominal = 0.0;    // sum_{i != j} ||A*_ij||_F
};

TopologyCost deviation_and_nominal_cost(const NetworkedSystem& initial,
                                        const NetworkedSystem& synthesized,
                                        const MatrixXd& costs);

/// Edges classified against the initial topology.
struct EdgeDiff {
  std::set<std::pair<int, int>> kept, added, removed;
};

EdgeDiff diff_topology(const Topology& initial, const Topology& result);

}  // namespace netsyn
