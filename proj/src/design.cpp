#include "netsyn/design.hpp"

#include <algorithm>

namespace netsyn {

const char* to_string(Designation d) {
  switch (d) {
    case Designation::Fixed:
      return "fixed";
    case Designation::Designable:
      return "designable";
    default:
      return "removable";
  }
}

const char* to_string(CostModel::Kind k) {
  switch (k) {
    case CostModel::Kind::FixedLevels:
      return "fixed";
    case CostModel::Kind::GraphDistance:
      return "distance";
    default:
      return "explicit";
  }
}

DesignSpec DesignSpec::uniform(int n, Designation d) {
  DesignSpec s;
  s.designation.assign(n, std::vector<Designation>(n, d));
  for (int i = 0; i < n; ++i) s.designation[i][i] = Designation::Fixed;
  s.intrinsic_output.assign(n, false);
  return s;
}

DesignSpec DesignSpec::all_fixed(int n) { return uniform(n, Designation::Fixed); }

DesignSpec DesignSpec::free_non_edges(const NetworkedSystem& sys) {
  DesignSpec s = uniform(sys.size(), Designation::Designable);
  for (int i = 0; i < sys.size(); ++i)
    for (int j : sys.topology.in_neighbors(i)) s.designation[i][j] = Designation::Fixed;
  return s;
}

MatrixXd DesignSpec::target(int i, int j, const MatrixXd& current) const {
  if (at(i, j) == Designation::Removable)
    return MatrixXd::Zero(current.rows(), current.cols());
  const auto it = reference.find({i, j});
  if (it == reference.end()) return current;
  if (it->second.rows() != current.rows() || it->second.cols() != current.cols())
    throw SpecError("reference block has the wrong shape");
  return it->second;
}

CostModel CostModel::fixed_levels(double c_exist, double c_new) {
  CostModel m;
  m.kind = Kind::FixedLevels;
  m.c_exist = c_exist;
  m.c_new = c_new;
  return m;
}

CostModel CostModel::graph_distance(double c_base, double c_max) {
  CostModel m;
  m.kind = Kind::GraphDistance;
  m.c_base = c_base;
  m.c_max = c_max;
  return m;
}

CostModel CostModel::explicit_matrix(const MatrixXd& c) {
  CostModel m;
  m.kind = Kind::Explicit;
  m.explicit_costs = c;
  return m;
}

MatrixXd cost_matrix(const CostModel& model, const Topology& initial) {
  const int n = initial.size();
  MatrixXd c = MatrixXd::Zero(n, n);
  switch (model.kind) {
    case CostModel::Kind::FixedLevels:
      if (model.c_exist < 0 || model.c_new < 0)
        throw ConfigError("cost levels must be nonnegative");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) c(i, j) = initial.has_edge(i, j) ? model.c_exist : model.c_new;
      break;
    case CostModel::Kind::GraphDistance: {
      if (model.c_base < 0) throw ConfigError("c_base must be nonnegative");
      const auto d = initial.hop_distances();
      int diameter = 1;
      for (const auto& row : d)
        for (int x : row) diameter = std::max(diameter, x);
      const double cmax =
          model.c_max >= 0 ? model.c_max : model.c_base * 10.0 * diameter;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) c(i, j) = d[i][j] < 0 ? cmax : model.c_base * d[i][j];
      break;
    }
    case CostModel::Kind::Explicit:
      if (model.explicit_costs.rows() != n || model.explicit_costs.cols() != n)
        throw ConfigError("explicit cost matrix must be N x N");
      if ((model.explicit_costs.array() < 0).any())
        throw ConfigError("costs must be nonnegative");
      c = model.explicit_costs;
      break;
  }
  return c;
}

TopologyCost deviation_and_nominal_cost(const NetworkedSystem& initial,
                                        const NetworkedSystem& synthesized,
                                        const MatrixXd& costs) {
  if (!initial.A.same_partition(synthesized.A))
    throw StructureError("systems have different partitions");
  const int n = initial.size();
  if (costs.rows() != n || costs.cols() != n)
    throw StructureError("cost matrix must be N x N");
  TopologyCost out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto a_star = synthesized.A.block(i, j);
      out.deviation += costs(i, j) * (a_star - initial.A.block(i, j)).norm();
      out.nominal += a_star.norm();
    }
  return out;
}

EdgeDiff diff_topology(const Topology& initial, const Topology& result) {
  if (initial.size() != result.size())
    throw StructureError("topologies have different sizes");
  EdgeDiff d;
  for (int i = 0; i < initial.size(); ++i)
    for (int j = 0; j < initial.size(); ++j) {
      if (i == j) continue;
      const bool a = initial.has_edge(i, j), b = result.has_edge(i, j);
      if (a && b) d.kept.insert({i, j});
      if (!a && b) d.added.insert({i, j});
      if (a && !b) d.removed.insert({i, j});
    }
  return d;
}

}  // namespace netsyn
