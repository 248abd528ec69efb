#include "netsyn/dot.hpp"

#include <iomanip>
#include <sstream>

namespace netsyn {

std::string to_dot(const NetworkedSystem& sys, const std::optional<EdgeDiff>& diff,
                   const std::optional<TopologyCost>& cost, const std::string& name) {
  std::ostringstream os;
  os << std::setprecision(12);
  if (cost) os << "// J_Dev = " << cost->deviation << ", J_Nom = " << cost->nominal << "\n";
  os << "digraph \"" << name << "\" {\n";
  for (int i = 0; i < sys.size(); ++i) os << "  " << i + 1 << ";\n";
  auto edge = [&](int i, int j, const char* attrs) {
    os << "  " << j + 1 << " -> " << i + 1 << attrs << ";\n";
  };
  for (int i = 0; i < sys.size(); ++i)
    for (int j : sys.topology.in_neighbors(i)) {
      if (!diff)
        edge(i, j, "");
      else if (diff->added.count({i, j}))
        edge(i, j, " [color=green]");
      else
        edge(i, j, " [color=blue]");
    }
  if (diff)
    for (const auto& [i, j] : diff->removed) edge(i, j, " [color=red, style=dashed]");
  os << "}\n";
  return os.str();
}

}  // namespace netsyn
