#pragma once

#include <optional>
#include <string>

#include "netsyn/design.hpp"

namespace netsyn {

/// Graphviz digraph with an arrow j -> i for every j in E_i. With a diff,
/// kept edges are blue, added green and removed red (drawn dashed, since
/// they are absent from `sys`). A cost, when given, goes into a header
/// comment.
std::string to_dot(const NetworkedSystem& sys,
                   const std::optional<EdgeDiff>& diff = std::nullopt,
                   const std::optional<TopologyCost>& cost = std::nullopt,
                   const std::string& name = "network");

}  // namespace netsyn
