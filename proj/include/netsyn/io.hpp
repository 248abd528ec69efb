#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "netsyn/design.hpp"
#include "netsyn/system.hpp"

namespace netsyn {

using Json = nlohmann::json;

// Indices in every file format are 1-based; "i,j" keys name block (i, j).

Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j, const std::string& where);

Json system_to_json(const NetworkedSystem& sys);
/// Validates shapes and the zero pattern. Edges whose blocks are all zero
/// are kept and reported through `warnings`.
NetworkedSystem system_from_json(const Json& j,
                                 std::vector<std::string>* warnings = nullptr);

NetworkedSystem load_system(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);
void save_system(const NetworkedSystem& sys, const std::string& path);

/// {"kind": "passive" | "strictly_passive" | "l2_gain" | "sector" |
///  "explicit", ...}; explicit specs carry "Q", "S", "R" block maps.
QsrSpec qsr_from_json(const Json& j, const std::vector<Index>& ydims,
                      const std::vector<Index>& udims);
Json qsr_to_json(const QsrSpec& q);

struct SpecFile {
  DesignSpec spec;
  std::optional<CostModel> costs;
};

/// {"designable": [[i,j]...], "removable": [[i,j]...], "fixed": [[i,j]...],
///  "default": "designable" | "fixed", "reference": {"i,j": ...},
///  "intrinsic_output": [i...], "design_inputs": bool, "costs": {...}}.
/// Pairs not listed are fixed if they are edges, otherwise follow "default"
/// (designable when absent).
SpecFile spec_from_json(const Json& j, const NetworkedSystem& sys);
Json spec_to_json(const DesignSpec& spec,
                  const std::optional<CostModel>& costs = std::nullopt);

CostModel cost_model_from_json(const Json& j);
Json cost_model_to_json(const CostModel& c);

/// {"dims": [...], "matrix": [[...]]} or {"dims": [...], "blocks": {...}}.
BlockMatrixd block_matrix_from_json(const Json& j);
Json block_matrix_to_json(const BlockMatrixd& m);

Json read_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);

}  // namespace netsyn
