#include "netsyn/io.hpp"

#include <fstream>
#include <sstream>

namespace netsyn {

namespace {

std::pair<int, int> parse_key(const std::string& key, int n,
                              const std::string& where) {
  int i = 0, j = 0;
  char comma = 0;
  std::istringstream is(key);
  if (!(is >> i >> comma >> j) || comma != ',' || !is.eof())
    throw FormatError(where + ": block key '" + key + "' is not of the form i,j");
  if (i < 1 || j < 1 || i > n || j > n)
    throw FormatError(where + ": block key '" + key + "' is out of range");
  return {i - 1, j - 1};
}

std::string key(int i, int j) {
  return std::to_string(i + 1) + "," + std::to_string(j + 1);
}

std::pair<int, int> parse_pair(const Json& p, int n, const std::string& where) {
  if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
      !p[1].is_number_integer())
    throw FormatError(where + ": expected a pair [i, j]");
  const int i = p[0].get<int>(), j = p[1].get<int>();
  if (i < 1 || j < 1 || i > n || j > n)
    throw FormatError(where + ": pair [" + std::to_string(i) + ", " +
                      std::to_string(j) + "] is out of range");
  if (i == j) throw FormatError(where + ": self pairs are not allowed");
  return {i - 1, j - 1};
}

std::vector<Index> parse_dims(const Json& j, int n, bool allow_zero,
                              const std::string& where) {
  std::vector<Index> d;
  if (j.is_number_integer()) {
    d.assign(n, j.get<Index>());
  } else if (j.is_array()) {
    for (const auto& x : j) {
      if (!x.is_number_integer()) throw FormatError(where + ": dims must be integers");
      d.push_back(x.get<Index>());
    }
  } else {
    throw FormatError(where + ": dims must be an integer or a list");
  }
  if (static_cast<int>(d.size()) != n)
    throw FormatError(where + ": expected " + std::to_string(n) + " dims");
  for (Index x : d)
    if (x < 0 || (!allow_zero && x == 0))
      throw FormatError(where + ": invalid dimension " + std::to_string(x));
  return d;
}

void read_blocks(const Json& root, const char* name, BlockMatrixd& m, int n) {
  if (!root.contains(name)) return;
  const Json& blocks = root[name];
  if (!blocks.is_object())
    throw FormatError(std::string(name) + ": expected an object of blocks");
  for (const auto& [k, v] : blocks.items()) {
    const std::string where = std::string(name) + "[" + k + "]";
    const auto [i, j] = parse_key(k, n, where);
    const MatrixXd b = matrix_from_json(v, where);
    if (b.rows() != m.row_dims()[i] || b.cols() != m.col_dims()[j])
      throw FormatError(where + ": expected shape " +
                        std::to_string(m.row_dims()[i]) + "x" +
                        std::to_string(m.col_dims()[j]));
    m.block(i, j) = b;
  }
}

Json write_blocks(const BlockMatrixd& m, bool keep_diagonal) {
  Json out = Json::object();
  for (Index i = 0; i < m.block_rows(); ++i)
    for (Index j = 0; j < m.block_cols(); ++j) {
      const auto b = m.block(i, j);
      if (b.size() == 0) continue;
      if (!(keep_diagonal && i == j) && m.block_is_zero(i, j)) continue;
      out[key(static_cast<int>(i), static_cast<int>(j))] = matrix_to_json(b);
    }
  return out;
}

double number(const Json& j, const char* field, double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j[field].is_number())
    throw FormatError(std::string(field) + " must be a number");
  return j[field].get<double>();
}

}  // namespace

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty())
    throw FormatError(where + ": expected a nested row-major array");
  const auto rows = static_cast<Index>(j.size());
  if (!j[0].is_array()) throw FormatError(where + ": rows must be arrays");
  const auto cols = static_cast<Index>(j[0].size());
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw FormatError(where + ": ragged matrix");
    for (Index c = 0; c < cols; ++c) {
      const Json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) throw FormatError(where + ": entries must be numbers");
      m(r, c) = x.get<double>();
    }
  }
  return m;
}

Json system_to_json(const NetworkedSystem& sys) {
  Json j;
  j["N"] = sys.size();
  j["dims"] = {{"x", sys.nx}, {"u", sys.nu}, {"w", sys.nw}, {"y", sys.ny}};
  Json edges = Json::array();
  for (int i = 0; i < sys.size(); ++i)
    for (int e : sys.topology.in_neighbors(i)) edges.push_back({i + 1, e + 1});
  j["edges"] = edges;
  j["A"] = write_blocks(sys.A, true);
  const std::pair<const BlockMatrixd*, const char*> rest[] = {
      {&sys.B, "B"}, {&sys.C, "C"}, {&sys.D, "D"}, {&sys.E, "E"}, {&sys.F, "F"}};
  for (const auto& [m, name] : rest) {
    Json b = write_blocks(*m, false);
    if (!b.empty()) j[name] = b;
  }
  if (sys.K) j["K"] = write_blocks(*sys.K, true);
  return j;
}

NetworkedSystem system_from_json(const Json& j,
                                 std::vector<std::string>* warnings) {
  if (!j.is_object()) throw FormatError("system: expected a JSON object");
  if (!j.contains("N") || !j["N"].is_number_integer())
    throw FormatError("system: missing integer field N");
  const int n = j["N"].get<int>();
  if (n < 1) throw FormatError("system: N must be positive");
  if (!j.contains("dims") || !j["dims"].is_object() || !j["dims"].contains("x"))
    throw FormatError("system: missing dims.x");
  const Json& dims = j["dims"];
  auto opt_dims = [&](const char* f) {
    return dims.contains(f) ? parse_dims(dims[f], n, true, std::string("dims.") + f)
                            : std::vector<Index>(n, 0);
  };
  Topology topo(n);
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) throw FormatError("edges: expected a list");
    for (const auto& e : j["edges"]) {
      const auto [a, b] = parse_pair(e, n, "edges");
      topo.add_edge(a, b);
    }
  }
  NetworkedSystem sys = NetworkedSystem::zeros(
      topo, parse_dims(dims["x"], n, false, "dims.x"), opt_dims("u"),
      opt_dims("w"), opt_dims("y"));
  read_blocks(j, "A", sys.A, n);
  read_blocks(j, "B", sys.B, n);
  read_blocks(j, "C", sys.C, n);
  read_blocks(j, "D", sys.D, n);
  read_blocks(j, "E", sys.E, n);
  read_blocks(j, "F", sys.F, n);
  if (j.contains("K")) {
    sys.K = BlockMatrixd(sys.nu, sys.nx);
    read_blocks(j, "K", *sys.K, n);
  }
  try {
    sys.validate();
  } catch (const StructureError& e) {
    throw FormatError(std::string("system: ") + e.what());
  }
  if (warnings)
    for (const auto& [a, b] : sys.vacuous_edges())
      warnings->push_back("vacuous edge: " + std::to_string(b + 1) + " -> " +
                          std::to_string(a + 1) + " has only zero blocks");
  return sys;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << j.dump(2) << "\n";
}

NetworkedSystem load_system(const std::string& path,
                            std::vector<std::string>* warnings) {
  try {
    return system_from_json(read_json_file(path), warnings);
  } catch (const Json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_system(const NetworkedSystem& sys, const std::string& path) {
  write_json_file(system_to_json(sys), path);
}

QsrSpec qsr_from_json(const Json& j, const std::vector<Index>& ydims,
                      const std::vector<Index>& udims) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw FormatError("qsr: missing kind");
  const std::string kind = j["kind"];
  QsrSpec q;
  if (kind == "passive") {
    q = QsrSpec::passive(ydims, udims, number(j, "delta", 1e-3));
  } else if (kind == "strictly_passive") {
    q = QsrSpec::strictly_passive(ydims, udims, number(j, "nu", 0.0),
                                  number(j, "rho", 0.0));
  } else if (kind == "l2_gain") {
    q = QsrSpec::l2_gain(ydims, udims, number(j, "gamma", 1.0));
  } else if (kind == "sector") {
    q = QsrSpec::sector(ydims, udims, number(j, "a", 0.0), number(j, "b", 1.0));
  } else if (kind == "explicit") {
    const int n = static_cast<int>(ydims.size());
    q = {BlockMatrixd(ydims, ydims), BlockMatrixd(ydims, udims),
         BlockMatrixd(udims, udims)};
    read_blocks(j, "Q", q.Q, n);
    read_blocks(j, "S", q.S, n);
    read_blocks(j, "R", q.R, n);
  } else {
    throw FormatError("qsr: unknown kind '" + kind + "'");
  }
  q.validate();
  return q;
}

Json qsr_to_json(const QsrSpec& q) {
  return {{"kind", "explicit"},
          {"Q", write_blocks(q.Q, false)},
          {"S", write_blocks(q.S, false)},
          {"R", write_blocks(q.R, false)}};
}

CostModel cost_model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw FormatError("costs: missing kind");
  const std::string kind = j["kind"];
  if (kind == "fixed")
    return CostModel::fixed_levels(number(j, "c_exist", 1.0), number(j, "c_new", 10.0));
  if (kind == "distance")
    return CostModel::graph_distance(number(j, "c_base", 1.0), number(j, "c_max", -1.0));
  if (kind == "explicit") {
    if (!j.contains("matrix")) throw FormatError("costs: explicit needs matrix");
    return CostModel::explicit_matrix(matrix_from_json(j["matrix"], "costs.matrix"));
  }
  throw FormatError("costs: unknown kind '" + kind + "'");
}

Json cost_model_to_json(const CostModel& c) {
  switch (c.kind) {
    case CostModel::Kind::FixedLevels:
      return {{"kind", "fixed"}, {"c_exist", c.c_exist}, {"c_new", c.c_new}};
    case CostModel::Kind::GraphDistance:
      return {{"kind", "distance"}, {"c_base", c.c_base}, {"c_max", c.c_max}};
    default:
      return {{"kind", "explicit"}, {"matrix", matrix_to_json(c.explicit_costs)}};
  }
}

SpecFile spec_from_json(const Json& j, const NetworkedSystem& sys) {
  if (!j.is_object()) throw FormatError("spec: expected a JSON object");
  const int n = sys.size();
  Designation dflt = Designation::Designable;
  if (j.contains("default")) {
    const std::string d = j["default"];
    if (d == "fixed")
      dflt = Designation::Fixed;
    else if (d != "designable")
      throw FormatError("spec.default must be 'designable' or 'fixed'");
  }
  SpecFile out;
  out.spec = DesignSpec::uniform(n, dflt);
  for (int i = 0; i < n; ++i)
    for (int e : sys.topology.in_neighbors(i))
      out.spec.designation[i][e] = Designation::Fixed;
  const std::pair<const char*, Designation> lists[] = {
      {"fixed", Designation::Fixed},
      {"designable", Designation::Designable},
      {"removable", Designation::Removable}};
  for (const auto& [field, d] : lists) {
    if (!j.contains(field)) continue;
    if (!j[field].is_array())
      throw FormatError(std::string("spec.") + field + ": expected a list");
    for (const auto& p : j[field]) {
      const auto [a, b] = parse_pair(p, n, std::string("spec.") + field);
      out.spec.designation[a][b] = d;
    }
  }
  if (j.contains("reference")) {
    for (const auto& [k, v] : j["reference"].items()) {
      const std::string where = "spec.reference[" + k + "]";
      const auto [a, b] = parse_key(k, n, where);
      const MatrixXd m = matrix_from_json(v, where);
      if (m.rows() != sys.nx[a] || m.cols() != sys.nx[b])
        throw FormatError(where + ": wrong shape");
      out.spec.reference[{a, b}] = m;
    }
  }
  if (j.contains("intrinsic_output"))
    for (const auto& x : j["intrinsic_output"]) {
      const int i = x.get<int>();
      if (i < 1 || i > n) throw FormatError("spec.intrinsic_output: out of range");
      out.spec.intrinsic_output[i - 1] = true;
    }
  if (j.contains("design_inputs")) out.spec.design_inputs = j["design_inputs"].get<bool>();
  if (j.contains("removal_cost_factor"))
    out.spec.removal_cost_factor = number(j, "removal_cost_factor", 1e6);
  if (j.contains("costs")) out.costs = cost_model_from_json(j["costs"]);
  return out;
}

Json spec_to_json(const DesignSpec& spec, const std::optional<CostModel>& costs) {
  Json j;
  j["default"] = "fixed";
  Json fixed = Json::array(), designable = Json::array(), removable = Json::array();
  for (int i = 0; i < spec.size(); ++i)
    for (int k = 0; k < spec.size(); ++k) {
      if (i == k) continue;
      const Json p = {i + 1, k + 1};
      switch (spec.at(i, k)) {
        case Designation::Fixed:
          fixed.push_back(p);
          break;
        case Designation::Designable:
          designable.push_back(p);
          break;
        case Designation::Removable:
          removable.push_back(p);
          break;
      }
    }
  j["fixed"] = fixed;
  j["designable"] = designable;
  j["removable"] = removable;
  Json ref = Json::object();
  for (const auto& [p, m] : spec.reference) ref[key(p.first, p.second)] = matrix_to_json(m);
  j["reference"] = ref;
  Json intrinsic = Json::array();
  for (int i = 0; i < spec.size(); ++i)
    if (spec.intrinsic_output[i]) intrinsic.push_back(i + 1);
  j["intrinsic_output"] = intrinsic;
  j["design_inputs"] = spec.design_inputs;
  j["removal_cost_factor"] = spec.removal_cost_factor;
  if (costs) j["costs"] = cost_model_to_json(*costs);
  return j;
}

BlockMatrixd block_matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dims"))
    throw FormatError("block matrix: missing dims");
  if (!j["dims"].is_array()) throw FormatError("block matrix: dims must be a list");
  const int n = static_cast<int>(j["dims"].size());
  const auto dims = parse_dims(j["dims"], n, false, "dims");
  BlockMatrixd m = BlockMatrixd::zero(dims);
  if (j.contains("matrix")) {
    const MatrixXd d = matrix_from_json(j["matrix"], "matrix");
    if (d.rows() != m.rows() || d.cols() != m.cols())
      throw FormatError("matrix: does not match dims");
    m.dense() = d;
  } else {
    read_blocks(j, "blocks", m, n);
  }
  return m;
}

Json block_matrix_to_json(const BlockMatrixd& m) {
  return {{"dims", m.row_dims()}, {"matrix", matrix_to_json(m.dense())}};
}

}  // namespace netsyn
