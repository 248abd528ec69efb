#include "netsyn/dits.hpp"

#include <sstream>

#include "netsyn/dot.hpp"

namespace netsyn {

using lmi::AffineExpr;
using lmi::VarHandle;

std::vector<Index> DitsInstance::dims() const {
  std::vector<Index> d;
  for (const MatrixXd& m : a) d.push_back(m.rows());
  return d;
}

DitsInstance wrap_subsystems(const NetworkedSystem& sys, double feedthrough, IndexMode mode) {
  sys.validate();
  DitsInstance inst;
  inst.feedthrough = feedthrough;
  inst.mode = mode;
  PassivityOptions popt;
  popt.feedthrough = feedthrough;
  popt.nu_floor = feedthrough / 2;
  for (int i = 0; i < sys.size(); ++i) {
    const Index n = sys.nx[i];
    if (n == 0) throw SpecError("subsystem " + std::to_string(i + 1) + " has no states");
    const MatrixXd aii = sys.A.block(i, i);
    const MatrixXd id = MatrixXd::Identity(n, n);
    const PassivityIndices idx =
        estimate_passivity_indices(aii, id, id, MatrixXd::Zero(n, n), mode, popt);
    inst.a.push_back(aii);
    inst.nu.push_back(idx.nu);
    inst.rho.push_back(idx.rho);
  }
  inst.reference = sys.A;
  for (int i = 0; i < sys.size(); ++i) inst.reference.block(i, i).setZero();
  return inst;
}

namespace {

/// t * c for a scalar variable t.
AffineExpr scalar_times(const AffineExpr& t, const MatrixXd& c) {
  AffineExpr out = AffineExpr::zero(c.rows(), c.cols());
  for (Index k = 0; k < c.cols(); ++k) {
    if (c.col(k).isZero(0.0)) continue;
    const MatrixXd ek = MatrixXd::Identity(c.cols(), c.cols()).row(k);
    out += t.left_multiplied(c.col(k)).right_multiplied(ek);
  }
  return out;
}

MatrixXd selector(const std::vector<Index>& dims, int i) {
  Index n = 0, off = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (static_cast<int>(k) < i) off += dims[k];
    n += dims[k];
  }
  MatrixXd s = MatrixXd::Zero(n, dims[static_cast<std::size_t>(i)]);
  s.block(off, 0, s.cols(), s.cols()).setIdentity();
  return s;
}

}  // namespace

DitsResult synthesize_dits(const DitsInstance& inst, const DesignSpec& spec,
                           const MatrixXd& costs, const DitsOptions& opt) {
  const int n = inst.size();
  for (int i = 0; i < n; ++i)
    if (!(inst.nu[static_cast<std::size_t>(i)] > 0))
      throw PreconditionError("subsystem " + std::to_string(i + 1) +
                              ": input passivity index nu = " +
                              std::to_string(inst.nu[static_cast<std::size_t>(i)]) +
                              " is not positive, so R_i < 0 fails");
  if (spec.size() != n) throw SpecError("design spec size does not match the instance");
  const std::vector<Index> dims = inst.dims();
  Index total = 0;
  for (Index d : dims) total += d;

  lmi::LmiProblem prob;
  std::vector<VarHandle> p;
  for (int i = 0; i < n; ++i) {
    p.push_back(prob.scalar("p" + std::to_string(i + 1)));
    prob.add_psd(AffineExpr(p.back()), 1.0, "p floor");
  }
  const VarHandle l = prob.rectangular(total, total, "L");
  const AffineExpr le = l;

  std::vector<MatrixXd> sel;
  for (int i = 0; i < n; ++i) sel.push_back(selector(dims, i));

  AffineExpr neg_rp = AffineExpr::zero(total, total), qp = AffineExpr::zero(total, total);
  MatrixXd x = MatrixXd::Zero(total, total);
  for (int i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const MatrixXd proj = sel[k] * sel[k].transpose();
    neg_rp += scalar_times(AffineExpr(p[k]), inst.nu[k] * proj);
    qp += scalar_times(AffineExpr(p[k]), -inst.rho[k] * proj);
    x += (-0.5 / inst.nu[k]) * proj;  // R_i^-1 S_i
  }
  const AffineExpr ltx = le.transpose().right_multiplied(x);
  prob.strictify(AffineExpr::blocks({{neg_rp, le}, {le.transpose(), -(ltx + ltx.transpose() + qp)}}),
                 opt.eps, "interconnection");

  AffineExpr objective = AffineExpr::zero(total, total);
  bool has_objective = false;
  for (int i = 0; i < n; ++i) {
    const std::size_t ki = static_cast<std::size_t>(i);
    for (int j = 0; j < n; ++j) {
      const std::size_t kj = static_cast<std::size_t>(j);
      const AffineExpr lij = le.left_multiplied(sel[ki].transpose()).right_multiplied(sel[kj]);
      const MatrixXd abar = i == j ? MatrixXd::Zero(dims[ki], dims[kj])
                                   : spec.target(i, j, inst.reference.block(i, j));
      // p_i R_i Abar_ij with R_i = -nu_i I.
      const AffineExpr ref = scalar_times(AffineExpr(p[ki]), -inst.nu[ki] * abar);
      if (i == j || spec.fixed(i, j)) {
        const MatrixXd fixed = i == j ? abar : MatrixXd(inst.reference.block(i, j));
        prob.add_equality(lij, scalar_times(AffineExpr(p[ki]), -inst.nu[ki] * fixed));
        continue;
      }
      const double w = pair_weight(spec, costs, i, j);
      if (w <= 0) continue;
      objective += ((lij - ref) * w).left_multiplied(sel[ki]).right_multiplied(sel[kj].transpose());
      has_objective = true;
    }
  }
  if (has_objective) prob.minimize_norm(objective);

  DitsResult res;
  const lmi::Solution sol = lmi::solve(prob, opt.solver);
  res.status = sol.status;
  res.M = BlockMatrixd(dims, dims);
  if (sol.status == lmi::SolveStatus::Infeasible) {
    res.message = "interconnection LMI is infeasible";
    return res;
  }
  MatrixXd rp = MatrixXd::Zero(total, total), qpn = rp, sp = rp;
  for (int i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double pi = sol[p[k]](0, 0);
    res.p.push_back(pi);
    const MatrixXd proj = sel[k] * sel[k].transpose();
    rp += -pi * inst.nu[k] * proj;
    qpn += -pi * inst.rho[k] * proj;
    sp += 0.5 * pi * proj;
  }
  const MatrixXd m = rp.ldlt().solve(sol[l]);
  res.M.dense() = m;
  for (int i = 0; i < n; ++i) {
    res.M.block(i, i).setZero();
    for (int j = 0; j < n; ++j)
      if (i != j && spec.fixed(i, j)) res.M.block(i, j) = inst.reference.block(i, j);
  }
  const MatrixXd& mm = res.M.dense();
  const MatrixXd form = qpn + sp * mm + mm.transpose() * sp.transpose() + mm.transpose() * rp * mm;
  res.spectral_max = Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (form + form.transpose()),
                                                             Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  res.stability = eigen_stability_oracle(mm + BlockMatrixd::block_diagonal(inst.a).dense());
  std::ostringstream msg;
  if (!(res.spectral_max < 0)) msg << "spectral condition fails (max eigenvalue " << res.spectral_max << ")";
  if (!res.stability.hurwitz) {
    if (!msg.str().empty()) msg << "; ";
    msg << "diag(A_ii) + M is not Hurwitz";
  }
  if (!msg.str().empty()) throw VerificationError("DiTS verification: " + msg.str());
  res.success = true;
  return res;
}

NetworkedSystem apply_interconnection(const NetworkedSystem& sys, const BlockMatrixd& m) {
  NetworkedSystem out = sys;
  Topology t(sys.size());
  for (int i = 0; i < sys.size(); ++i)
    for (int j = 0; j < sys.size(); ++j) {
      if (i == j) continue;
      out.A.block(i, j) = m.block(i, j);
      const bool other = !(sys.B.block_is_zero(i, j) && sys.E.block_is_zero(i, j) &&
                           sys.C.block_is_zero(i, j) && sys.D.block_is_zero(i, j) &&
                           sys.F.block_is_zero(i, j));
      if (other || !m.block_is_zero(i, j)) t.add_edge(i, j);
    }
  out.topology = t;
  return out;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::DeTS:
      return "dets";
    case Method::WeakDiTS:
      return "dits-weak";
    default:
      return "dits-strong";
  }
}

Method method_from_string(const std::string& s) {
  if (s == "dets") return Method::DeTS;
  if (s == "dits-weak") return Method::WeakDiTS;
  if (s == "dits-strong") return Method::StrongDiTS;
  throw ConfigError("unknown method '" + s + "'");
}

std::vector<ComparisonRow> compare_methods(
    const NetworkedSystem& sys, const DesignSpec& spec,
    const std::vector<std::pair<std::string, MatrixXd>>& costs,
    const std::vector<Method>& methods, const ComparisonOptions& opt) {
  std::vector<ComparisonRow> rows;
  std::optional<DitsInstance> weak, strong;
  for (Method method : methods)
    for (const auto& [name, c] : costs) {
      ComparisonRow row;
      row.method = method;
      row.costs = name;
      try {
        if (method == Method::DeTS) {
          SynthesisOptions sopt = opt.synthesis;
          sopt.raise = false;
          const SynthesisResult r = synthesize_stability(sys, spec, c, sopt);
          row.success = r.success;
          row.message = r.message;
          if (r.success) row.system = r.system;
        } else {
          std::optional<DitsInstance>& inst = method == Method::WeakDiTS ? weak : strong;
          if (!inst)
            inst = wrap_subsystems(sys, opt.feedthrough,
                                   method == Method::WeakDiTS ? IndexMode::Weak
                                                              : IndexMode::Strong);
          const DitsResult r = synthesize_dits(*inst, spec, c, opt.dits);
          row.success = r.success;
          row.message = r.message;
          if (r.success) row.system = apply_interconnection(sys, r.M);
        }
      } catch (const Error& e) {
        row.success = false;
        row.message = e.what();
      }
      if (row.system) {
        row.cost = deviation_and_nominal_cost(sys, *row.system, c);
        row.diff = diff_topology(sys.topology, row.system->topology);
        row.stability = eigen_stability_oracle(row.system->A.dense());
        row.dot = to_dot(*row.system, row.diff, row.cost,
                         std::string(to_string(method)) + "_" + name);
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

namespace {

nlohmann::json edges_json(const std::set<std::pair<int, int>>& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [i, j] : s) out.push_back({i + 1, j + 1});
  return out;
}

}  // namespace

nlohmann::json comparison_to_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const ComparisonRow& r : rows) {
    nlohmann::json row = {{"method", to_string(r.method)},
                          {"costs", r.costs},
                          {"success", r.success},
                          {"message", r.message}};
    if (r.system) {
      row["J_dev"] = r.cost.deviation;
      row["J_nom"] = r.cost.nominal;
      row["kept"] = edges_json(r.diff.kept);
      row["added"] = edges_json(r.diff.added);
      row["removed"] = edges_json(r.diff.removed);
      row["max_real_eigenvalue"] = r.stability.max_real;
      row["hurwitz"] = r.stability.hurwitz;
    }
    out.push_back(row);
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "method,costs,success,J_dev,J_nom,kept,added,removed,max_real\n";
  for (const ComparisonRow& r : rows) {
    out << to_string(r.method) << ',' << r.costs << ',' << (r.success ? 1 : 0) << ',';
    if (r.system)
      out << r.cost.deviation << ',' << r.cost.nominal << ',' << r.diff.kept.size() << ','
          << r.diff.added.size() << ',' << r.diff.removed.size() << ','
          << r.stability.max_real;
    else
      out << ",,,,,";
    out << '\n';
  }
  return out.str();
}

}  // namespace netsyn
