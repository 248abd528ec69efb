#include "netsyn/lmi/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

#include "netsyn/errors.hpp"

namespace netsyn::lmi {

namespace {

std::string shape(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require_same_shape(const AffineExpr& a, const AffineExpr& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw StructureError("affine expression shapes differ: " +
                         shape(a.rows(), a.cols()) + " vs " +
                         shape(b.rows(), b.cols()));
}

}  // namespace

AffineExpr::AffineExpr(Index rows, Index cols)
    : constant_(MatrixXd::Zero(rows, cols)) {}

AffineExpr::AffineExpr(const MatrixXd& constant) : constant_(constant) {}

AffineExpr::AffineExpr(const VarHandle& var)
    : constant_(MatrixXd::Zero(var.rows, var.cols)) {
  if (var.id < 0) throw StructureError("uninitialized variable handle");
  terms_.push_back({MatrixXd::Identity(var.rows, var.rows), var.id,
                    MatrixXd::Identity(var.cols, var.cols), false});
}

AffineExpr AffineExpr::identity(Index n) {
  return AffineExpr(MatrixXd(MatrixXd::Identity(n, n)));
}

AffineExpr AffineExpr::blocks(
    const std::vector<std::vector<AffineExpr>>& cells) {
  if (cells.empty() || cells[0].empty())
    throw StructureError("empty block expression");
  const std::size_t nr = cells.size(), nc = cells[0].size();
  std::vector<Index> heights(nr), widths(nc);
  for (std::size_t k = 0; k < nr; ++k) {
    if (cells[k].size() != nc)
      throw StructureError("ragged block expression");
    heights[k] = cells[k][0].rows();
  }
  for (std::size_t l = 0; l < nc; ++l) widths[l] = cells[0][l].cols();
  Index total_r = 0, total_c = 0;
  for (Index h : heights) total_r += h;
  for (Index w : widths) total_c += w;

  AffineExpr out(total_r, total_c);
  Index ro = 0;
  for (std::size_t k = 0; k < nr; ++k) {
    Index co = 0;
    for (std::size_t l = 0; l < nc; ++l) {
      const AffineExpr& cell = cells[k][l];
      if (cell.rows() != heights[k] || cell.cols() != widths[l])
        throw StructureError("block (" + std::to_string(k) + "," +
                             std::to_string(l) + ") has shape " +
                             shape(cell.rows(), cell.cols()) + ", expected " +
                             shape(heights[k], widths[l]));
      out.constant_.block(ro, co, heights[k], widths[l]) = cell.constant_;
      for (const Term& t : cell.terms_) {
        Term e{MatrixXd::Zero(total_r, t.left.cols()), t.var,
               MatrixXd::Zero(t.right.rows(), total_c), t.transpose};
        e.left.middleRows(ro, heights[k]) = t.left;
        e.right.middleCols(co, widths[l]) = t.right;
        out.terms_.push_back(std::move(e));
      }
      co += widths[l];
    }
    ro += heights[k];
  }
  return out;
}

AffineExpr AffineExpr::transpose() const {
  AffineExpr out(MatrixXd(constant_.transpose()));
  for (const Term& t : terms_)
    out.terms_.push_back(
        {t.right.transpose(), t.var, t.left.transpose(), !t.transpose});
  return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  require_same_shape(*this, o);
  constant_ += o.constant_;
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) { return *this += -o; }

AffineExpr AffineExpr::operator-() const { return scaled(-1.0); }

AffineExpr AffineExpr::scaled(double s) const {
  AffineExpr out(*this);
  out.constant_ *= s;
  for (Term& t : out.terms_) t.left *= s;
  return out;
}

AffineExpr AffineExpr::left_multiplied(const MatrixXd& m) const {
  if (m.cols() != rows())
    throw StructureError("cannot multiply " + shape(m.rows(), m.cols()) +
                         " by " + shape(rows(), cols()));
  AffineExpr out(MatrixXd(m * constant_));
  for (const Term& t : terms_)
    out.terms_.push_back({m * t.left, t.var, t.right, t.transpose});
  return out;
}

AffineExpr AffineExpr::right_multiplied(const MatrixXd& m) const {
  if (cols() != m.rows())
    throw StructureError("cannot multiply " + shape(rows(), cols()) +
                         " by " + shape(m.rows(), m.cols()));
  AffineExpr out(MatrixXd(constant_ * m));
  for (const Term& t : terms_)
    out.terms_.push_back({t.left, t.var, t.right * m, t.transpose});
  return out;
}

MatrixXd realize(const AffineExpr& expr, const Values& values) {
  MatrixXd out = expr.constant();
  for (const Term& t : expr.terms()) {
    const MatrixXd& x = values.data.at(t.var);
    if (t.transpose)
      out.noalias() += t.left * x.transpose() * t.right;
    else
      out.noalias() += t.left * x * t.right;
  }
  return out;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    default:
      return "inaccurate";
  }
}

VarHandle LmiProblem::add_var(Index rows, Index cols, VarKind kind,
                              const std::string& label) {
  if (rows <= 0 || cols <= 0)
    throw StructureError("variable '" + label + "' has empty shape");
  if (std::find(labels_.begin(), labels_.end(), label) != labels_.end())
    throw StructureError("duplicate variable label '" + label + "'");
  VarHandle v{static_cast<int>(vars_.size()), rows, cols, kind};
  vars_.push_back(v);
  labels_.push_back(label);
  return v;
}

VarHandle LmiProblem::symmetric(Index n, const std::string& label) {
  return add_var(n, n, VarKind::Symmetric, label);
}

VarHandle LmiProblem::rectangular(Index rows, Index cols,
                                  const std::string& label) {
  return add_var(rows, cols, VarKind::Rectangular, label);
}

VarHandle LmiProblem::scalar(const std::string& label) {
  return add_var(1, 1, VarKind::Scalar, label);
}

void LmiProblem::check_expr(const AffineExpr& e) const {
  for (const Term& t : e.terms()) {
    if (t.var < 0 || t.var >= variable_count())
      throw StructureError("expression refers to a foreign variable");
    const VarHandle& v = vars_[t.var];
    const Index r = t.transpose ? v.cols : v.rows;
    const Index c = t.transpose ? v.rows : v.cols;
    if (t.left.cols() != r || t.right.rows() != c)
      throw StructureError("term dimensions do not compose");
  }
}

void LmiProblem::add_psd(const AffineExpr& expr, double margin,
                         const std::string& label) {
  if (expr.rows() != expr.cols())
    throw StructureError("PSD constraint '" + label + "' is not square");
  if (margin < 0) throw ConfigError("PSD margin must be nonnegative");
  check_expr(expr);
  psd_.push_back({expr, margin, label});
}

void LmiProblem::strictify(const AffineExpr& expr, double eps,
                           const std::string& label) {
  if (!(eps > 0))
    throw ConfigError("strictness margin must be positive, got " +
                      std::to_string(eps));
  add_psd(expr, eps, label);
}

void LmiProblem::add_equality(const AffineExpr& lhs, const AffineExpr& rhs) {
  require_same_shape(lhs, rhs);
  AffineExpr d = lhs - rhs;
  check_expr(d);
  eq_.push_back({std::move(d)});
}

void LmiProblem::minimize_norm(const AffineExpr& expr, double weight) {
  if (weight < 0) throw ConfigError("norm weights must be nonnegative");
  check_expr(expr);
  if (weight > 0) norms_.push_back({expr, weight});
}

void LmiProblem::minimize_linear(const AffineExpr& expr, double weight) {
  if (expr.rows() != 1 || expr.cols() != 1)
    throw StructureError("linear objective terms must be 1x1");
  check_expr(expr);
  if (weight != 0) linear_.push_back({expr, weight});
}

double LmiProblem::objective(const Values& values) const {
  double f = 0.0;
  for (const auto& n : norms_) f += n.weight * realize(n.expr, values).norm();
  for (const auto& l : linear_) f += l.weight * realize(l.expr, values)(0, 0);
  return f;
}

SolveOptions default_solve_options() {
  SolveOptions o;
  if (const char* env = std::getenv("NETSYN_SOLVER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0) o.tolerance = v;
  }
  return o;
}

namespace {

/// Maps every variable entry to a coordinate of the conic variable x.
struct Layout {
  std::vector<Index> offset;
  Index size = 0;

  explicit Layout(const LmiProblem& p) {
    for (int k = 0; k < p.variable_count(); ++k) {
      const VarHandle& v = p.variable(k);
      offset.push_back(size);
      size += v.kind == VarKind::Symmetric ? svec_size(v.rows) : v.rows * v.cols;
    }
  }
};

/// vec(F(x)) = coef * x + c0 (column-major vec).
struct Lowered {
  MatrixXd coef;
  VectorXd c0;
};

Lowered lower(const AffineExpr& e, const LmiProblem& p, const Layout& lay,
              Index nx) {
  const Index r = e.rows(), c = e.cols();
  Lowered out{MatrixXd::Zero(r * c, nx),
              Eigen::Map<const VectorXd>(e.constant().data(), r * c)};
  auto add_outer = [&](Index col, const VectorXd& u, const VectorXd& v) {
    Eigen::Map<MatrixXd> m(out.coef.col(col).data(), r, c);
    m.noalias() += u * v.transpose();
  };
  for (const Term& t : e.terms()) {
    const VarHandle& v = p.variable(t.var);
    const Index base = lay.offset[t.var];
    if (v.kind == VarKind::Symmetric) {
      Index k = 0;
      for (Index j = 0; j < v.rows; ++j)
        for (Index i = j; i < v.rows; ++i, ++k) {
          add_outer(base + k, t.left.col(i), t.right.row(j).transpose());
          if (i != j)
            add_outer(base + k, t.left.col(j), t.right.row(i).transpose());
        }
    } else {
      for (Index j = 0; j < v.cols; ++j)
        for (Index i = 0; i < v.rows; ++i) {
          const Index k = base + j * v.rows + i;
          if (t.transpose)
            add_outer(k, t.left.col(j), t.right.row(i).transpose());
          else
            add_outer(k, t.left.col(i), t.right.row(j).transpose());
        }
    }
  }
  return out;
}

Values unpack(const LmiProblem& p, const Layout& lay, const VectorXd& x) {
  Values vals;
  for (int k = 0; k < p.variable_count(); ++k) {
    const VarHandle& v = p.variable(k);
    const Index base = lay.offset[k];
    if (v.kind == VarKind::Symmetric) {
      MatrixXd m(v.rows, v.rows);
      Index q = 0;
      for (Index j = 0; j < v.rows; ++j)
        for (Index i = j; i < v.rows; ++i, ++q) m(i, j) = m(j, i) = x(base + q);
      vals.data.push_back(m);
    } else {
      vals.data.push_back(
          Eigen::Map<const MatrixXd>(x.data() + base, v.rows, v.cols));
    }
  }
  return vals;
}

double min_eig(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::vector<double> slacks(const LmiProblem& p, const Values& vals) {
  std::vector<double> s;
  for (const auto& c : p.psd_constraints())
    s.push_back(min_eig(realize(c.expr, vals)) - c.margin);
  return s;
}

}  // namespace

Solution solve(const LmiProblem& problem, const SolveOptions& options) {
  const Layout lay(problem);
  const Index nvar = lay.size;
  const Index nnorm = static_cast<Index>(problem.norm_terms().size());
  const Index nx = nvar + nnorm;
  const double tol = options.tolerance;

  Solution sol;
  if (nx == 0) {
    sol.values = unpack(problem, lay, VectorXd());
    sol.constraint_slack = slacks(problem, sol.values);
    bool ok = true;
    for (double s : sol.constraint_slack) ok = ok && s >= -tol;
    for (const auto& e : problem.equalities())
      ok = ok && e.expr.constant().cwiseAbs().maxCoeff() <= tol;
    sol.status = ok ? SolveStatus::Optimal : SolveStatus::Infeasible;
    sol.objective = problem.objective(sol.values);
    return sol;
  }

  // Collect cone rows: nonneg (1x1 PSD), SOC (norm epigraphs), PSD.
  std::vector<MatrixXd> g_lin, g_soc, g_psd;
  std::vector<VectorXd> h_lin, h_soc, h_psd;
  ConeDims dims;
  std::vector<double> block_scale;

  for (const auto& con : problem.psd_constraints()) {
    const Index n = con.expr.rows();
    const Lowered lw = lower(con.expr, problem, lay, nx);
    const double scale =
        std::max({1.0, lw.coef.cwiseAbs().maxCoeff(), lw.c0.cwiseAbs().maxCoeff()});
    for (Index j = 0; j < n; ++j)
      for (Index i = j + 1; i < n; ++i) {
        const Index a = j * n + i, b = i * n + j;
        if (std::abs(lw.c0(a) - lw.c0(b)) > 1e-9 * scale ||
            (lw.coef.row(a) - lw.coef.row(b)).cwiseAbs().maxCoeff() > 1e-9 * scale)
          throw StructureError("PSD constraint '" + con.label +
                               "' is not symmetric");
      }
    MatrixXd g(svec_size(n), nx);
    VectorXd h(svec_size(n));
    Index k = 0;
    const double sq2 = std::sqrt(2.0);
    for (Index j = 0; j < n; ++j)
      for (Index i = j; i < n; ++i, ++k) {
        const Index a = j * n + i;
        const double w = (i == j) ? 0.5 : sq2 * 0.5;
        // Symmetrize to absorb rounding in the two triangles.
        const Index b = i * n + j;
        g.row(k) = -w * (lw.coef.row(a) + lw.coef.row(b));
        h(k) = w * (lw.c0(a) + lw.c0(b)) - (i == j ? con.margin : 0.0);
      }
    if (n == 1) {
      g_lin.push_back(g);
      h_lin.push_back(h);
      dims.nonneg += 1;
    } else {
      g_psd.push_back(g);
      h_psd.push_back(h);
      dims.psd.push_back(n);
    }
  }

  VectorXd c = VectorXd::Zero(nx);
  for (Index q = 0; q < nnorm; ++q) {
    const auto& term = problem.norm_terms()[q];
    const Lowered lw = lower(term.expr, problem, lay, nx);
    const Index m = lw.coef.rows();
    MatrixXd g = MatrixXd::Zero(m + 1, nx);
    VectorXd h = VectorXd::Zero(m + 1);
    g(0, nvar + q) = -1.0;
    g.bottomRows(m) = -lw.coef;
    h.tail(m) = lw.c0;
    g_soc.push_back(g);
    h_soc.push_back(h);
    dims.soc.push_back(m + 1);
    c(nvar + q) = term.weight;
  }
  for (const auto& term : problem.linear_terms())
    c += term.weight * lower(term.expr, problem, lay, nx).coef.row(0).transpose();

  ConeProgram prog;
  const Index m = dims.total();
  prog.G.resize(m, nx);
  prog.h.resize(m);
  Index row = 0;
  auto stack = [&](const std::vector<MatrixXd>& gs,
                   const std::vector<VectorXd>& hs) {
    for (std::size_t k = 0; k < gs.size(); ++k) {
      prog.G.middleRows(row, gs[k].rows()) = gs[k];
      prog.h.segment(row, hs[k].size()) = hs[k];
      row += gs[k].rows();
    }
  };
  stack(g_lin, h_lin);
  stack(g_soc, h_soc);
  stack(g_psd, h_psd);
  prog.dims = dims;

  // Equalities, with redundant rows removed.
  {
    std::vector<VectorXd> rows;
    std::vector<double> rhs;
    for (const auto& eq : problem.equalities()) {
      const Lowered lw = lower(eq.expr, problem, lay, nx);
      for (Index a = 0; a < lw.coef.rows(); ++a) {
        rows.push_back(lw.coef.row(a).transpose());
        rhs.push_back(-lw.c0(a));
      }
    }
    if (!rows.empty()) {
      MatrixXd a(rows.size(), nx);
      VectorXd b(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        a.row(k) = rows[k].transpose();
        b(k) = rhs[k];
      }
      Eigen::ColPivHouseholderQR<MatrixXd> qr(a.transpose());
      qr.setThreshold(1e-10);
      const Index rank = qr.rank();
      MatrixXd ab(a.rows(), nx + 1);
      ab << a, b;
      Eigen::ColPivHouseholderQR<MatrixXd> qr_ab(ab.transpose());
      qr_ab.setThreshold(1e-10);
      if (qr_ab.rank() > rank) {
        sol.status = SolveStatus::Infeasible;
        sol.values = unpack(problem, lay, VectorXd::Zero(nx));
        sol.constraint_slack = slacks(problem, sol.values);
        return sol;
      }
      prog.A.resize(rank, nx);
      prog.b.resize(rank);
      for (Index k = 0; k < rank; ++k) {
        const Index idx = qr.colsPermutation().indices()(k);
        prog.A.row(k) = a.row(idx);
        prog.b(k) = b(idx);
      }
    }
  }
  if (prog.A.rows() == 0) {
    prog.A.resize(0, nx);
    prog.b.resize(0);
  }

  const double cscale = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  prog.c = cscale > 0 ? VectorXd(c / cscale) : c;

  ConicOptions copt;
  copt.max_iters = options.max_iters;
  copt.feastol = tol;
  copt.abstol = tol;
  copt.reltol = tol;
  const ConicResult r = solve_cone_program(prog, copt);

  sol.iterations = r.iterations;
  VectorXd x = r.x.size() == nx ? r.x : VectorXd::Zero(nx);
  sol.values = unpack(problem, lay, x);
  sol.objective = problem.objective(sol.values);
  sol.constraint_slack = slacks(problem, sol.values);
  switch (r.status) {
    case ConicStatus::Optimal:
      sol.status = SolveStatus::Optimal;
      break;
    case ConicStatus::PrimalInfeasible:
      sol.status = SolveStatus::Infeasible;
      return sol;
    default:
      sol.status = SolveStatus::Inaccurate;
      break;
  }
  if (sol.status == SolveStatus::Optimal) {
    const auto& cons = problem.psd_constraints();
    for (std::size_t k = 0; k < cons.size(); ++k) {
      const double scale =
          std::max(1.0, realize(cons[k].expr, sol.values).cwiseAbs().maxCoeff());
      if (sol.constraint_slack[k] < -10.0 * tol * scale)
        sol.status = SolveStatus::Inaccurate;
    }
  }
  return sol;
}

}  // namespace netsyn::lmi
