#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "netsyn/lmi/conic_solver.hpp"

namespace netsyn::lmi {

enum class VarKind { Symmetric, Rectangular, Scalar };

/// Handle to a matrix decision variable owned by an LmiProblem.
struct VarHandle {
  int id = -1;
  Index rows = 0;
  Index cols = 0;
  VarKind kind = VarKind::Rectangular;
};

/// One term left * X * right, or left * X' * right when `transpose` is set.
struct Term {
  MatrixXd left;
  int var = -1;
  MatrixXd right;
  bool transpose = false;
};

/// Matrix-valued expression affine in the decision variables.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(Index rows, Index cols);
  AffineExpr(const MatrixXd& constant);  // NOLINT: implicit on purpose
  AffineExpr(const VarHandle& var);      // NOLINT

  static AffineExpr zero(Index rows, Index cols) { return {rows, cols}; }
  static AffineExpr identity(Index n);

  /// Assembles a block expression; every cell in row k has the same row
  /// count and every cell in column l the same column count.
  static AffineExpr blocks(const std::vector<std::vector<AffineExpr>>& cells);

  Index rows() const { return constant_.rows(); }
  Index cols() const { return constant_.cols(); }
  const MatrixXd& constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  AffineExpr transpose() const;

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr operator-() const;

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  AffineExpr scaled(double s) const;
  AffineExpr left_multiplied(const MatrixXd& m) const;
  AffineExpr right_multiplied(const MatrixXd& m) const;

  // Hidden friends: only found when an operand is an AffineExpr.
  friend AffineExpr operator*(double s, const AffineExpr& e) { return e.scaled(s); }
  friend AffineExpr operator*(const AffineExpr& e, double s) { return e.scaled(s); }
  friend AffineExpr operator*(const MatrixXd& m, const AffineExpr& e) {
    return e.left_multiplied(m);
  }
  friend AffineExpr operator*(const AffineExpr& e, const MatrixXd& m) {
    return e.right_multiplied(m);
  }

 private:
  MatrixXd constant_;
  std::vector<Term> terms_;
};

/// Variable values, indexed by VarHandle::id.
struct Values {
  std::vector<MatrixXd> data;
  const MatrixXd& operator[](const VarHandle& v) const { return data.at(v.id); }
};

MatrixXd realize(const AffineExpr& expr, const Values& values);

struct PsdConstraint {
  AffineExpr expr;
  double margin = 0.0;
  std::string label;
};

class LmiProblem {
 public:
  VarHandle symmetric(Index n, const std::string& label);
  VarHandle rectangular(Index rows, Index cols, const std::string& label);
  VarHandle scalar(const std::string& label);

  /// expr >= margin * I. The expression must be square and symmetric.
  void add_psd(const AffineExpr& expr, double margin = 0.0,
               const std::string& label = "");
  /// expr >= eps * I with eps > 0; this is how strict inequalities are posed.
  void strictify(const AffineExpr& expr, double eps,
                 const std::string& label = "");
  /// lhs == rhs entrywise.
  void add_equality(const AffineExpr& lhs, const AffineExpr& rhs);

  /// Adds weight * ||expr||_F to the objective.
  void minimize_norm(const AffineExpr& expr, double weight = 1.0);
  /// Adds weight * expr to the objective; expr must be 1x1.
  void minimize_linear(const AffineExpr& expr, double weight = 1.0);

  int variable_count() const { return static_cast<int>(vars_.size()); }
  const VarHandle& variable(int id) const { return vars_.at(id); }
  const std::string& label(int id) const { return labels_.at(id); }
  const std::vector<PsdConstraint>& psd_constraints() const { return psd_; }
  bool has_objective() const { return !norms_.empty() || !linear_.empty(); }

  /// Objective value at the given point.
  double objective(const Values& values) const;

  struct Equality {
    AffineExpr expr;  // == 0
  };
  struct NormTerm {
    AffineExpr expr;
    double weight;
  };

  const std::vector<Equality>& equalities() const { return eq_; }
  const std::vector<NormTerm>& norm_terms() const { return norms_; }
  const std::vector<NormTerm>& linear_terms() const { return linear_; }

 private:
  VarHandle add_var(Index rows, Index cols, VarKind kind,
                    const std::string& label);
  void check_expr(const AffineExpr& e) const;

  std::vector<VarHandle> vars_;
  std::vector<std::string> labels_;
  std::vector<PsdConstraint> psd_;
  std::vector<Equality> eq_;
  std::vector<NormTerm> norms_;
  std::vector<NormTerm> linear_;
};

enum class SolveStatus { Optimal, Infeasible, Inaccurate };

const char* to_string(SolveStatus s);

struct SolveOptions {
  /// Solver tolerance; the NETSYN_SOLVER_TOL environment variable overrides
  /// the default when set.
  double tolerance = 1e-8;
  int max_iters = 100;
};

/// Default options with the environment override applied.
SolveOptions default_solve_options();

struct Solution {
  SolveStatus status = SolveStatus::Inaccurate;
  Values values;
  double objective = 0.0;
  /// lambda_min(expr) - margin per PSD constraint, at the returned point.
  std::vector<double> constraint_slack;
  int iterations = 0;

  const MatrixXd& operator[](const VarHandle& v) const { return values[v]; }
  bool optimal() const { return status == SolveStatus::Optimal; }
};

Solution solve(const LmiProblem& problem,
               const SolveOptions& options = default_solve_options());

}  // namespace netsyn::lmi
