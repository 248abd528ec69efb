#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace netsyn::lmi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Cone K = R+^nonneg x SOC(soc[0]) x ... x PSD(psd[0]) x ...
/// PSD blocks are stored in svec form (lower triangle, column-major,
/// off-diagonal entries scaled by sqrt(2)).
struct ConeDims {
  Index nonneg = 0;
  std::vector<Index> soc;
  std::vector<Index> psd;  // matrix orders

  Index total() const;
  /// Barrier degree: nonneg + #soc + sum(psd).
  Index degree() const;
};

/// minimize c'x  s.t.  G x + s = h,  s in K,  A x = b.
struct ConeProgram {
  VectorXd c;
  MatrixXd G;
  VectorXd h;
  MatrixXd A;
  VectorXd b;
  ConeDims dims;
};

struct ConicOptions {
  int max_iters = 100;
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  double step = 0.99;
};

enum class ConicStatus { Optimal, PrimalInfeasible, DualInfeasible, Inaccurate };

const char* to_string(ConicStatus s);

struct ConicResult {
  ConicStatus status = ConicStatus::Inaccurate;
  VectorXd x, s, z, y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

/// Dense primal-dual interior-point method on the homogeneous self-dual
/// embedding with Nesterov-Todd scaling and a Mehrotra corrector.
ConicResult solve_cone_program(const ConeProgram& prog,
                               const ConicOptions& options = {});

// svec / smat helpers shared with the LMI lowering.
Index svec_size(Index n);
VectorXd svec(const MatrixXd& x);
MatrixXd smat(const Eigen::Ref<const VectorXd>& v, Index n);

/// True iff v lies in K (closed), up to `tol` on the minimal cone eigenvalue.
bool in_cone(const VectorXd& v, const ConeDims& dims, double tol);

/// Smallest "eigenvalue" of v with respect to K (min over the cone blocks).
double cone_min_eigenvalue(const VectorXd& v, const ConeDims& dims);

}  // namespace netsyn::lmi
