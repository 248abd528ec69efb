#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netsyn/analysis.hpp"
#include "netsyn/design.hpp"
#include "netsyn/synthesis.hpp"

namespace netsyn {

/// Subsystem i as x_i' = A_ii x_i + u_i, y_i = x_i + eps u_i, assumed
/// (-rho_i I, I/2, -nu_i I)-dissipative, with the couplings moved into a
/// static interconnection u = M y.
struct DitsInstance {
  std::vector<MatrixXd> a;  // A_ii
  std::vector<double> nu, rho;
  double feedthrough = 0.01;
  IndexMode mode = IndexMode::Strong;
  BlockMatrixd reference;  // M reference: the off-diagonal blocks of A

  int size() const { return static_cast<int>(a.size()); }
  std::vector<Index> dims() const;
};

/// Estimates the indices of every wrapped subsystem with the given
/// feedthrough. Throws SpecError when a subsystem has no states.
DitsInstance wrap_subsystems(const NetworkedSystem& sys, double feedthrough = 0.01,
                             IndexMode mode = IndexMode::Strong);

struct DitsOptions {
  double eps = 1e-6;
  lmi::SolveOptions solver = lmi::default_solve_options();
};

struct DitsResult {
  bool success = false;
  lmi::SolveStatus status = lmi::SolveStatus::Infeasible;
  BlockMatrixd M;
  std::vector<double> p;
  /// lambda_max of Q_p + S_p M + M'S_p' + M'R_p M; negative when certified.
  double spectral_max = 0.0;
  StabilityVerdict stability;  // of diag(A_ii) + M
  std::string message;
};

/// Solves
///
///   [-R_p, L; L', -(L'X + X'L + Q_p)] >= eps I,  p_i >= 1,
///
/// with R_p = diag(p_i R_i I), Q_p = diag(p_i Q_i I), X = diag(R_i^-1 S_i),
/// minimizing ||[c_ij (L_ij - p_i R_i Abar_ij)]||_F over the non-Fixed pairs;
/// Fixed pairs keep M_ij = A_ij and M_ii = 0. Returns M = R_p^-1 L.
/// Throws PreconditionError when some nu_i <= 0 and VerificationError when
/// a solved M fails either post-hoc check.
DitsResult synthesize_dits(const DitsInstance& inst, const DesignSpec& spec,
                           const MatrixXd& costs, const DitsOptions& opt = {});

/// A with its off-diagonal part replaced by M.
NetworkedSystem apply_interconnection(const NetworkedSystem& sys, const BlockMatrixd& m);

enum class Method { DeTS, WeakDiTS, StrongDiTS };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct ComparisonRow {
  Method method = Method::DeTS;
  std::string costs;  // name of the cost matrix
  bool success = false;
  std::string message;
  TopologyCost cost;
  EdgeDiff diff;
  StabilityVerdict stability;
  std::optional<NetworkedSystem> system;
  std::string dot;
};

struct ComparisonOptions {
  SynthesisOptions synthesis;
  DitsOptions dits;
  double feedthrough = 0.01;
};

/// Runs every method under every named cost matrix. Failures are recorded
/// in their rows. Rows are ordered method-major.
std::vector<ComparisonRow> compare_methods(
    const NetworkedSystem& sys, const DesignSpec& spec,
    const std::vector<std::pair<std::string, MatrixXd>>& costs,
    const std::vector<Method>& methods, const ComparisonOptions& opt = {});

nlohmann::json comparison_to_json(const std::vector<ComparisonRow>& rows);
/// method,costs,success,J_dev,J_nom,kept,added,removed,max_real
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace netsyn
