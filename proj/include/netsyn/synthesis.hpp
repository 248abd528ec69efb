#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netsyn/analysis.hpp"
#include "netsyn/decomp.hpp"
#include "netsyn/design.hpp"

namespace netsyn {

enum class SynthesisMode { Stability, Stabilizability, Dissipativity, Dissipativation };

const char* to_string(SynthesisMode m);

struct SynthesisOptions {
  double eps = 1e-6;            // margin on every Wt_ii and certificate block
  /// Margin each local problem demands of its Wt_ii. Values well above eps
  /// keep later steps away from a near singular archive.
  double step_margin = 1e-2;
  double lyapunov_floor = 1.0;  // P_ii (or M_ii) >= floor * I
  /// Stability modes certify A + decay I, so max Re lambda < -decay.
  double decay = 1e-5;
  /// Synthesized blocks with Frobenius norm below this are set to zero.
  double snap = 1e-7;
  /// Weight of ||L_ij|| on pairs whose feedback link is fixed.
  double gain_regularization = 1e-3;
  /// Normalizing constant of out-neighbor terms; default is the Frobenius
  /// norm of the most recently solved certificate (1 at the first step).
  std::optional<double> beta;
  /// Processing order (permutation of 0..N-1); identity when empty.
  std::vector<int> order;
  LinearizedForm form = LinearizedForm::Normalized;
  lmi::SolveOptions solver = lmi::default_solve_options();
  /// Centralized and simulation checks for the dissipativity modes.
  bool verify = true;
  SimulationOptions simulation;
  /// Throw StepInfeasible instead of returning a failed result.
  bool raise = true;
};

struct StepRecord {
  int subsystem = 0;
  int step = 0;
  lmi::SolveStatus solver_status = lmi::SolveStatus::Infeasible;
  bool accepted = false;
  double objective = 0.0;
  double wt_min_eigenvalue = 0.0;  // lambda_min(Wt_ii) of the archived row
  double certificate_norm = 0.0;
  int iterations = 0;
  std::string message;
};

struct Verification {
  bool passed = false;
  /// Assembled W is PD; every Wt_ii and certificate block >= eps / 2.
  bool certificate_ok = false;
  double w_min_eigenvalue = 0.0;
  /// Open or closed loop eigenvalues (stability modes).
  StabilityVerdict stability;
  /// Centralized QSR check and trajectory simulation (dissipativity modes).
  bool dissipativity_ok = true;
  double simulation_violation = 0.0;
  std::string message;
};

struct SynthesisResult {
  SynthesisMode mode = SynthesisMode::Stability;
  bool success = false;
  std::optional<int> failing_subsystem;
  std::string message;
  NetworkedSystem system;
  /// P_ii (Stability, Dissipativity) or M_ii (the feedback modes).
  std::vector<MatrixXd> certificates;
  /// Feedback modes: the solved gain factor L, with K = L M^-1 blockwise.
  std::optional<BlockMatrixd> L;
  CertificateArchive archive;
  std::vector<StepRecord> steps;
  double objective = 0.0;
  TopologyCost cost;
  Verification verification;

  /// Block-diagonal certificate; for the feedback modes P = M^-1.
  BlockMatrixd lyapunov_matrix() const;
};

/// x' = Ax under block-diagonal Lyapunov certificates; designs A blocks.
/// Throws DiagnosticError when some A_ii + decay I is not Hurwitz.
SynthesisResult synthesize_stability(const NetworkedSystem& sys, const DesignSpec& spec,
                                     const MatrixXd& costs, const SynthesisOptions& opt = {});

/// x' = (A + BK)x with K = L M^-1; designs A blocks and the gain.
/// Throws SpecError when B is not block diagonal.
SynthesisResult synthesize_stabilizability(const NetworkedSystem& sys, const DesignSpec& spec,
                                           const MatrixXd& costs,
                                           const SynthesisOptions& opt = {});

/// (Q,S,R)-dissipativity from u to y; designs A (and B with
/// spec.design_inputs, C_ii and D_ii with spec.intrinsic_output).
/// Throws SpecError when C or D is not block diagonal.
SynthesisResult synthesize_dissipativity(const NetworkedSystem& sys, const DesignSpec& spec,
                                         const QsrSpec& qsr, const MatrixXd& costs,
                                         const SynthesisOptions& opt = {});

/// (Q,S,R)-dissipativity from w to y under u = Kx; designs A, K (and E with
/// spec.design_inputs). Throws SpecError unless B, C, F are block diagonal
/// and D = 0.
SynthesisResult synthesize_dissipativation(const NetworkedSystem& sys, const DesignSpec& spec,
                                           const QsrSpec& qsr, const MatrixXd& costs,
                                           const SynthesisOptions& opt = {});

/// Re-designates the existing edge j -> i: Designable toward its current
/// block, or Removable (toward zero at the removal cost). Throws SpecError
/// when the edge is absent.
DesignSpec mark_refinable(const DesignSpec& spec, const NetworkedSystem& sys, int i, int j,
                          bool removable = false);

/// Weight of the objective term for pair (i, j): c_ij, or the removal cost
/// for Removable pairs, or 0 for Fixed pairs.
double pair_weight(const DesignSpec& spec, const MatrixXd& costs, int i, int j);

/// Report of a run: per-step records, costs, verification, certificate
/// norms. Deterministic for identical inputs.
nlohmann::json synthesis_report(const SynthesisResult& result);

}  // namespace netsyn
