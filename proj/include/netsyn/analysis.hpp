#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netsyn/lmi/problem.hpp"
#include "netsyn/system.hpp"

namespace netsyn {

struct StabilityVerdict {
  double max_real = 0.0;
  bool hurwitz = false;
};

/// Dense eigenvalues; Hurwitz iff max Re lambda < -tol.
StabilityVerdict eigen_stability_oracle(const MatrixXd& a, double tol = 0.0);

struct AnalysisOptions {
  double eps = 1e-6;
  /// Stability: -A'P - PA >= eps I instead of >= 0.
  /// Dissipativity: the supply matrix >= eps I instead of >= 0.
  bool strict = true;
  lmi::SolveOptions solver = lmi::default_solve_options();
};

struct Certificate {
  bool feasible = false;
  lmi::SolveStatus status = lmi::SolveStatus::Infeasible;
  MatrixXd P;
  /// lambda_min of the certified matrix (dissipation or supply matrix).
  double margin = 0.0;
  double required_margin = 0.0;
};

/// Finds P >= eps I with -A'P - PA >= eps I (strict) or >= 0. Solved in
/// normalized form (P <= I, common margin maximized) and rescaled.
Certificate check_stability_centralized(const MatrixXd& a, const AnalysisOptions& opt = {});

/// Supply matrix of the quadratic dissipation inequality
///
///   [-A'P - PA, -PB; -B'P, 0] + [C D; 0 I]' [Q S; S' R] [C D; 0 I],
///
/// which is PSD iff V = x'Px satisfies dV/dt <= s(y, u) along every
/// trajectory. Valid for any sign of Q.
MatrixXd supply_matrix(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                       const MatrixXd& d, const MatrixXd& q, const MatrixXd& s,
                       const MatrixXd& r, const MatrixXd& p);

/// Affine version with P a problem variable.
lmi::AffineExpr supply_expr(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                            const MatrixXd& d, const MatrixXd& q, const MatrixXd& s,
                            const MatrixXd& r, const lmi::AffineExpr& p);

/// Input channel of a dissipativity check.
enum class Channel {
  Input,        // u -> y through (A, B, C, D)
  Disturbance,  // w -> y through (A + BK, E, C, F)
};

/// Finds P >= eps I with the supply matrix >= 0 (>= eps I when strict).
/// Throws SpecError when the QSR spec is invalid or mis-shaped.
Certificate check_dissipativity_centralized(const NetworkedSystem& sys, const QsrSpec& qsr,
                                            Channel channel = Channel::Input,
                                            const AnalysisOptions& opt = {.strict = false});
Certificate check_dissipativity_centralized(const MatrixXd& a, const MatrixXd& b,
                                            const MatrixXd& c, const MatrixXd& d,
                                            const MatrixXd& q, const MatrixXd& s,
                                            const MatrixXd& r,
                                            const AnalysisOptions& opt = {.strict = false});

struct SimulationOptions {
  int inputs = 100;        // random input signals
  int pieces = 20;         // constant pieces per signal
  double step = 0.0;       // 0: 1e-3 / spectral radius of A
  double horizon = 0.0;    // 0: 10 / spectral radius of A
  double divergence = 1e12;
  std::uint64_t seed = 1;
};

struct SimulationReport {
  double max_violation = 0.0;  // max over signals and prefixes, clipped at 0
  int worst_signal = -1;
  double step = 0.0;
  double horizon = 0.0;
};

/// Integrates x' = Ax + Bu, y = Cx + Du by RK4 under random piecewise
/// constant inputs from random initial states and measures how far
/// V(x(t)) - V(x(0)) exceeds the integrated supply. Throws SimulationError
/// when a state grows past `divergence`.
SimulationReport simulate_dissipation(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                                      const MatrixXd& d, const MatrixXd& q, const MatrixXd& s,
                                      const MatrixXd& r, const MatrixXd& p,
                                      const SimulationOptions& opt = {});

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd x, u, y;
  double v = 0.0;
  double supply = 0.0;  // integrated supply up to t
};

/// One signal of simulate_dissipation, sampled every `stride` steps.
std::vector<TrajectorySample> simulate_trajectory(const MatrixXd& a, const MatrixXd& b,
                                                  const MatrixXd& c, const MatrixXd& d,
                                                  const MatrixXd& q, const MatrixXd& s,
                                                  const MatrixXd& r, const MatrixXd& p,
                                                  const SimulationOptions& opt, int signal,
                                                  int stride = 100);

/// Columns t, x1.., u1.., y1.., V, supply.
void write_trajectory_csv(const std::vector<TrajectorySample>& samples, const std::string& path);

enum class IndexMode { Weak, Strong };

struct PassivityIndices {
  double nu = 0.0;   // input index
  double rho = 0.0;  // output index
  IndexMode mode = IndexMode::Strong;
  /// rho < 0, or no certificate with nu >= nu_floor exists in the bracket.
  bool shortage = false;
};

struct PassivityOptions {
  double feedthrough = 0.0;  // added to D as feedthrough * I
  double nu_floor = 0.0;
  double weak_factor = 0.5;
  double bracket = 10.0;  // rho searched in [-bracket, bracket] * ||A||
  double tol = 1e-3;
  AnalysisOptions analysis{.strict = false};
};

/// Output index by bisection on rho (Q = -rho I, S = I/2, R = -nu I), input
/// index by maximizing nu at the final rho. Weak mode shrinks both towards
/// -infinity: x_w = x - (1 - w)|x|.
PassivityIndices estimate_passivity_indices(const MatrixXd& a, const MatrixXd& b,
                                            const MatrixXd& c, const MatrixXd& d,
                                            IndexMode mode = IndexMode::Strong,
                                            const PassivityOptions& opt = {});

}  // namespace netsyn
