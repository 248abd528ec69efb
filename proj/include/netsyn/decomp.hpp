#pragma once

#include <optional>
#include <vector>

#include <Eigen/Cholesky>

#include "json.hpp"
#include "netsyn/block_matrix.hpp"
#include "netsyn/lmi/problem.hpp"

namespace netsyn {

using Eigen::MatrixXd;

class CertificateArchive;

struct StepResult {
  std::vector<MatrixXd> row;  // Wt_i0 .. Wt_ii
  bool verdict = false;
  double min_eigenvalue = 0.0;  // of Wt_ii
};

/// Processes step i given W_i0 .. W_ii (W_ii symmetric). Computes
/// Wt_ik = W_ik - sum_{l<k} Wt_il Wt_ll^-1 Wt_kl' and
/// Wt_ii = W_ii - sum_{k<i} Wt_ik Wt_kk^-1 Wt_ik', and appends the row when
/// lambda_min(Wt_ii) > tol.
///
/// Throws StateError unless i == archive.size(), StructureError on shape
/// errors, NumericalError when an archived diagonal block has condition
/// number above 1e12.
StepResult decompose_step(int i, const std::vector<MatrixXd>& w_row,
                          CertificateArchive& archive, int subsystem = -1,
                          double tol = kDefinitenessTol);

/// Rows produced by the sequential block elimination of a symmetric block
/// matrix W. Row k holds Wt_k0 .. Wt_kk in processing order, so that
///
///   W = L diag(Wt_kk)^-1 L',  L lower block triangular with L_kl = Wt_kl.
///
/// Rows are append-only; every stored diagonal block is positive definite.
class CertificateArchive {
 public:
  struct Row {
    int subsystem = 0;             // label of the subsystem that produced it
    std::vector<MatrixXd> blocks;  // Wt_k0 .. Wt_kk
    Eigen::LLT<MatrixXd> chol;     // factor of Wt_kk
    std::vector<int> reads;        // earlier steps whose rows were used
    double condition = 1.0;        // of Wt_kk
  };

  int size() const { return static_cast<int>(rows_.size()); }
  bool empty() const { return rows_.empty(); }
  const Row& row(int k) const { return rows_.at(static_cast<std::size_t>(k)); }
  Index dim(int k) const { return row(k).blocks.back().rows(); }
  std::vector<Index> dims() const;

  /// Leading principal part of W recovered from the rows: L D^-1 L'.
  BlockMatrixd reconstruction() const;

  /// Wt_kk^-1 x, by triangular solves against the stored factor.
  MatrixXd solve_diagonal(int k, const MatrixXd& x) const;

 private:
  friend StepResult decompose_step(int, const std::vector<MatrixXd>&,
                                   CertificateArchive&, int, double);
  friend CertificateArchive replay_trace(const nlohmann::json&);
  void append(Row row);
  std::vector<Row> rows_;
};

/// Same as decompose_step at i = archive.size(): growth by one subsystem
/// touching only the new row.
StepResult extend_archive(CertificateArchive& archive,
                          const std::vector<MatrixXd>& w_row,
                          int subsystem = -1, double tol = kDefinitenessTol);

struct PdTestResult {
  bool verdict = false;
  std::optional<int> failing_subsystem;
  CertificateArchive archive;
};

/// Runs the elimination in the given order (a permutation of 0..N-1,
/// identity when empty). Stops at the first failing step.
PdTestResult test_positive_definite(const BlockMatrixd& w,
                                    std::vector<int> order = {},
                                    double tol = kDefinitenessTol);

enum class LinearizedForm { Plain, Normalized };

/// Constraint that is PSD iff Wt_ii >= eps I for the row (W_i, W_ii):
///   Plain:      [W_ii - eps I, W_i; W_i', S]
///   Normalized: [W_ii - eps I, W_i Phi^-T; Phi^-1 W_i', I]
/// where S = L D^-1 L' is the archived leading part and S = Phi Phi'.
/// `w_row` holds the affine expressions W_i0 .. W_i(i-1); add the result
/// with margin 0.
lmi::AffineExpr schur_linearized_constraint(const lmi::AffineExpr& w_ii,
                                            const std::vector<lmi::AffineExpr>& w_row,
                                            const CertificateArchive& archive,
                                            double eps,
                                            LinearizedForm form = LinearizedForm::Normalized);

/// The archive as a replayable message log:
/// [{"sender", "row": [blocks...], "aux": {"step", "reads"}}...].
nlohmann::json trace_to_json(const CertificateArchive& archive);

/// Rebuilds an archive from a trace, validating every row.
CertificateArchive replay_trace(const nlohmann::json& trace);

}  // namespace netsyn
