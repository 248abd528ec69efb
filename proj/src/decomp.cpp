#include "netsyn/decomp.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "netsyn/io.hpp"

namespace netsyn {

namespace {

constexpr double kMaxCondition = 1e12;

struct Spectrum {
  double min = 0.0;
  double condition = 1.0;
};

Spectrum spectrum(const MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  Spectrum s;
  s.min = ev.minCoeff();
  const double lo = ev.cwiseAbs().minCoeff();
  s.condition = lo > 0 ? ev.cwiseAbs().maxCoeff() / lo : INFINITY;
  return s;
}

CertificateArchive::Row make_row(int subsystem, std::vector<MatrixXd> blocks,
                                 std::vector<int> reads, double condition) {
  CertificateArchive::Row r;
  r.subsystem = subsystem;
  r.chol.compute(blocks.back());
  r.blocks = std::move(blocks);
  r.reads = std::move(reads);
  r.condition = condition;
  return r;
}

}  // namespace

std::vector<Index> CertificateArchive::dims() const {
  std::vector<Index> d;
  for (int k = 0; k < size(); ++k) d.push_back(dim(k));
  return d;
}

MatrixXd CertificateArchive::solve_diagonal(int k, const MatrixXd& x) const {
  const Row& r = row(k);
  if (r.condition > kMaxCondition)
    throw NumericalError("archived diagonal block " + std::to_string(k + 1) +
                         " is too ill-conditioned to invert");
  return r.chol.solve(x);
}

BlockMatrixd CertificateArchive::reconstruction() const {
  const auto d = dims();
  BlockMatrixd s(d, d);
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j <= i; ++j) {
      MatrixXd acc = MatrixXd::Zero(d[i], d[j]);
      for (int k = 0; k <= j; ++k)
        acc += row(i).blocks[k] * solve_diagonal(k, row(j).blocks[k].transpose());
      s.block(i, j) = acc;
      s.block(j, i) = acc.transpose();
    }
  return s;
}

void CertificateArchive::append(Row row) { rows_.push_back(std::move(row)); }

StepResult decompose_step(int i, const std::vector<MatrixXd>& w_row,
                          CertificateArchive& archive, int subsystem,
                          double tol) {
  if (i != archive.size())
    throw StateError("step " + std::to_string(i + 1) + " requested but the archive holds " +
                     std::to_string(archive.size()) + " rows");
  if (static_cast<int>(w_row.size()) != i + 1)
    throw StructureError("step " + std::to_string(i + 1) + " needs " +
                         std::to_string(i + 1) + " blocks");
  const MatrixXd& w_ii = w_row.back();
  const Index n = w_ii.rows();
  if (n == 0 || w_ii.cols() != n) throw StructureError("diagonal block must be square");
  if ((w_ii - w_ii.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw StructureError("diagonal block is not symmetric");
  for (int k = 0; k < i; ++k)
    if (w_row[k].rows() != n || w_row[k].cols() != archive.dim(k))
      throw StructureError("block " + std::to_string(k + 1) + " of step " +
                           std::to_string(i + 1) + " has the wrong shape");

  StepResult out;
  std::vector<MatrixXd> y(static_cast<std::size_t>(i));  // Wt_ik Wt_kk^-1
  std::vector<int> reads;
  MatrixXd schur = 0.5 * (w_ii + w_ii.transpose());
  for (int k = 0; k < i; ++k) {
    MatrixXd x = w_row[k];
    for (int l = 0; l < k; ++l)
      if (y[l].size() > 0) x.noalias() -= y[l] * archive.row(k).blocks[l].transpose();
    if (!x.isZero(0.0)) {
      y[k] = archive.solve_diagonal(k, x.transpose()).transpose();
      schur.noalias() -= y[k] * x.transpose();
      reads.push_back(k);
    }
    out.row.push_back(std::move(x));
  }
  schur = (0.5 * (schur + schur.transpose())).eval();
  out.row.push_back(schur);
  const Spectrum sp = spectrum(schur);
  out.min_eigenvalue = sp.min;
  out.verdict = sp.min > tol;
  if (out.verdict)
    archive.append(make_row(subsystem < 0 ? i : subsystem, out.row, std::move(reads),
                            sp.condition));
  return out;
}

StepResult extend_archive(CertificateArchive& archive,
                          const std::vector<MatrixXd>& w_row, int subsystem,
                          double tol) {
  return decompose_step(archive.size(), w_row, archive, subsystem, tol);
}

PdTestResult test_positive_definite(const BlockMatrixd& w, std::vector<int> order,
                                    double tol) {
  if (!w.square_partitioned()) throw StructureError("W must be square partitioned");
  if (!w.is_symmetric(kSymmetryTol)) throw StructureError("W is not symmetric");
  const int n = static_cast<int>(w.block_rows());
  if (order.empty()) {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
  }
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < n; ++k)
    if (static_cast<int>(sorted.size()) != n || sorted[k] != k)
      throw StructureError("order is not a permutation of the subsystems");

  PdTestResult res;
  for (int s = 0; s < n; ++s) {
    std::vector<MatrixXd> row;
    for (int k = 0; k <= s; ++k) row.emplace_back(w.block(order[s], order[k]));
    if (!decompose_step(s, row, res.archive, order[s], tol).verdict) {
      res.failing_subsystem = order[s];
      return res;
    }
  }
  res.verdict = true;
  return res;
}

lmi::AffineExpr schur_linearized_constraint(const lmi::AffineExpr& w_ii,
                                            const std::vector<lmi::AffineExpr>& w_row,
                                            const CertificateArchive& archive,
                                            double eps, LinearizedForm form) {
  const Index n = w_ii.rows();
  if (w_ii.cols() != n) throw StructureError("diagonal block must be square");
  const lmi::AffineExpr top = w_ii - MatrixXd(eps * MatrixXd::Identity(n, n));
  if (w_row.empty()) {
    if (!archive.empty()) throw StateError("off-diagonal blocks missing");
    return top;
  }
  if (archive.empty()) throw StateError("archive is empty but off-diagonal blocks were given");
  if (static_cast<int>(w_row.size()) != archive.size())
    throw StateError("row has " + std::to_string(w_row.size()) + " blocks but the archive holds " +
                     std::to_string(archive.size()) + " rows");
  for (int k = 0; k < archive.size(); ++k)
    if (w_row[k].rows() != n || w_row[k].cols() != archive.dim(k))
      throw StructureError("block " + std::to_string(k + 1) + " has the wrong shape");

  const lmi::AffineExpr row = lmi::AffineExpr::blocks({w_row});
  const MatrixXd s = archive.reconstruction().dense();
  if (form == LinearizedForm::Plain)
    return lmi::AffineExpr::blocks({{top, row}, {row.transpose(), s}});
  const Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("archived leading block is not PD");
  const MatrixXd phi_inv_t = llt.matrixU().solve(MatrixXd::Identity(s.rows(), s.cols()));
  const lmi::AffineExpr off = row.right_multiplied(phi_inv_t);
  return lmi::AffineExpr::blocks(
      {{top, off}, {off.transpose(), MatrixXd(MatrixXd::Identity(s.rows(), s.cols()))}});
}

nlohmann::json trace_to_json(const CertificateArchive& archive) {
  Json out = Json::array();
  for (int k = 0; k < archive.size(); ++k) {
    const auto& r = archive.row(k);
    Json row = Json::array();
    for (const auto& b : r.blocks) row.push_back(matrix_to_json(b));
    Json reads = Json::array();
    for (int j : r.reads) reads.push_back(archive.row(j).subsystem + 1);
    out.push_back({{"sender", r.subsystem + 1},
                   {"row", row},
                   {"aux", {{"step", k + 1}, {"reads", reads}}}});
  }
  return out;
}

CertificateArchive replay_trace(const nlohmann::json& trace) {
  if (!trace.is_array()) throw FormatError("trace: expected a list of messages");
  CertificateArchive archive;
  std::map<int, int> step_of;
  for (const auto& m : trace) {
    const int k = archive.size();
    const std::string where = "trace[" + std::to_string(k) + "]";
    if (!m.is_object() || !m.contains("sender") || !m.contains("row") || !m["row"].is_array())
      throw FormatError(where + ": malformed message");
    if (m.contains("aux") && m["aux"].value("step", k + 1) != k + 1)
      throw StateError(where + ": out-of-order step");
    const int sender = m["sender"].get<int>() - 1;
    if (step_of.count(sender)) throw FormatError(where + ": duplicate sender");
    if (static_cast<int>(m["row"].size()) != k + 1)
      throw FormatError(where + ": row must have " + std::to_string(k + 1) + " blocks");
    std::vector<MatrixXd> blocks;
    for (const auto& b : m["row"]) blocks.push_back(matrix_from_json(b, where));
    const Index n = blocks.back().rows();
    for (int j = 0; j <= k; ++j)
      if (blocks[j].rows() != n || blocks[j].cols() != (j < k ? archive.dim(j) : n))
        throw FormatError(where + ": block " + std::to_string(j + 1) + " has the wrong shape");
    if (blocks.back() != blocks.back().transpose())
      throw FormatError(where + ": diagonal block is not symmetric");
    const Spectrum sp = spectrum(blocks.back());
    if (!(sp.min > 0)) throw FormatError(where + ": diagonal block is not positive definite");
    std::vector<int> reads;
    if (m.contains("aux") && m["aux"].contains("reads"))
      for (const auto& r : m["aux"]["reads"]) {
        const auto it = step_of.find(r.get<int>() - 1);
        if (it == step_of.end()) throw FormatError(where + ": reads an unknown sender");
        reads.push_back(it->second);
      }
    step_of[sender] = k;
    archive.append(make_row(sender, std::move(blocks), std::move(reads), sp.condition));
  }
  return archive;
}

}  // namespace netsyn
