#include "netsyn/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <sstream>

namespace netsyn {

using lmi::AffineExpr;
using lmi::VarHandle;

const char* to_string(SynthesisMode m) {
  switch (m) {
    case SynthesisMode::Stability:
      return "stability";
    case SynthesisMode::Stabilizability:
      return "stabilizability";
    case SynthesisMode::Dissipativity:
      return "dissipativity";
    default:
      return "dissipativation";
  }
}

double pair_weight(const DesignSpec& spec, const MatrixXd& costs, int i, int j) {
  switch (spec.at(i, j)) {
    case Designation::Fixed:
      return 0.0;
    case Designation::Designable:
      return costs(i, j);
    default: {
      const double top = costs.size() ? costs.maxCoeff() : 0.0;
      return spec.removal_cost_factor * (top > 0 ? top : 1.0);
    }
  }
}

DesignSpec mark_refinable(const DesignSpec& spec, const NetworkedSystem& sys, int i, int j,
                          bool removable) {
  if (i == j || !sys.topology.has_edge(i, j))
    throw SpecError("mark_refinable: " + std::to_string(j + 1) + " -> " +
                    std::to_string(i + 1) + " is not an edge");
  DesignSpec out = spec;
  out.designation.at(i).at(j) = removable ? Designation::Removable : Designation::Designable;
  if (!removable) out.reference[{i, j}] = sys.A.block(i, j);
  return out;
}

BlockMatrixd SynthesisResult::lyapunov_matrix() const {
  const bool feedback =
      mode == SynthesisMode::Stabilizability || mode == SynthesisMode::Dissipativation;
  std::vector<MatrixXd> blocks;
  for (const MatrixXd& c : certificates)
    blocks.push_back(feedback ? MatrixXd(c.inverse()) : c);
  return BlockMatrixd::block_diagonal(blocks);
}

namespace {

double min_eig(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

MatrixXd eye(Index n) { return MatrixXd::Identity(n, n); }

/// Drops block rows and columns of zero size before assembling.
AffineExpr assemble(const std::vector<std::vector<AffineExpr>>& cells) {
  std::vector<std::size_t> rows, cols;
  for (std::size_t k = 0; k < cells.size(); ++k)
    if (cells[k][0].rows() > 0) rows.push_back(k);
  for (std::size_t l = 0; l < cells[0].size(); ++l)
    if (cells[0][l].cols() > 0) cols.push_back(l);
  std::vector<std::vector<AffineExpr>> kept;
  for (std::size_t k : rows) {
    kept.emplace_back();
    for (std::size_t l : cols) kept.back().push_back(cells[k][l]);
  }
  return AffineExpr::blocks(kept);
}

enum class Target { A, B, E, K, C, D };
enum class Recover { Direct, LeftInvOwn, RightInvOwn, RightInvOther };

struct Assignment {
  Target target;
  int r, c;
  VarHandle var;
  Recover how;
  int other = -1;
};

struct Step {
  lmi::LmiProblem prob;
  VarHandle cert;
  AffineExpr w_ii;
  std::vector<AffineExpr> w_row;
  std::vector<Assignment> assigns;
  std::string screen;  // structural reason the step cannot succeed

  VarHandle rect(Index rows, Index cols, const std::string& name) {
    return prob.rectangular(rows, cols, name + std::to_string(prob.variable_count()));
  }
};

class Runner {
 public:
  Runner(SynthesisMode mode, const NetworkedSystem& sys, const DesignSpec& spec,
         const QsrSpec* qsr, const MatrixXd& costs, const SynthesisOptions& opt)
      : mode_(mode), init_(sys), spec_(spec), qsr_(qsr), costs_(costs), opt_(opt), work_(sys) {
    const int n = sys.size();
    if (spec.size() != n) throw SpecError("design spec size does not match the system");
    if (costs.rows() != n || costs.cols() != n)
      throw StructureError("cost matrix must be N x N");
    order_ = opt.order;
    if (order_.empty()) {
      order_.resize(static_cast<std::size_t>(n));
      std::iota(order_.begin(), order_.end(), 0);
    }
    std::vector<int> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < n; ++k)
      if (static_cast<int>(sorted.size()) != n || sorted[static_cast<std::size_t>(k)] != k)
        throw ConfigError("processing order must be a permutation of the subsystems");
    certs_.resize(static_cast<std::size_t>(n));
    if (feedback()) {
      work_.K = BlockMatrixd(sys.nu, sys.nx);
      l_ = BlockMatrixd(sys.nu, sys.nx);
    }
  }

  SynthesisResult run();

 private:
  bool feedback() const {
    return mode_ == SynthesisMode::Stabilizability || mode_ == SynthesisMode::Dissipativation;
  }
  bool a_free(int i, int j) const { return i != j && !spec_.fixed(i, j); }
  bool input_free(int i, int j) const { return spec_.design_inputs && a_free(i, j); }
  bool k_free(int i, int j) const {
    return i != j && (!spec_.fixed(i, j) || init_.topology.has_edge(i, j));
  }
  double k_weight(int i, int j) const {
    return spec_.fixed(i, j) ? opt_.gain_regularization : pair_weight(spec_, costs_, i, j);
  }
  double weight(int i, int j) const { return pair_weight(spec_, costs_, i, j); }
  MatrixXd target(int i, int j) const { return spec_.target(i, j, init_.A.block(i, j)); }
  MatrixXd input_target(const BlockMatrixd& m, int i, int j) const {
    return spec_.at(i, j) == Designation::Removable ? MatrixXd::Zero(m.block(i, j).rows(),
                                                                     m.block(i, j).cols())
                                                    : MatrixXd(m.block(i, j));
  }
  void norm_term(Step& st, const AffineExpr& e, double w) const {
    if (w > 0) st.prob.minimize_norm(e, w);
  }

  Step build(int i, const std::vector<int>& prev, double beta);
  void build_stability(Step& st, int i, const std::vector<int>& prev, double beta);
  void build_stabilizability(Step& st, int i, const std::vector<int>& prev, double beta);
  void build_dissipativity(Step& st, int i, const std::vector<int>& prev, double beta);
  void build_dissipativation(Step& st, int i, const std::vector<int>& prev, double beta);

  MatrixXd recover(const Assignment& a, const lmi::Values& v, const MatrixXd& cert) const;
  void apply(const Assignment& a, const MatrixXd& block);
  void verify(SynthesisResult& res) const;
  MatrixXd global_w() const;

  SynthesisMode mode_;
  const NetworkedSystem& init_;
  const DesignSpec& spec_;
  const QsrSpec* qsr_;
  const MatrixXd& costs_;
  const SynthesisOptions& opt_;
  NetworkedSystem work_;
  std::vector<int> order_;
  std::vector<MatrixXd> certs_;
  CertificateArchive archive_;
  std::optional<BlockMatrixd> l_;
};

void Runner::build_stability(Step& st, int i, const std::vector<int>& prev, double beta) {
  const Index ni = init_.nx[i];
  const AffineExpr p = st.cert;
  const MatrixXd a_s = MatrixXd(work_.A.block(i, i)) + opt_.decay * eye(ni);
  const AffineExpr pa = p.right_multiplied(a_s);
  st.w_ii = -pa - pa.transpose();
  for (int j : prev) {
    const Index nj = init_.nx[j];
    const MatrixXd& pj = certs_[j];
    AffineExpr w = AffineExpr::zero(ni, nj);
    if (a_free(i, j)) {
      const VarHandle q = st.rect(ni, nj, "Q");
      w -= AffineExpr(q);
      st.assigns.push_back({Target::A, i, j, q, Recover::LeftInvOwn});
      norm_term(st, AffineExpr(q) - p.right_multiplied(target(i, j)), weight(i, j));
    } else {
      w -= p.right_multiplied(work_.A.block(i, j));
    }
    if (a_free(j, i)) {
      const VarHandle x = st.rect(nj, ni, "A");
      w -= AffineExpr(x).transpose().right_multiplied(pj);
      st.assigns.push_back({Target::A, j, i, x, Recover::Direct});
      norm_term(st, AffineExpr(x) - AffineExpr(target(j, i)), beta * weight(j, i));
    } else {
      w -= AffineExpr(MatrixXd(work_.A.block(j, i).transpose() * pj));
    }
    st.w_row.push_back(w);
  }
}

void Runner::build_stabilizability(Step& st, int i, const std::vector<int>& prev, double beta) {
  const Index ni = init_.nx[i], pi = init_.nu[i];
  const AffineExpr m = st.cert;
  const MatrixXd a_s = MatrixXd(work_.A.block(i, i)) + opt_.decay * eye(ni);
  const MatrixXd bi = work_.B.block(i, i);
  AffineExpr am = m.left_multiplied(a_s);
  if (pi > 0) {
    const VarHandle l = st.rect(pi, ni, "L");
    am += AffineExpr(l).left_multiplied(bi);
    st.assigns.push_back({Target::K, i, i, l, Recover::RightInvOwn});
    norm_term(st, AffineExpr(l), opt_.gain_regularization);
  }
  st.w_ii = -am - am.transpose();
  for (int j : prev) {
    const Index nj = init_.nx[j], pj_in = init_.nu[j];
    const MatrixXd& mj = certs_[j];
    const MatrixXd bj = work_.B.block(j, j);
    AffineExpr w = AffineExpr::zero(ni, nj);
    if (a_free(i, j)) {
      const VarHandle x = st.rect(ni, nj, "A");
      w -= AffineExpr(x).right_multiplied(mj);
      st.assigns.push_back({Target::A, i, j, x, Recover::Direct});
      norm_term(st, AffineExpr(x) - AffineExpr(target(i, j)), beta * weight(i, j));
    } else {
      w -= AffineExpr(MatrixXd(work_.A.block(i, j) * mj));
    }
    if (a_free(j, i)) {
      const VarHandle q = st.rect(nj, ni, "Q");
      w -= AffineExpr(q).transpose();
      st.assigns.push_back({Target::A, j, i, q, Recover::RightInvOwn});
      norm_term(st, AffineExpr(q) - m.left_multiplied(target(j, i)), weight(j, i));
    } else {
      w -= m.right_multiplied(work_.A.block(j, i).transpose());
    }
    if (pi > 0 && k_free(i, j)) {
      const VarHandle l = st.rect(pi, nj, "L");
      w -= AffineExpr(l).left_multiplied(bi);
      st.assigns.push_back({Target::K, i, j, l, Recover::RightInvOther, j});
      norm_term(st, AffineExpr(l), k_weight(i, j));
    }
    if (pj_in > 0 && k_free(j, i)) {
      const VarHandle l = st.rect(pj_in, ni, "L");
      w -= AffineExpr(l).transpose().right_multiplied(bj.transpose());
      st.assigns.push_back({Target::K, j, i, l, Recover::RightInvOwn});
      norm_term(st, AffineExpr(l), k_weight(j, i));
    }
    st.w_row.push_back(w);
  }
}

void Runner::build_dissipativity(Step& st, int i, const std::vector<int>& prev, double beta) {
  const Index ni = init_.nx[i], pi = init_.nu[i], mi = init_.ny[i];
  const QsrSpec& qsr = *qsr_;
  const AffineExpr p = st.cert;
  const bool intrinsic =
      !spec_.intrinsic_output.empty() && spec_.intrinsic_output.at(static_cast<std::size_t>(i));

  AffineExpr ci = MatrixXd(work_.C.block(i, i)), di = MatrixXd(work_.D.block(i, i));
  if (intrinsic) {
    const VarHandle cv = st.rect(mi, ni, "C");
    const VarHandle dv = st.rect(mi, pi, "D");
    st.assigns.push_back({Target::C, i, i, cv, Recover::Direct});
    st.assigns.push_back({Target::D, i, i, dv, Recover::Direct});
    norm_term(st, AffineExpr(cv) - ci, 1.0);
    norm_term(st, AffineExpr(dv) - di, 1.0);
    ci = cv;
    di = dv;
  }
  const MatrixXd sii = qsr.S.block(i, i), rii = qsr.R.block(i, i);
  const AffineExpr pa = p.right_multiplied(work_.A.block(i, i));
  const AffineExpr w12 = -p.right_multiplied(work_.B.block(i, i)) +
                         ci.transpose().right_multiplied(sii);
  const AffineExpr dts = di.transpose().right_multiplied(sii);
  const AffineExpr w22 = dts + dts.transpose() + AffineExpr(rii);
  const AffineExpr w33 = mi > 0 ? AffineExpr(MatrixXd(-qsr.Q.block(i, i).inverse()))
                                : AffineExpr::zero(0, 0);
  st.w_ii = assemble({{-pa - pa.transpose(), w12, ci.transpose()},
                      {w12.transpose(), w22, di.transpose()},
                      {ci, di, w33}});
  if (!intrinsic && pi > 0) {
    const MatrixXd d = work_.D.block(i, i);
    if (min_eig(sym(d.transpose() * sii + sii.transpose() * d + rii)) <= 0)
      st.screen = "D'S + S'D + R of the subsystem is not positive definite";
  }

  for (int j : prev) {
    const Index nj = init_.nx[j], pj = init_.nu[j], mj = init_.ny[j];
    const MatrixXd& pjj = certs_[j];
    const MatrixXd sij = qsr.S.block(i, j), sji = qsr.S.block(j, i), rij = qsr.R.block(i, j);
    const MatrixXd cj = work_.C.block(j, j), dj = work_.D.block(j, j);

    AffineExpr w11 = AffineExpr::zero(ni, nj);
    if (a_free(i, j)) {
      const VarHandle g = st.rect(ni, nj, "G");
      w11 -= AffineExpr(g);
      st.assigns.push_back({Target::A, i, j, g, Recover::LeftInvOwn});
      norm_term(st, AffineExpr(g) - p.right_multiplied(target(i, j)), weight(i, j));
    } else {
      w11 -= p.right_multiplied(work_.A.block(i, j));
    }
    if (a_free(j, i)) {
      const VarHandle x = st.rect(nj, ni, "A");
      w11 -= AffineExpr(x).transpose().right_multiplied(pjj);
      st.assigns.push_back({Target::A, j, i, x, Recover::Direct});
      norm_term(st, AffineExpr(x) - AffineExpr(target(j, i)), beta * weight(j, i));
    } else {
      w11 -= AffineExpr(MatrixXd(work_.A.block(j, i).transpose() * pjj));
    }

    AffineExpr w12 = ci.transpose().right_multiplied(sij);
    if (pj > 0) {
      if (input_free(i, j)) {
        const VarHandle h = st.rect(ni, pj, "H");
        w12 -= AffineExpr(h);
        st.assigns.push_back({Target::B, i, j, h, Recover::LeftInvOwn});
        norm_term(st, AffineExpr(h) - p.right_multiplied(input_target(init_.B, i, j)),
                  weight(i, j));
      } else {
        w12 -= p.right_multiplied(work_.B.block(i, j));
      }
    }

    AffineExpr w21 = AffineExpr(MatrixXd(sji.transpose() * cj));
    if (pi > 0) {
      if (input_free(j, i)) {
        const VarHandle y = st.rect(nj, pi, "B");
        w21 -= AffineExpr(y).transpose().right_multiplied(pjj);
        st.assigns.push_back({Target::B, j, i, y, Recover::Direct});
        norm_term(st, AffineExpr(y) - AffineExpr(input_target(init_.B, j, i)),
                  beta * weight(j, i));
      } else {
        w21 -= AffineExpr(MatrixXd(work_.B.block(j, i).transpose() * pjj));
      }
    }

    const AffineExpr w22 = di.transpose().right_multiplied(sij) +
                           AffineExpr(MatrixXd(sji.transpose() * dj)) + AffineExpr(rij);
    st.w_row.push_back(assemble({{w11, w12, AffineExpr::zero(ni, mj)},
                                 {w21, w22, AffineExpr::zero(pi, mj)},
                                 {AffineExpr::zero(mi, nj), AffineExpr::zero(mi, pj),
                                  AffineExpr::zero(mi, mj)}}));
  }
}

void Runner::build_dissipativation(Step& st, int i, const std::vector<int>& prev, double beta) {
  const Index ni = init_.nx[i], pi = init_.nu[i], qi = init_.nw[i], mi = init_.ny[i];
  const QsrSpec& qsr = *qsr_;
  const AffineExpr m = st.cert;
  const MatrixXd bi = work_.B.block(i, i), ci = work_.C.block(i, i), fi = work_.F.block(i, i);
  const MatrixXd sii = qsr.S.block(i, i), rii = qsr.R.block(i, i);

  AffineExpr am = m.left_multiplied(work_.A.block(i, i));
  if (pi > 0) {
    const VarHandle l = st.rect(pi, ni, "L");
    am += AffineExpr(l).left_multiplied(bi);
    st.assigns.push_back({Target::K, i, i, l, Recover::RightInvOwn});
    norm_term(st, AffineExpr(l), opt_.gain_regularization);
  }
  const AffineExpr w12 = -AffineExpr(MatrixXd(work_.E.block(i, i))) +
                         m.right_multiplied(ci.transpose() * sii);
  const MatrixXd w22 = sym(fi.transpose() * sii + sii.transpose() * fi) + rii;
  const AffineExpr w13 = m.right_multiplied(ci.transpose());
  const AffineExpr w33 = mi > 0 ? AffineExpr(MatrixXd(-qsr.Q.block(i, i).inverse()))
                                : AffineExpr::zero(0, 0);
  st.w_ii = assemble({{-am - am.transpose(), w12, w13},
                      {w12.transpose(), AffineExpr(w22), AffineExpr(MatrixXd(fi.transpose()))},
                      {w13.transpose(), AffineExpr(fi), w33}});
  if (qi > 0 && min_eig(w22) <= 0)
    st.screen = "F'S + S'F + R of the subsystem is not positive definite";

  for (int j : prev) {
    const Index nj = init_.nx[j], pj = init_.nu[j], qj = init_.nw[j], mj = init_.ny[j];
    const MatrixXd& mjj = certs_[j];
    const MatrixXd sij = qsr.S.block(i, j), sji = qsr.S.block(j, i), rij = qsr.R.block(i, j);
    const MatrixXd bj = work_.B.block(j, j), cj = work_.C.block(j, j), fj = work_.F.block(j, j);

    AffineExpr w11 = AffineExpr::zero(ni, nj);
    if (a_free(i, j)) {
      const VarHandle x = st.rect(ni, nj, "A");
      w11 -= AffineExpr(x).right_multiplied(mjj);
      st.assigns.push_back({Target::A, i, j, x, Recover::Direct});
      norm_term(st, AffineExpr(x) - AffineExpr(target(i, j)), beta * weight(i, j));
    } else {
      w11 -= AffineExpr(MatrixXd(work_.A.block(i, j) * mjj));
    }
    if (a_free(j, i)) {
      const VarHandle g = st.rect(nj, ni, "G");
      w11 -= AffineExpr(g).transpose();
      st.assigns.push_back({Target::A, j, i, g, Recover::RightInvOwn});
      norm_term(st, AffineExpr(g) - m.left_multiplied(target(j, i)), weight(j, i));
    } else {
      w11 -= m.right_multiplied(work_.A.block(j, i).transpose());
    }
    if (pi > 0 && k_free(i, j)) {
      const VarHandle l = st.rect(pi, nj, "L");
      w11 -= AffineExpr(l).left_multiplied(bi);
      st.assigns.push_back({Target::K, i, j, l, Recover::RightInvOther, j});
      norm_term(st, AffineExpr(l), k_weight(i, j));
    }
    if (pj > 0 && k_free(j, i)) {
      const VarHandle l = st.rect(pj, ni, "L");
      w11 -= AffineExpr(l).transpose().right_multiplied(bj.transpose());
      st.assigns.push_back({Target::K, j, i, l, Recover::RightInvOwn});
      norm_term(st, AffineExpr(l), k_weight(j, i));
    }

    AffineExpr w12 = m.right_multiplied(ci.transpose() * sij);
    if (qj > 0) {
      if (input_free(i, j)) {
        const VarHandle e = st.rect(ni, qj, "E");
        w12 -= AffineExpr(e);
        st.assigns.push_back({Target::E, i, j, e, Recover::Direct});
        norm_term(st, AffineExpr(e) - AffineExpr(input_target(init_.E, i, j)),
                  beta * weight(i, j));
      } else {
        w12 -= AffineExpr(MatrixXd(work_.E.block(i, j)));
      }
    }
    AffineExpr w21 = AffineExpr(MatrixXd(sji.transpose() * cj * mjj));
    if (qi > 0) {
      if (input_free(j, i)) {
        const VarHandle e = st.rect(nj, qi, "E");
        w21 -= AffineExpr(e).transpose();
        st.assigns.push_back({Target::E, j, i, e, Recover::Direct});
        norm_term(st, AffineExpr(e) - AffineExpr(input_target(init_.E, j, i)),
                  beta * weight(j, i));
      } else {
        w21 -= AffineExpr(MatrixXd(work_.E.block(j, i).transpose()));
      }
    }
    const MatrixXd w22 = fi.transpose() * sij + sji.transpose() * fj + rij;
    st.w_row.push_back(assemble({{w11, w12, AffineExpr::zero(ni, mj)},
                                 {w21, AffineExpr(w22), AffineExpr::zero(qi, mj)},
                                 {AffineExpr::zero(mi, nj), AffineExpr::zero(mi, qj),
                                  AffineExpr::zero(mi, mj)}}));
  }
}

Step Runner::build(int i, const std::vector<int>& prev, double beta) {
  Step st;
  const Index ni = init_.nx[i];
  st.cert = st.prob.symmetric(ni, feedback() ? "M" : "P");
  st.prob.add_psd(AffineExpr(st.cert), opt_.lyapunov_floor, "floor");
  switch (mode_) {
    case SynthesisMode::Stability:
      build_stability(st, i, prev, beta);
      break;
    case SynthesisMode::Stabilizability:
      build_stabilizability(st, i, prev, beta);
      break;
    case SynthesisMode::Dissipativity:
      build_dissipativity(st, i, prev, beta);
      break;
    case SynthesisMode::Dissipativation:
      build_dissipativation(st, i, prev, beta);
      break;
  }
  st.prob.add_psd(
      schur_linearized_constraint(st.w_ii, st.w_row, archive_,
                                  std::max(opt_.eps, opt_.step_margin), opt_.form), 0.0,
      "schur");
  return st;
}

MatrixXd Runner::recover(const Assignment& a, const lmi::Values& v, const MatrixXd& cert) const {
  const MatrixXd& x = v[a.var];
  switch (a.how) {
    case Recover::Direct:
      return x;
    case Recover::LeftInvOwn:
      return cert.llt().solve(x);
    case Recover::RightInvOwn:
      return cert.llt().solve(x.transpose()).transpose();
    default:
      return certs_[static_cast<std::size_t>(a.other)].llt().solve(x.transpose()).transpose();
  }
}

void Runner::apply(const Assignment& a, const MatrixXd& block) {
  BlockMatrixd* m = nullptr;
  switch (a.target) {
    case Target::A:
      m = &work_.A;
      break;
    case Target::B:
      m = &work_.B;
      break;
    case Target::E:
      m = &work_.E;
      break;
    case Target::K:
      m = &*work_.K;
      break;
    case Target::C:
      m = &work_.C;
      break;
    case Target::D:
      m = &work_.D;
      break;
  }
  m->block(a.r, a.c) = block;
}

MatrixXd Runner::global_w() const {
  const BlockMatrixd cert = BlockMatrixd::block_diagonal(certs_);
  const MatrixXd& c = cert.dense();
  const Index n = c.rows();
  switch (mode_) {
    case SynthesisMode::Stability: {
      const MatrixXd a = work_.A.dense() + opt_.decay * eye(n);
      return -a.transpose() * c - c * a;
    }
    case SynthesisMode::Stabilizability: {
      const MatrixXd a = work_.closed_loop_a() + opt_.decay * eye(n);
      return -a * c - c * a.transpose();
    }
    case SynthesisMode::Dissipativity: {
      const MatrixXd a = work_.A.dense(), b = work_.B.dense(), cc = work_.C.dense(),
                     d = work_.D.dense(), s = qsr_->S.dense(), r = qsr_->R.dense(),
                     q = qsr_->Q.dense();
      const Index p = b.cols(), m = cc.rows();
      MatrixXd psi(n + p + m, n + p + m);
      psi << -a.transpose() * c - c * a, -c * b + cc.transpose() * s, cc.transpose(),
          (-c * b + cc.transpose() * s).transpose(), d.transpose() * s + s.transpose() * d + r,
          d.transpose(), cc, d, -q.inverse();
      return sym(psi);
    }
    default: {
      const MatrixXd a = work_.closed_loop_a(), e = work_.E.dense(), cc = work_.C.dense(),
                     f = work_.F.dense(), s = qsr_->S.dense(), r = qsr_->R.dense(),
                     q = qsr_->Q.dense();
      const Index w = e.cols(), m = cc.rows();
      const MatrixXd w12 = -e + c * cc.transpose() * s;
      MatrixXd psi(n + w + m, n + w + m);
      psi << -a * c - c * a.transpose(), w12, c * cc.transpose(), w12.transpose(),
          f.transpose() * s + s.transpose() * f + r, f.transpose(), cc * c, f, -q.inverse();
      return sym(psi);
    }
  }
}

void Runner::verify(SynthesisResult& res) const {
  Verification& v = res.verification;
  std::ostringstream msg;
  v.w_min_eigenvalue = min_eig(global_w());
  bool ok = v.w_min_eigenvalue > 0;
  if (!ok) msg << "assembled W is not positive definite; ";
  const double half = opt_.eps / 2;
  for (int k = 0; k < archive_.size(); ++k)
    if (min_eig(archive_.row(k).blocks.back()) < half) {
      ok = false;
      msg << "Wt of step " << k + 1 << " below eps/2; ";
    }
  for (std::size_t k = 0; k < certs_.size(); ++k)
    if (min_eig(certs_[k]) < half) {
      ok = false;
      msg << "certificate " << k + 1 << " below eps/2; ";
    }
  v.certificate_ok = ok;
  v.stability = eigen_stability_oracle(work_.closed_loop_a());
  bool passed = ok;
  if (mode_ == SynthesisMode::Stability || mode_ == SynthesisMode::Stabilizability) {
    if (!v.stability.hurwitz) {
      passed = false;
      msg << "system matrix is not Hurwitz; ";
    }
  } else if (opt_.verify) {
    const bool dist = mode_ == SynthesisMode::Dissipativation;
    const Certificate cert = check_dissipativity_centralized(
        work_, *qsr_, dist ? Channel::Disturbance : Channel::Input);
    v.dissipativity_ok = cert.feasible;
    if (!cert.feasible) msg << "centralized dissipativity check failed; ";
    const MatrixXd a = work_.closed_loop_a();
    const MatrixXd in = dist ? work_.E.dense() : work_.B.dense();
    const MatrixXd ft = dist ? work_.F.dense() : work_.D.dense();
    try {
      v.simulation_violation =
          simulate_dissipation(a, in, work_.C.dense(), ft, qsr_->Q.dense(), qsr_->S.dense(),
                               qsr_->R.dense(), res.lyapunov_matrix().dense(), opt_.simulation)
              .max_violation;
    } catch (const SimulationError& e) {
      v.simulation_violation = std::numeric_limits<double>::infinity();
      msg << e.what() << "; ";
    }
    if (v.simulation_violation > 1e-6) msg << "simulated dissipation violated; ";
    passed = passed && cert.feasible && v.simulation_violation <= 1e-6;
  }
  v.passed = passed;
  v.message = msg.str();
  if (!v.message.empty()) v.message.resize(v.message.size() - 2);
}

SynthesisResult Runner::run() {
  SynthesisResult res;
  res.mode = mode_;
  std::vector<int> prev;
  double last_norm = 1.0;
  const int n = init_.size();

  for (int s = 0; s < n; ++s) {
    const int i = order_[static_cast<std::size_t>(s)];
    const double beta = opt_.beta.value_or(last_norm);
    StepRecord rec;
    rec.subsystem = i;
    rec.step = s;
    std::optional<Step> built;
    std::string numerical;
    try {
      built.emplace(build(i, prev, beta));
    } catch (const NumericalError& e) {
      numerical = e.what();
    }
    if (!built) {
      rec.message = "step " + std::to_string(s + 1) + ": local problem for subsystem " +
                    std::to_string(i + 1) + " is not certified numerically (" + numerical + ")";
      res.steps.push_back(rec);
      res.failing_subsystem = i;
      res.message = rec.message;
      break;
    }
    Step& st = *built;
    const lmi::Solution sol = lmi::solve(st.prob, opt_.solver);
    rec.solver_status = sol.status;
    rec.iterations = sol.iterations;
    rec.objective = sol.objective;

    bool accepted = false;
    std::vector<std::pair<Assignment, MatrixXd>> blocks;
    // Accepts the point after snapping small couplings to zero, or as solved
    // when snapping breaks the numeric check.
    auto attempt = [&](bool snap, bool& snapped) {
      lmi::Values vals = sol.values;
      const MatrixXd cert = sym(vals[st.cert]);
      snapped = false;
      if (snap)
        for (const Assignment& a : st.assigns) {
          if (a.r == a.c) continue;
          if (vals[a.var].norm() > 0 && recover(a, vals, cert).norm() < opt_.snap) {
            vals.data[static_cast<std::size_t>(a.var.id)].setZero();
            snapped = true;
          }
        }
      if (min_eig(cert) < opt_.eps / 2) return false;
      std::vector<MatrixXd> row;
      for (const AffineExpr& e : st.w_row) row.push_back(lmi::realize(e, vals));
      row.push_back(sym(lmi::realize(st.w_ii, vals)));
      CertificateArchive trial = archive_;
      StepResult r;
      try {
        r = decompose_step(s, row, trial, i, opt_.eps / 2);
      } catch (const NumericalError&) {
        return false;
      }
      rec.wt_min_eigenvalue = r.min_eigenvalue;
      if (!r.verdict) return false;
      archive_ = std::move(trial);
      certs_[static_cast<std::size_t>(i)] = cert;
      for (const Assignment& a : st.assigns) {
        blocks.emplace_back(a, recover(a, vals, cert));
        if (a.target == Target::K) l_->block(a.r, a.c) = vals[a.var];
      }
      return true;
    };
    if (sol.status != lmi::SolveStatus::Infeasible) {
      bool snapped = false;
      accepted = attempt(true, snapped);
      if (!accepted && snapped) accepted = attempt(false, snapped);
    }
    rec.accepted = accepted;
    if (!accepted) {
      std::ostringstream m;
      m << "step " << s + 1 << ": local problem for subsystem " << i + 1 << " is "
        << (sol.status == lmi::SolveStatus::Infeasible ? "infeasible"
                                                       : "not certified numerically");
      if (!st.screen.empty()) m << " (" << st.screen << ")";
      rec.message = m.str();
      res.steps.push_back(rec);
      res.success = false;
      res.failing_subsystem = i;
      res.message = rec.message;
      break;
    }
    for (const auto& [a, b] : blocks) apply(a, b);
    rec.certificate_norm = certs_[i].norm();
    last_norm = rec.certificate_norm;
    res.objective += rec.objective;
    res.steps.push_back(rec);
    prev.push_back(i);
  }

  // Topology: fixed pairs keep their status, designed pairs follow their blocks.
  const Topology realized = work_.realized_topology();
  Topology topo(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool edge = spec_.fixed(i, j) ? (init_.topology.has_edge(i, j) ||
                                             realized.has_edge(i, j))
                                          : realized.has_edge(i, j);
      if (edge) topo.add_edge(i, j);
    }
  work_.topology = topo;
  res.system = work_;
  res.certificates = certs_;
  res.L = l_;
  res.archive = archive_;
  res.cost = deviation_and_nominal_cost(init_, work_, costs_);

  if (res.failing_subsystem) {
    if (opt_.raise) throw StepInfeasible(*res.failing_subsystem, res.message);
    return res;
  }
  verify(res);
  res.success = res.verification.passed;
  if (!res.success) {
    res.message = "verification failed: " + res.verification.message;
    if (opt_.raise) throw VerificationError(res.message);
  }
  return res;
}

void require_block_diagonal(const BlockMatrixd& m, const char* name) {
  if (!m.is_block_diagonal())
    throw SpecError(std::string(name) + " must be block diagonal for this synthesis");
}

void check_qsr(const QsrSpec& qsr, const std::vector<Index>& ydims,
               const std::vector<Index>& udims) {
  qsr.validate();
  if (qsr.Q.row_dims() != ydims || qsr.R.row_dims() != udims)
    throw SpecError("QSR partition does not match the system");
  if (!qsr.Q.is_block_diagonal()) throw SpecError("Q must be block diagonal");
}

}  // namespace

SynthesisResult synthesize_stability(const NetworkedSystem& sys, const DesignSpec& spec,
                                     const MatrixXd& costs, const SynthesisOptions& opt) {
  sys.validate();
  for (int i = 0; i < sys.size(); ++i) {
    const MatrixXd aii = sys.A.block(i, i);
    const StabilityVerdict v = eigen_stability_oracle(aii, opt.decay);
    if (!v.hurwitz) {
      std::ostringstream m;
      m << "subsystem " << i + 1 << ": A_ii is not Hurwitz (max Re lambda = " << v.max_real
        << "); no block-diagonal certificate exists";
      throw DiagnosticError(i, m.str());
    }
  }
  return Runner(SynthesisMode::Stability, sys, spec, nullptr, costs, opt).run();
}

SynthesisResult synthesize_stabilizability(const NetworkedSystem& sys, const DesignSpec& spec,
                                           const MatrixXd& costs,
                                           const SynthesisOptions& opt) {
  sys.validate();
  require_block_diagonal(sys.B, "B");
  return Runner(SynthesisMode::Stabilizability, sys, spec, nullptr, costs, opt).run();
}

SynthesisResult synthesize_dissipativity(const NetworkedSystem& sys, const DesignSpec& spec,
                                         const QsrSpec& qsr, const MatrixXd& costs,
                                         const SynthesisOptions& opt) {
  sys.validate();
  require_block_diagonal(sys.C, "C");
  require_block_diagonal(sys.D, "D");
  check_qsr(qsr, sys.ny, sys.nu);
  return Runner(SynthesisMode::Dissipativity, sys, spec, &qsr, costs, opt).run();
}

SynthesisResult synthesize_dissipativation(const NetworkedSystem& sys, const DesignSpec& spec,
                                           const QsrSpec& qsr, const MatrixXd& costs,
                                           const SynthesisOptions& opt) {
  sys.validate();
  require_block_diagonal(sys.B, "B");
  require_block_diagonal(sys.C, "C");
  require_block_diagonal(sys.F, "F");
  if (!sys.D.dense().isZero(0.0)) throw SpecError("D must be zero for this synthesis");
  check_qsr(qsr, sys.ny, sys.nw);
  return Runner(SynthesisMode::Dissipativation, sys, spec, &qsr, costs, opt).run();
}

nlohmann::json synthesis_report(const SynthesisResult& r) {
  using nlohmann::json;
  json steps = json::array();
  for (const StepRecord& s : r.steps)
    steps.push_back({{"step", s.step + 1},
                     {"subsystem", s.subsystem + 1},
                     {"solver_status", lmi::to_string(s.solver_status)},
                     {"accepted", s.accepted},
                     {"objective", s.objective},
                     {"wt_min_eigenvalue", s.wt_min_eigenvalue},
                     {"certificate_norm", s.certificate_norm},
                     {"iterations", s.iterations},
                     {"message", s.message}});
  json edges = json::array();
  for (int i = 0; i < r.system.size(); ++i)
    for (int j : r.system.topology.in_neighbors(i)) edges.push_back({i + 1, j + 1});
  const Verification& v = r.verification;
  return {{"mode", to_string(r.mode)},
          {"success", r.success},
          {"failing_subsystem",
           r.failing_subsystem ? json(*r.failing_subsystem + 1) : json(nullptr)},
          {"message", r.message},
          {"objective", r.objective},
          {"J_dev", r.cost.deviation},
          {"J_nom", r.cost.nominal},
          {"edges", edges},
          {"steps", steps},
          {"verification",
           {{"passed", v.passed},
            {"certificate_ok", v.certificate_ok},
            {"w_min_eigenvalue", v.w_min_eigenvalue},
            {"max_real_eigenvalue", v.stability.max_real},
            {"dissipativity_ok", v.dissipativity_ok},
            {"simulation_violation", v.simulation_violation},
            {"message", v.message}}}};
}

}  // namespace netsyn
