#include "netsyn/lmi/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "netsyn/errors.hpp"

namespace netsyn::lmi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

}  // namespace

Index ConeDims::total() const {
  Index t = nonneg;
  for (Index q : soc) t += q;
  for (Index n : psd) t += svec_size(n);
  return t;
}

Index ConeDims::degree() const {
  Index d = nonneg + static_cast<Index>(soc.size());
  for (Index n : psd) d += n;
  return d;
}

const char* to_string(ConicStatus s) {
  switch (s) {
    case ConicStatus::Optimal:
      return "optimal";
    case ConicStatus::PrimalInfeasible:
      return "primal infeasible";
    case ConicStatus::DualInfeasible:
      return "dual infeasible";
    default:
      return "inaccurate";
  }
}

Index svec_size(Index n) { return n * (n + 1) / 2; }

VectorXd svec(const MatrixXd& x) {
  const Index n = x.rows();
  VectorXd v(svec_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    v(k++) = x(j, j);
    for (Index i = j + 1; i < n; ++i) v(k++) = kSqrt2 * x(i, j);
  }
  return v;
}

MatrixXd smat(const Eigen::Ref<const VectorXd>& v, Index n) {
  MatrixXd x(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    x(j, j) = v(k++);
    for (Index i = j + 1; i < n; ++i) {
      x(i, j) = v(k++) / kSqrt2;
      x(j, i) = x(i, j);
    }
  }
  return x;
}

namespace {

// Iterates over cone blocks, handing out (kind, offset, size, order).
enum class Kind { Nonneg, Soc, Psd };
struct Segment {
  Kind kind;
  Index offset;
  Index size;
  Index order;  // PSD matrix order, otherwise size
  std::size_t index;
};

std::vector<Segment> segments(const ConeDims& dims) {
  std::vector<Segment> segs;
  Index off = 0;
  if (dims.nonneg > 0) {
    segs.push_back({Kind::Nonneg, 0, dims.nonneg, dims.nonneg, 0});
    off = dims.nonneg;
  }
  for (std::size_t k = 0; k < dims.soc.size(); ++k) {
    segs.push_back({Kind::Soc, off, dims.soc[k], dims.soc[k], k});
    off += dims.soc[k];
  }
  for (std::size_t k = 0; k < dims.psd.size(); ++k) {
    const Index d = svec_size(dims.psd[k]);
    segs.push_back({Kind::Psd, off, d, dims.psd[k], k});
    off += d;
  }
  return segs;
}

double soc_min_eig(const Eigen::Ref<const VectorXd>& u) {
  return u(0) - u.tail(u.size() - 1).norm();
}

double psd_min_eig(const Eigen::Ref<const VectorXd>& u, Index n) {
  if (n == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(u, n),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

VectorXd identity_element(const ConeDims& dims) {
  VectorXd e = VectorXd::Zero(dims.total());
  for (const auto& seg : segments(dims)) {
    switch (seg.kind) {
      case Kind::Nonneg:
        e.segment(seg.offset, seg.size).setOnes();
        break;
      case Kind::Soc:
        e(seg.offset) = 1.0;
        break;
      case Kind::Psd:
        e.segment(seg.offset, seg.size) =
            svec(MatrixXd::Identity(seg.order, seg.order));
        break;
    }
  }
  return e;
}

/// Nesterov-Todd scaling W with W z = W^{-T} s = lambda.
struct Scaling {
  ConeDims dims;
  std::vector<Segment> segs;
  VectorXd d;  // nonneg
  std::vector<double> beta;
  std::vector<VectorXd> v;
  std::vector<MatrixXd> r, rinv;
  std::vector<VectorXd> l;  // PSD scaled eigenvalues
  VectorXd lambda;
};

std::optional<Scaling> compute_scaling(const VectorXd& s, const VectorXd& z,
                                       const ConeDims& dims) {
  Scaling w;
  w.dims = dims;
  w.segs = segments(dims);
  w.lambda = VectorXd::Zero(s.size());
  w.beta.resize(dims.soc.size());
  w.v.resize(dims.soc.size());
  w.r.resize(dims.psd.size());
  w.rinv.resize(dims.psd.size());
  w.l.resize(dims.psd.size());
  for (const auto& seg : w.segs) {
    const auto ss = s.segment(seg.offset, seg.size);
    const auto zz = z.segment(seg.offset, seg.size);
    switch (seg.kind) {
      case Kind::Nonneg: {
        if ((ss.array() <= 0).any() || (zz.array() <= 0).any())
          return std::nullopt;
        w.d = (ss.array() / zz.array()).sqrt();
        w.lambda.segment(seg.offset, seg.size) =
            (ss.array() * zz.array()).sqrt();
        break;
      }
      case Kind::Soc: {
        const Index m = seg.size;
        const double sjs = ss(0) * ss(0) - ss.tail(m - 1).squaredNorm();
        const double zjz = zz(0) * zz(0) - zz.tail(m - 1).squaredNorm();
        if (sjs <= 0 || zjz <= 0 || ss(0) <= 0 || zz(0) <= 0)
          return std::nullopt;
        const VectorXd sb = ss / std::sqrt(sjs);
        const VectorXd zb = zz / std::sqrt(zjz);
        const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        VectorXd wb = sb;
        wb(0) += zb(0);
        wb.tail(m - 1) -= zb.tail(m - 1);
        wb /= 2.0 * gamma;
        VectorXd vv = wb;
        vv(0) += 1.0;
        vv /= std::sqrt(2.0 * (wb(0) + 1.0));
        const double beta = std::pow(sjs / zjz, 0.25);
        w.beta[seg.index] = beta;
        w.v[seg.index] = vv;
        // lambda = W z = beta (2 v v'z - J z)
        VectorXd jz = zz;
        jz.tail(m - 1) *= -1.0;
        w.lambda.segment(seg.offset, m) = beta * (2.0 * vv * vv.dot(zz) - jz);
        break;
      }
      case Kind::Psd: {
        const Index n = seg.order;
        Eigen::LLT<MatrixXd> ls(smat(ss, n)), lz(smat(zz, n));
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success)
          return std::nullopt;
        const MatrixXd lsm = ls.matrixL();
        const MatrixXd lzm = lz.matrixL();
        Eigen::JacobiSVD<MatrixXd> svd(lzm.transpose() * lsm,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd sig = svd.singularValues();
        if (sig.minCoeff() <= 0) return std::nullopt;
        const VectorXd isq = sig.cwiseSqrt().cwiseInverse();
        w.r[seg.index] = lsm * svd.matrixV() * isq.asDiagonal();
        w.rinv[seg.index] =
            isq.asDiagonal() * svd.matrixU().transpose() * lzm.transpose();
        w.l[seg.index] = sig;
        w.lambda.segment(seg.offset, seg.size) =
            svec(MatrixXd(sig.asDiagonal()));
        break;
      }
    }
  }
  return w;
}

enum class Op { W, WT, Winv, WinvT };

void apply_scaling(const Scaling& w, Op op, Eigen::Ref<VectorXd> u) {
  for (const auto& seg : w.segs) {
    auto us = u.segment(seg.offset, seg.size);
    switch (seg.kind) {
      case Kind::Nonneg:
        if (op == Op::W || op == Op::WT)
          us.array() *= w.d.array();
        else
          us.array() /= w.d.array();
        break;
      case Kind::Soc: {
        const VectorXd& v = w.v[seg.index];
        const double beta = w.beta[seg.index];
        const Index m = seg.size;
        VectorXd ju = us;
        ju.tail(m - 1) *= -1.0;
        if (op == Op::W || op == Op::WT) {
          const VectorXd out = beta * (2.0 * v * v.dot(us) - ju);
          us = out;
        } else {
          VectorXd jv = v;
          jv.tail(m - 1) *= -1.0;
          const VectorXd out = (2.0 * jv * jv.dot(us) - ju) / beta;
          us = out;
        }
        break;
      }
      case Kind::Psd: {
        const MatrixXd& r = w.r[seg.index];
        const MatrixXd& ri = w.rinv[seg.index];
        const MatrixXd um = smat(us, seg.order);
        MatrixXd out;
        switch (op) {
          case Op::W:
            out = r.transpose() * um * r;
            break;
          case Op::WT:
            out = r * um * r.transpose();
            break;
          case Op::Winv:
            out = ri.transpose() * um * ri;
            break;
          case Op::WinvT:
            out = ri * um * ri.transpose();
            break;
        }
        us = svec(out);
        break;
      }
    }
  }
}

VectorXd jordan_product(const VectorXd& a, const VectorXd& b,
                        const std::vector<Segment>& segs) {
  VectorXd out(a.size());
  for (const auto& seg : segs) {
    const auto as = a.segment(seg.offset, seg.size);
    const auto bs = b.segment(seg.offset, seg.size);
    auto os = out.segment(seg.offset, seg.size);
    switch (seg.kind) {
      case Kind::Nonneg:
        os = as.cwiseProduct(bs);
        break;
      case Kind::Soc: {
        const Index m = seg.size;
        os(0) = as.dot(bs);
        os.tail(m - 1) = as(0) * bs.tail(m - 1) + bs(0) * as.tail(m - 1);
        break;
      }
      case Kind::Psd: {
        const MatrixXd am = smat(as, seg.order), bm = smat(bs, seg.order);
        os = svec(0.5 * (am * bm + bm * am));
        break;
      }
    }
  }
  return out;
}

/// Solves lambda o x = y for x.
VectorXd inverse_product(const Scaling& w, const VectorXd& y) {
  VectorXd x(y.size());
  for (const auto& seg : w.segs) {
    const auto lam = w.lambda.segment(seg.offset, seg.size);
    const auto ys = y.segment(seg.offset, seg.size);
    auto xs = x.segment(seg.offset, seg.size);
    switch (seg.kind) {
      case Kind::Nonneg:
        xs = ys.cwiseQuotient(lam);
        break;
      case Kind::Soc: {
        const Index m = seg.size;
        const double det = lam(0) * lam(0) - lam.tail(m - 1).squaredNorm();
        const double x0 = (lam(0) * ys(0) - lam.tail(m - 1).dot(ys.tail(m - 1))) / det;
        xs(0) = x0;
        xs.tail(m - 1) = (ys.tail(m - 1) - x0 * lam.tail(m - 1)) / lam(0);
        break;
      }
      case Kind::Psd: {
        const VectorXd& l = w.l[seg.index];
        const Index n = seg.order;
        Index k = 0;
        for (Index j = 0; j < n; ++j) {
          xs(k) = ys(k) / l(j);
          ++k;
          for (Index i = j + 1; i < n; ++i, ++k)
            xs(k) = 2.0 * ys(k) / (l(i) + l(j));
        }
        break;
      }
    }
  }
  return x;
}

/// Largest alpha with lambda + alpha * d in K (may be +inf).
double max_step(const Scaling& w, const VectorXd& dir) {
  double alpha = kInf;
  for (const auto& seg : w.segs) {
    const auto lam = w.lambda.segment(seg.offset, seg.size);
    const auto ds = dir.segment(seg.offset, seg.size);
    switch (seg.kind) {
      case Kind::Nonneg:
        for (Index k = 0; k < seg.size; ++k)
          if (ds(k) < 0) alpha = std::min(alpha, -lam(k) / ds(k));
        break;
      case Kind::Soc: {
        // g(t) = u0 - |u1| is concave with g(0) > 0; its first zero is a
        // root of q(t) = u0^2 - |u1|^2 with u0 >= 0.
        const Index m = seg.size;
        const double a = ds(0) * ds(0) - ds.tail(m - 1).squaredNorm();
        const double b = lam(0) * ds(0) - lam.tail(m - 1).dot(ds.tail(m - 1));
        const double c = lam(0) * lam(0) - lam.tail(m - 1).squaredNorm();
        std::vector<double> roots;
        if (std::abs(a) < 1e-300) {
          if (b != 0) roots.push_back(-c / (2.0 * b));
        } else {
          const double disc = b * b - a * c;
          if (disc >= 0) {
            const double sq = std::sqrt(disc);
            roots.push_back((-b - sq) / a);
            roots.push_back((-b + sq) / a);
          }
        }
        double best = kInf;
        for (double t : roots)
          if (t > 0 && lam(0) + t * ds(0) >= -1e-300) best = std::min(best, t);
        if (ds(0) < 0) best = std::min(best, -lam(0) / ds(0));
        alpha = std::min(alpha, best);
        break;
      }
      case Kind::Psd: {
        const VectorXd isq = w.l[seg.index].cwiseSqrt().cwiseInverse();
        const MatrixXd m = isq.asDiagonal() * smat(ds, seg.order) * isq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
        const double mu = es.eigenvalues().minCoeff();
        if (mu < 0) alpha = std::min(alpha, -1.0 / mu);
        break;
      }
    }
  }
  return alpha;
}

/// Largest alpha with u + alpha e in K fails, i.e. inf{alpha : u + alpha e in K}.
double interior_shift(const VectorXd& u, const ConeDims& dims) {
  double a = -kInf;
  for (const auto& seg : segments(dims)) {
    const auto us = u.segment(seg.offset, seg.size);
    switch (seg.kind) {
      case Kind::Nonneg:
        a = std::max(a, -us.minCoeff());
        break;
      case Kind::Soc:
        a = std::max(a, -soc_min_eig(us));
        break;
      case Kind::Psd:
        a = std::max(a, -psd_min_eig(us, seg.order));
        break;
    }
  }
  return a;
}

/// Factorization of the KKT system
///   [ 0  A'  G'     ] [x]   [bx]
///   [ A  0   0      ] [y] = [by]
///   [ G  0  -W'W    ] [z]   [bz]
class KktSolver {
 public:
  KktSolver(const ConeProgram& p, const Scaling* w) : p_(p), w_(w) {
    const Index n = p.G.cols();
    ghat_ = p.G;
    if (w_) {
      for (Index k = 0; k < n; ++k) apply_scaling(*w_, Op::WinvT, ghat_.col(k));
    }
    MatrixXd h = ghat_.transpose() * ghat_;
    const bool has_eq = p.A.rows() > 0;
    if (has_eq) h.noalias() += p.A.transpose() * p.A;
    const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    double reg = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
      llt_.compute(h + reg * MatrixXd::Identity(n, n));
      if (llt_.info() == Eigen::Success) break;
      reg = (reg == 0.0) ? 1e-14 * scale : reg * 100.0;
    }
    if (llt_.info() != Eigen::Success)
      throw SolverError("KKT system is singular");
    if (has_eq) {
      hinv_at_ = llt_.solve(p.A.transpose());
      schur_.compute(p.A * hinv_at_);
      if (schur_.info() != Eigen::Success)
        throw SolverError("equality constraints are rank deficient");
    }
  }

  /// Returns x, y, z and W z.
  void solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
             VectorXd& x, VectorXd& y, VectorXd& z, VectorXd& wz) const {
    VectorXd bzh = bz;
    if (w_) apply_scaling(*w_, Op::WinvT, bzh);
    VectorXd r1 = bx + ghat_.transpose() * bzh;
    if (p_.A.rows() > 0) {
      r1 += p_.A.transpose() * by;
      const VectorXd hr = llt_.solve(r1);
      y = schur_.solve(p_.A * hr - by);
      x = hr - hinv_at_ * y;
    } else {
      y.resize(0);
      x = llt_.solve(r1);
    }
    wz = ghat_ * x - bzh;
    z = wz;
    if (w_) apply_scaling(*w_, Op::Winv, z);
  }

 private:
  const ConeProgram& p_;
  const Scaling* w_;
  MatrixXd ghat_;
  Eigen::LLT<MatrixXd> llt_;
  MatrixXd hinv_at_;
  Eigen::LLT<MatrixXd> schur_;
};

double safe_norm(const VectorXd& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

double cone_min_eigenvalue(const VectorXd& v, const ConeDims& dims) {
  double m = kInf;
  for (const auto& seg : segments(dims)) {
    const auto us = v.segment(seg.offset, seg.size);
    switch (seg.kind) {
      case Kind::Nonneg:
        m = std::min(m, us.minCoeff());
        break;
      case Kind::Soc:
        m = std::min(m, soc_min_eig(us));
        break;
      case Kind::Psd:
        m = std::min(m, psd_min_eig(us, seg.order));
        break;
    }
  }
  return m;
}

bool in_cone(const VectorXd& v, const ConeDims& dims, double tol) {
  return cone_min_eigenvalue(v, dims) >= -tol;
}

ConicResult solve_cone_program(const ConeProgram& p, const ConicOptions& opt) {
  const Index n = p.G.cols();
  const Index m = p.G.rows();
  const Index neq = p.A.rows();
  if (p.c.size() != n || p.h.size() != m || m != p.dims.total() ||
      (neq > 0 && (p.A.cols() != n || p.b.size() != neq)))
    throw SolverError("cone program dimensions are inconsistent");

  const auto segs = segments(p.dims);
  const VectorXd e = identity_element(p.dims);
  const double dg = static_cast<double>(p.dims.degree());

  ConicResult res;
  VectorXd x, y, z, s, wz, tmp;

  {
    KktSolver kkt(p, nullptr);
    VectorXd zero_x = VectorXd::Zero(n);
    VectorXd ys;
    kkt.solve(zero_x, p.b, p.h, x, ys, s, wz);
    s = -s;  // s = h - G x
    VectorXd xd;
    kkt.solve(-p.c, VectorXd::Zero(neq), VectorXd::Zero(m), xd, y, z, wz);
    const double ap = interior_shift(s, p.dims);
    if (ap >= 0) s += (1.0 + ap) * e;
    const double ad = interior_shift(z, p.dims);
    if (ad >= 0) z += (1.0 + ad) * e;
    if (neq == 0) y.resize(0);
  }
  double tau = 1.0, kappa = 1.0;

  const double resx0 = std::max(1.0, safe_norm(p.c));
  const double resy0 = std::max(1.0, safe_norm(p.b));
  const double resz0 = std::max(1.0, safe_norm(p.h));

  auto finish = [&](ConicStatus st, double scale_primal, double scale_dual) {
    res.status = st;
    res.x = x / scale_primal;
    res.s = s / scale_primal;
    res.z = z / scale_dual;
    res.y = y / scale_dual;
    return res;
  };

  for (int iter = 0; iter <= opt.max_iters; ++iter) {
    res.iterations = iter;
    VectorXd hrx = -(p.G.transpose() * z);
    if (neq) hrx -= p.A.transpose() * y;
    const VectorXd rx = hrx - p.c * tau;
    const VectorXd hry = neq ? VectorXd(p.A * x) : VectorXd();
    const VectorXd ry = neq ? VectorXd(hry - p.b * tau) : VectorXd();
    const VectorXd hrz = s + p.G * x;
    const VectorXd rz = hrz - p.h * tau;
    const double cx = p.c.dot(x);
    const double by = neq ? p.b.dot(y) : 0.0;
    const double hz = p.h.dot(z);
    const double rt = kappa + cx + by + hz;
    const double gap = s.dot(z);
    const double mu = (gap + tau * kappa) / (dg + 1.0);

    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    const double pres = std::max(safe_norm(ry) / resy0, safe_norm(rz) / resz0) / tau;
    const double dres = safe_norm(rx) / resx0 / tau;
    const double agap = gap / (tau * tau);
    double relgap = kInf;
    if (pcost < 0)
      relgap = agap / -pcost;
    else if (dcost > 0)
      relgap = agap / dcost;
    const double pinfres =
        (hz + by < 0) ? safe_norm(hrx) / resx0 / -(hz + by) : kInf;
    const double dinfres =
        (cx < 0) ? std::max(safe_norm(hry) / resy0, safe_norm(hrz) / resz0) / -cx
                 : kInf;

    res.primal_objective = pcost;
    res.dual_objective = dcost;
    res.primal_residual = pres;
    res.dual_residual = dres;
    res.gap = agap;

    if (pres <= opt.feastol && dres <= opt.feastol &&
        (agap <= opt.abstol || relgap <= opt.reltol))
      return finish(ConicStatus::Optimal, tau, tau);
    if (pinfres <= opt.feastol)
      return finish(ConicStatus::PrimalInfeasible, 1.0, -(hz + by));
    if (dinfres <= opt.feastol)
      return finish(ConicStatus::DualInfeasible, -cx, 1.0);
    if (iter == opt.max_iters) break;

    const auto w = compute_scaling(s, z, p.dims);
    if (!w) break;
    std::optional<KktSolver> kkt;
    try {
      kkt.emplace(p, &*w);
    } catch (const SolverError&) {
      break;
    }
    const VectorXd& lam = w->lambda;
    const VectorXd lamsq = jordan_product(lam, lam, segs);

    VectorXd x2, y2, z2, wz2;
    kkt->solve(-p.c, neq ? VectorXd(p.b) : VectorXd(), p.h, x2, y2, z2, wz2);
    const double ctx2 = p.c.dot(x2) + (neq ? p.b.dot(y2) : 0.0) + p.h.dot(z2);

    struct Direction {
      VectorXd dx, dy, dz, ds_scaled, dz_scaled;
      double dtau = 0, dkappa = 0;
    };

    auto direction = [&](double sigma, const VectorXd* corr_s,
                         double corr_k) -> Direction {
      const double eta = 1.0 - sigma;
      VectorXd rhs_s = -lamsq + sigma * mu * e;
      if (corr_s) rhs_s -= *corr_s;
      const double rhs_k = -tau * kappa + sigma * mu - corr_k;
      const VectorXd q = inverse_product(*w, rhs_s);
      VectorXd wtq = q;
      apply_scaling(*w, Op::WT, wtq);
      VectorXd x1, y1, z1, wz1;
      kkt->solve(eta * rx, neq ? VectorXd(-eta * ry) : VectorXd(),
                 -eta * rz - wtq, x1, y1, z1, wz1);
      const double ctx1 = p.c.dot(x1) + (neq ? p.b.dot(y1) : 0.0) + p.h.dot(z1);
      Direction d;
      d.dtau = (eta * rt + rhs_k / tau + ctx1) / (kappa / tau - ctx2);
      d.dx = x1 + d.dtau * x2;
      d.dy = neq ? VectorXd(y1 + d.dtau * y2) : VectorXd();
      d.dz = z1 + d.dtau * z2;
      d.dz_scaled = wz1 + d.dtau * wz2;
      d.ds_scaled = q - d.dz_scaled;
      d.dkappa = (rhs_k - kappa * d.dtau) / tau;
      return d;
    };

    auto step_to_boundary = [&](const Direction& d) {
      double a = std::min(max_step(*w, d.ds_scaled), max_step(*w, d.dz_scaled));
      if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const Direction aff = direction(0.0, nullptr, 0.0);
    const double alpha_aff = std::min(1.0, step_to_boundary(aff));
    const double sigma = std::pow(1.0 - alpha_aff, 3);
    const VectorXd corr = jordan_product(aff.ds_scaled, aff.dz_scaled, segs);
    const Direction dir = direction(sigma, &corr, aff.dtau * aff.dkappa);
    const double alpha = std::min(1.0, opt.step * step_to_boundary(dir));
    if (!(alpha > 0) || !std::isfinite(alpha)) break;

    VectorXd ds = dir.ds_scaled;
    apply_scaling(*w, Op::WT, ds);
    x += alpha * dir.dx;
    if (neq) y += alpha * dir.dy;
    z += alpha * dir.dz;
    s += alpha * ds;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
    if (!x.allFinite() || !s.allFinite() || !z.allFinite()) break;
  }
  return finish(ConicStatus::Inaccurate, tau, tau);
}

}  // namespace netsyn::lmi
