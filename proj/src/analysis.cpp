#include "netsyn/analysis.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>

#include <Eigen/Eigenvalues>

namespace netsyn {

namespace {

// Below this level the normalized stability problem is treated as
// infeasible; it sits well above the solver tolerance.
constexpr double kNormalizedFloor = 1e-7;

double min_eig(const MatrixXd& m) {
  if (m.size() == 0) return INFINITY;
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (m + m.transpose()),
                                                 Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

// x' = Ax + Bu with the supply integral carried as an extra state. The
// supply is expanded to x'Mxx x + 2 x'Mxu u + u'Muu u; buffers are reused
// across steps.
class Dynamics {
 public:
  Dynamics(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c, const MatrixXd& d,
           const MatrixXd& q, const MatrixXd& s, const MatrixXd& r)
      : a_(a), b_(b) {
    mxx_ = c.transpose() * q * c;
    mxu_ = c.transpose() * (q * d + s);
    muu_ = d.transpose() * q * d + d.transpose() * s + s.transpose() * d + r;
    const Index n = a.rows();
    for (auto* v : {&bu_, &g_, &k1_, &k2_, &k3_, &k4_, &tmp_}) v->resize(n);
  }

  Index states() const { return a_.rows(); }
  Index inputs() const { return b_.cols(); }

  void set_input(const Eigen::VectorXd& u) {
    bu_.noalias() = b_ * u;
    g_.noalias() = mxu_ * u;
    c0_ = u.dot(muu_ * u);
  }

  // One RK4 step under the input of the last set_input call.
  void step(Eigen::VectorXd& x, double& sigma, double h) {
    double sup = supply(x);
    k1_.noalias() = a_ * x;
    k1_ += bu_;
    tmp_ = x + 0.5 * h * k1_;
    sup += 2.0 * supply(tmp_);
    k2_.noalias() = a_ * tmp_;
    k2_ += bu_;
    tmp_ = x + 0.5 * h * k2_;
    sup += 2.0 * supply(tmp_);
    k3_.noalias() = a_ * tmp_;
    k3_ += bu_;
    tmp_ = x + h * k3_;
    sup += supply(tmp_);
    k4_.noalias() = a_ * tmp_;
    k4_ += bu_;
    sigma += h / 6.0 * sup;
    x += h / 6.0 * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  double supply(const Eigen::VectorXd& x) const {
    return x.dot(mxx_ * x) + 2.0 * x.dot(g_) + c0_;
  }

  const MatrixXd& a_;
  const MatrixXd& b_;
  MatrixXd mxx_, mxu_, muu_;
  Eigen::VectorXd bu_, g_, k1_, k2_, k3_, k4_, tmp_;
  double c0_ = 0.0;
};

struct Grid {
  double step;
  double horizon;
  long steps;
  long per_piece;
};

Grid make_grid(const MatrixXd& a, const SimulationOptions& opt) {
  double radius = a.size() ? a.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
  if (!(radius > 1e-9)) radius = 1.0;
  Grid g{};
  g.step = opt.step > 0 ? opt.step : 1e-3 / radius;
  g.horizon = opt.horizon > 0 ? opt.horizon : 10.0 / radius;
  const int pieces = std::max(1, opt.pieces);
  g.per_piece = std::max<long>(1, std::lround(g.horizon / g.step / pieces));
  g.steps = g.per_piece * pieces;
  g.step = g.horizon / static_cast<double>(g.steps);
  return g;
}

void check_shapes(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c, const MatrixXd& d,
                  const MatrixXd& q, const MatrixXd& s, const MatrixXd& r) {
  const Index n = a.rows(), m = b.cols(), p = c.rows();
  if (a.cols() != n || b.rows() != n || c.cols() != n || d.rows() != p || d.cols() != m ||
      q.rows() != p || q.cols() != p || s.rows() != p || s.cols() != m || r.rows() != m ||
      r.cols() != m)
    throw StructureError("system and supply rate shapes do not match");
}

// Runs one signal; calls `sample` after every step with the step index.
template <typename F>
void run_signal(Dynamics& dyn, const MatrixXd& p, const Grid& g,
                const SimulationOptions& opt, int signal, F&& sample) {
  std::mt19937_64 rng(opt.seed * 1000003ULL + static_cast<std::uint64_t>(signal));
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(dyn.states()), u(dyn.inputs());
  for (Index k = 0; k < x.size(); ++k) x(k) = normal(rng);
  const double v0 = x.dot(p * x);
  double sigma = 0.0;
  sample(0L, x, Eigen::VectorXd::Zero(u.size()), v0, sigma, v0);
  long n = 0;
  for (int piece = 0; piece < opt.pieces; ++piece) {
    for (Index k = 0; k < u.size(); ++k) u(k) = normal(rng);
    dyn.set_input(u);
    for (long k = 0; k < g.per_piece; ++k) {
      dyn.step(x, sigma, g.step);
      ++n;
      if (!(x.norm() <= opt.divergence))
        throw SimulationError("trajectory diverged at t = " +
                              std::to_string(static_cast<double>(n) * g.step));
      sample(n, x, u, x.dot(p * x), sigma, v0);
    }
  }
}

}  // namespace

StabilityVerdict eigen_stability_oracle(const MatrixXd& a, double tol) {
  StabilityVerdict v;
  if (a.size() == 0) {
    v.max_real = -INFINITY;
    v.hurwitz = true;
    return v;
  }
  v.max_real = a.eigenvalues().real().maxCoeff();
  v.hurwitz = v.max_real < -tol;
  return v;
}

Certificate check_stability_centralized(const MatrixXd& a, const AnalysisOptions& opt) {
  if (a.rows() != a.cols()) throw StructureError("A must be square");
  const Index n = a.rows();
  const MatrixXd id = MatrixXd::Identity(n, n);
  // The inequality is homogeneous in P, so solve the normalized problem
  //   max t  s.t.  P >= tI, -A'P - PA >= tI, P <= I
  // and rescale the maximizer to the requested margin.
  lmi::LmiProblem prob;
  const lmi::AffineExpr p = prob.symmetric(n, "P");
  const auto t = prob.scalar("t");
  lmi::AffineExpr t_diag = lmi::AffineExpr::zero(n, n);
  for (Index k = 0; k < n; ++k)
    t_diag += lmi::AffineExpr(t).left_multiplied(id.col(k)).right_multiplied(id.row(k));
  const lmi::AffineExpr lyap = -(p.left_multiplied(a.transpose()) + p.right_multiplied(a));
  prob.add_psd(p - t_diag, 0.0, "P");
  prob.add_psd(lyap - t_diag, 0.0, "lyapunov");
  prob.add_psd(id - p, 0.0, "bound");
  prob.minimize_linear(-1.0 * lmi::AffineExpr(t));
  const lmi::Solution sol = lmi::solve(prob, opt.solver);
  Certificate c;
  c.status = sol.status;
  c.required_margin = opt.strict ? opt.eps : 0.0;
  if (sol.status == lmi::SolveStatus::Infeasible) return c;
  const MatrixXd p0 = lmi::realize(p, sol.values);
  const double level = std::min(min_eig(p0), min_eig(lmi::realize(lyap, sol.values)));
  if (!(level > kNormalizedFloor)) return c;
  c.P = p0 * (opt.eps / level);
  c.margin = min_eig(-a.transpose() * c.P - c.P * a);
  c.feasible = c.margin >= c.required_margin - opt.eps / 2 && min_eig(c.P) >= opt.eps / 2;
  return c;
}

MatrixXd supply_matrix(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                       const MatrixXd& d, const MatrixXd& q, const MatrixXd& s,
                       const MatrixXd& r, const MatrixXd& p) {
  check_shapes(a, b, c, d, q, s, r);
  const Index n = a.rows(), m = b.cols();
  MatrixXd out = MatrixXd::Zero(n + m, n + m);
  out.topLeftCorner(n, n) = -a.transpose() * p - p * a;
  out.topRightCorner(n, m) = -p * b;
  out.bottomLeftCorner(m, n) = -b.transpose() * p;
  MatrixXd nmap = MatrixXd::Zero(c.rows() + m, n + m);
  nmap.topLeftCorner(c.rows(), n) = c;
  nmap.topRightCorner(c.rows(), m) = d;
  nmap.bottomRightCorner(m, m).setIdentity();
  MatrixXd pi(c.rows() + m, c.rows() + m);
  pi << q, s, s.transpose(), r;
  out += nmap.transpose() * pi * nmap;
  return 0.5 * (out + out.transpose());
}

lmi::AffineExpr supply_expr(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                            const MatrixXd& d, const MatrixXd& q, const MatrixXd& s,
                            const MatrixXd& r, const lmi::AffineExpr& p) {
  check_shapes(a, b, c, d, q, s, r);
  const Index n = a.rows(), m = b.cols();
  const MatrixXd constant = supply_matrix(a, b, c, d, q, s, r, MatrixXd::Zero(n, n));
  const lmi::AffineExpr lyap = -(p.left_multiplied(a.transpose()) + p.right_multiplied(a));
  if (m == 0) return lyap + constant;
  const lmi::AffineExpr pb = -p.right_multiplied(b);
  return lmi::AffineExpr::blocks({{lyap, pb}, {pb.transpose(), lmi::AffineExpr::zero(m, m)}}) +
         constant;
}

Certificate check_dissipativity_centralized(const MatrixXd& a, const MatrixXd& b,
                                            const MatrixXd& c, const MatrixXd& d,
                                            const MatrixXd& q, const MatrixXd& s,
                                            const MatrixXd& r, const AnalysisOptions& opt) {
  check_shapes(a, b, c, d, q, s, r);
  lmi::LmiProblem prob;
  const auto p = prob.symmetric(a.rows(), "P");
  const lmi::AffineExpr m = supply_expr(a, b, c, d, q, s, r, p);
  prob.strictify(p, opt.eps, "P");
  prob.add_psd(m, opt.strict ? opt.eps : 0.0, "supply");
  const lmi::Solution sol = lmi::solve(prob, opt.solver);
  Certificate cert;
  cert.status = sol.status;
  cert.required_margin = opt.strict ? opt.eps : 0.0;
  if (sol.status == lmi::SolveStatus::Infeasible) return cert;
  cert.P = sol[p];
  cert.margin = min_eig(lmi::realize(m, sol.values));
  cert.feasible =
      cert.margin >= cert.required_margin - opt.eps / 2 && min_eig(cert.P) >= opt.eps / 2;
  return cert;
}

Certificate check_dissipativity_centralized(const NetworkedSystem& sys, const QsrSpec& qsr,
                                            Channel channel, const AnalysisOptions& opt) {
  qsr.validate();
  const bool input = channel == Channel::Input;
  const BlockMatrixd& b = input ? sys.B : sys.E;
  const BlockMatrixd& d = input ? sys.D : sys.F;
  if (qsr.Q.row_dims() != sys.ny || qsr.R.row_dims() != b.col_dims())
    throw SpecError("supply rate does not match the system dimensions");
  const MatrixXd a = input ? sys.A.dense() : sys.closed_loop_a();
  return check_dissipativity_centralized(a, b.dense(), sys.C.dense(), d.dense(),
                                         qsr.Q.dense(), qsr.S.dense(), qsr.R.dense(), opt);
}

SimulationReport simulate_dissipation(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                                      const MatrixXd& d, const MatrixXd& q, const MatrixXd& s,
                                      const MatrixXd& r, const MatrixXd& p,
                                      const SimulationOptions& opt) {
  check_shapes(a, b, c, d, q, s, r);
  Dynamics dyn(a, b, c, d, q, s, r);
  const Grid g = make_grid(a, opt);
  SimulationReport rep;
  rep.step = g.step;
  rep.horizon = g.horizon;
  for (int k = 0; k < opt.inputs; ++k) {
    double worst = 0.0;
    run_signal(dyn, p, g, opt, k,
               [&](long, const Eigen::VectorXd&, const Eigen::VectorXd&, double v, double sigma,
                   double v0) { worst = std::max(worst, v - v0 - sigma); });
    if (worst > rep.max_violation || rep.worst_signal < 0) {
      if (worst > rep.max_violation) rep.max_violation = worst;
      rep.worst_signal = k;
    }
  }
  return rep;
}

std::vector<TrajectorySample> simulate_trajectory(const MatrixXd& a, const MatrixXd& b,
                                                  const MatrixXd& c, const MatrixXd& d,
                                                  const MatrixXd& q, const MatrixXd& s,
                                                  const MatrixXd& r, const MatrixXd& p,
                                                  const SimulationOptions& opt, int signal,
                                                  int stride) {
  check_shapes(a, b, c, d, q, s, r);
  Dynamics dyn(a, b, c, d, q, s, r);
  const Grid g = make_grid(a, opt);
  std::vector<TrajectorySample> out;
  run_signal(dyn, p, g, opt, signal,
             [&](long n, const Eigen::VectorXd& x, const Eigen::VectorXd& u, double v,
                 double sigma, double) {
               if (n % std::max(1, stride) != 0 && n != g.steps) return;
               out.push_back({static_cast<double>(n) * g.step, x, u, c * x + d * u, v, sigma});
             });
  return out;
}

void write_trajectory_csv(const std::vector<TrajectorySample>& samples,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path);
  if (samples.empty()) return;
  const auto& f = samples.front();
  os << "t";
  for (Index k = 0; k < f.x.size(); ++k) os << ",x" << k + 1;
  for (Index k = 0; k < f.u.size(); ++k) os << ",u" << k + 1;
  for (Index k = 0; k < f.y.size(); ++k) os << ",y" << k + 1;
  os << ",V,supply\n" << std::setprecision(17);
  for (const auto& smp : samples) {
    os << smp.t;
    for (Index k = 0; k < smp.x.size(); ++k) os << ',' << smp.x(k);
    for (Index k = 0; k < smp.u.size(); ++k) os << ',' << smp.u(k);
    for (Index k = 0; k < smp.y.size(); ++k) os << ',' << smp.y(k);
    os << ',' << smp.v << ',' << smp.supply << '\n';
  }
}

namespace {

// Largest nu certifying Q = -rho I, S = I/2, R = -nu I; empty when no nu
// works.
std::optional<double> max_input_index(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                                      const MatrixXd& d, double rho,
                                      const AnalysisOptions& opt) {
  const Index m = b.cols();
  lmi::LmiProblem prob;
  const auto p = prob.symmetric(a.rows(), "P");
  const auto nu = prob.scalar("nu");
  lmi::AffineExpr supply =
      supply_expr(a, b, c, d, -rho * MatrixXd::Identity(m, m), 0.5 * MatrixXd::Identity(m, m),
                  MatrixXd::Zero(m, m), p);
  for (Index k = 0; k < m; ++k) {
    MatrixXd e = MatrixXd::Zero(a.rows() + m, 1);
    e(a.rows() + k) = 1.0;
    supply -= lmi::AffineExpr(nu).left_multiplied(e).right_multiplied(e.transpose());
  }
  prob.strictify(p, opt.eps, "P");
  prob.add_psd(supply, opt.strict ? opt.eps : 0.0, "supply");
  prob.minimize_linear(-1.0 * lmi::AffineExpr(nu));
  const lmi::Solution sol = lmi::solve(prob, opt.solver);
  if (sol.status != lmi::SolveStatus::Optimal) return std::nullopt;
  return sol[nu](0, 0);
}

}  // namespace

PassivityIndices estimate_passivity_indices(const MatrixXd& a, const MatrixXd& b,
                                            const MatrixXd& c, const MatrixXd& d,
                                            IndexMode mode, const PassivityOptions& opt) {
  if (b.cols() != c.rows())
    throw StructureError("passivity indices need as many outputs as inputs");
  const MatrixXd dd = d + opt.feedthrough * MatrixXd::Identity(d.rows(), d.cols());
  const double scale = std::max(1.0, a.norm());
  double lo = -opt.bracket * scale, hi = opt.bracket * scale;
  constexpr double kSlack = 1e-7;
  auto ok = [&](double rho) {
    const auto nu = max_input_index(a, b, c, dd, rho, opt.analysis);
    return nu && *nu >= opt.nu_floor - kSlack;
  };
  auto any = [&](double rho) { return max_input_index(a, b, c, dd, rho, opt.analysis).has_value(); };

  PassivityIndices out;
  out.mode = mode;
  std::function<bool(double)> feasible = ok;
  const bool fallback = !ok(lo);
  if (fallback) feasible = any;
  if (!feasible(lo)) {
    out.rho = lo;
    out.nu = lo;
  } else if (feasible(hi)) {
    out.rho = hi;
  } else {
    while (hi - lo > opt.tol) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    out.rho = lo;
  }
  if (const auto nu = max_input_index(a, b, c, dd, out.rho, opt.analysis)) out.nu = *nu;
  out.shortage = fallback || out.rho < 0;
  if (mode == IndexMode::Weak) {
    out.rho -= (1.0 - opt.weak_factor) * std::abs(out.rho);
    out.nu -= (1.0 - opt.weak_factor) * std::abs(out.nu);
  }
  return out;
}

}  // namespace netsyn
