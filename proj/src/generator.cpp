#include "netsyn/generator.hpp"

#include <random>

namespace netsyn {

const char* to_string(GenerationTarget t) {
  switch (t) {
    case GenerationTarget::Stable:
      return "stable";
    case GenerationTarget::Unstable:
      return "unstable";
    case GenerationTarget::Stabilizable:
      return "stabilizable";
    case GenerationTarget::Dissipative:
      return "dissipative";
    default:
      return "dissipativatable";
  }
}

GenerationTarget generation_target_from_string(const std::string& s) {
  for (GenerationTarget t :
       {GenerationTarget::Stable, GenerationTarget::Unstable, GenerationTarget::Stabilizable,
        GenerationTarget::Dissipative, GenerationTarget::Dissipativatable})
    if (s == to_string(t)) return t;
  throw ConfigError("unknown generation target '" + s + "'");
}

namespace {

using Rng = std::mt19937_64;

MatrixXd gaussian(Rng& rng, Index r, Index c, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  MatrixXd m(r, c);
  for (Index k = 0; k < m.size(); ++k) m(k) = g(rng);
  return m;
}

MatrixXd local_hurwitz(Rng& rng, Index n) {
  const MatrixXd g = gaussian(rng, n, n);
  std::uniform_real_distribution<double> margin(0.5, 2.0);
  const double shift = g.eigenvalues().real().maxCoeff() + margin(rng);
  return g - shift * MatrixXd::Identity(n, n);
}

double max_real(const MatrixXd& a) { return eigen_stability_oracle(a).max_real; }

/// Diagonal part plus s times the off-diagonal part.
MatrixXd scaled(const NetworkedSystem& sys, double s) {
  BlockMatrixd a = sys.A;
  for (int i = 0; i < sys.size(); ++i)
    for (int j = 0; j < sys.size(); ++j)
      if (i != j) a.block(i, j) *= s;
  return a.dense();
}

void scale_couplings(NetworkedSystem& sys, double s) { sys.A.dense() = scaled(sys, s); }

MatrixXd unit_costs(int n) {
  MatrixXd c = MatrixXd::Ones(n, n);
  c.diagonal().setZero();
  return c;
}

/// Finds the coupling scale where the system loses stability and moves to
/// 1.25 times it. Returns the crossing, or 0 when none exists below 1e4.
double destabilize(NetworkedSystem& sys) {
  double lo = 0.0, hi = 1.0;
  while (max_real(scaled(sys, hi)) <= 0) {
    lo = hi;
    hi *= 2;
    if (hi > 1e4) return 0.0;
  }
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (max_real(scaled(sys, mid)) > 0 ? hi : lo) = mid;
  }
  double s = 1.25 * hi;
  if (max_real(scaled(sys, s)) <= 1e-4) {
    // Not monotone past the crossing; fall back to doubling.
    while (max_real(scaled(sys, s)) <= 1e-4) {
      s *= 2;
      if (s > 1e4) return 0.0;
    }
  }
  scale_couplings(sys, s);
  return hi;
}

NetworkedSystem draw(Rng& rng, const GeneratorOptions& opt) {
  const int n = opt.subsystems;
  const std::vector<Index> dims(static_cast<std::size_t>(n), opt.dim);
  const bool inputs = opt.target != GenerationTarget::Stable &&
                      opt.target != GenerationTarget::Unstable;
  const bool dist = opt.target == GenerationTarget::Dissipativatable;
  const std::vector<Index> none(static_cast<std::size_t>(n), 0);
  std::bernoulli_distribution edge(opt.density);
  Topology t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && edge(rng)) t.add_edge(i, j);
  NetworkedSystem sys =
      NetworkedSystem::zeros(t, dims, inputs ? dims : none, dist ? dims : none,
                             inputs ? dims : none);
  const double sd = opt.coupling_scale / std::sqrt(static_cast<double>(opt.dim));
  for (int i = 0; i < n; ++i) {
    sys.A.block(i, i) = local_hurwitz(rng, opt.dim);
    for (int j : t.in_neighbors(i)) sys.A.block(i, j) = gaussian(rng, opt.dim, opt.dim, sd);
    if (inputs) {
      sys.B.block(i, i) = gaussian(rng, opt.dim, opt.dim);
      sys.C.block(i, i) = gaussian(rng, opt.dim, opt.dim);
    }
    if (dist) sys.E.block(i, i) = gaussian(rng, opt.dim, opt.dim);
  }
  return sys;
}

}  // namespace

GeneratedSystem generate_system(const GeneratorOptions& opt) {
  if (opt.subsystems < 1 || opt.dim < 1)
    throw ConfigError("generator needs at least one subsystem with one state");
  if (opt.density < 0 || opt.density > 1) throw ConfigError("density must lie in [0, 1]");
  Rng rng(opt.seed);
  const int n = opt.subsystems;
  const std::vector<Index> dims(static_cast<std::size_t>(n), opt.dim);
  SynthesisOptions sopt = opt.synthesis;
  sopt.raise = false;
  sopt.simulation.inputs = std::min(sopt.simulation.inputs, 20);

  for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
    NetworkedSystem sys = draw(rng, opt);
    GeneratedSystem out;
    out.attempts = attempt;
    try {
      switch (opt.target) {
        case GenerationTarget::Unstable: {
          if (n < 2 || sys.topology.edge_count() == 0) break;
          out.crossing_scale = destabilize(sys);
          if (out.crossing_scale <= 0) break;
          out.system = sys;
          return out;
        }
        case GenerationTarget::Stable: {
          if (!eigen_stability_oracle(sys.A.dense()).hurwitz) {
            // Start the repair from half the crossing scale; destabilize
            // leaves the couplings at 1.25 times the crossing.
            if (destabilize(sys) > 0) scale_couplings(sys, 0.4);
          }
          const SynthesisResult r = synthesize_stability(
              sys, DesignSpec::uniform(n, Designation::Designable), unit_costs(n), sopt);
          if (!r.success) break;
          out.system = r.system;
          out.certificate = r.certificates;
          return out;
        }
        case GenerationTarget::Stabilizable: {
          destabilize(sys);
          const SynthesisResult r =
              synthesize_stabilizability(sys, DesignSpec::all_fixed(n), unit_costs(n), sopt);
          if (!r.success) break;
          out.system = r.system;
          out.certificate = r.certificates;
          return out;
        }
        case GenerationTarget::Dissipative: {
          const QsrSpec q = opt.qsr ? *opt.qsr : QsrSpec::l2_gain(dims, dims, 10.0);
          const SynthesisResult r = synthesize_dissipativity(
              sys, DesignSpec::uniform(n, Designation::Designable), q, unit_costs(n), sopt);
          if (!r.success) break;
          out.system = r.system;
          out.qsr = q;
          out.certificate = r.certificates;
          return out;
        }
        case GenerationTarget::Dissipativatable: {
          const QsrSpec q = opt.qsr ? *opt.qsr : QsrSpec::l2_gain(dims, dims, 10.0);
          const SynthesisResult r =
              synthesize_dissipativation(sys, DesignSpec::all_fixed(n), q, unit_costs(n), sopt);
          if (!r.success) break;
          out.system = r.system;
          out.qsr = q;
          out.certificate = r.certificates;
          return out;
        }
      }
    } catch (const DiagnosticError&) {
    } catch (const NumericalError&) {
    }
  }
  throw GenerationError(std::string("could not generate a ") + to_string(opt.target) +
                        " system in " + std::to_string(opt.max_attempts) + " attempts");
}

}  // namespace netsyn
