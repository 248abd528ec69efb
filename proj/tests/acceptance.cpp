// Property checks over randomized instances. Prints one PASS/FAIL line per
// criterion and exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "netsyn/analysis.hpp"
#include "netsyn/cli.hpp"
#include "netsyn/decomp.hpp"
#include "netsyn/dits.hpp"
#include "netsyn/generator.hpp"
#include "netsyn/io.hpp"
#include "netsyn/synthesis.hpp"

using namespace netsyn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kEps = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double min_eig(const MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

MatrixXd gaussian(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> g;
  MatrixXd m(r, c);
  for (Index k = 0; k < m.size(); ++k) m(k) = g(rng);
  return m;
}

// Symmetric G G'/n + shift I with |lambda_min| kept above 1e-4.
BlockMatrixd random_symmetric(std::mt19937_64& rng, int max_n) {
  std::uniform_int_distribution<int> nd(1, max_n), bd(1, 3);
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  std::vector<Index> dims(static_cast<std::size_t>(nd(rng)));
  for (auto& d : dims) d = bd(rng);
  const Index total = std::accumulate(dims.begin(), dims.end(), Index{0});
  const MatrixXd f = gaussian(rng, total, total);
  MatrixXd w = f * f.transpose() / static_cast<double>(total);
  double s = shift(rng);
  if (std::abs(s) < 1e-3) s = 1e-3;
  w += (s - min_eig(w)) * MatrixXd::Identity(total, total);
  return BlockMatrixd(dims, dims, w);
}

MatrixXd distance_costs(const NetworkedSystem& sys) {
  return cost_matrix(CostModel::graph_distance(), sys.topology);
}

Outcome block_elimination_matches_oracle() {
  std::mt19937_64 rng(101);
  const auto t0 = Clock::now();
  int agree = 0, total = 0;
  while (total < 500) {
    const BlockMatrixd w = random_symmetric(rng, 10);
    if (std::abs(min_eig(w.dense())) <= 1e-4) continue;
    ++total;
    const bool oracle = definiteness_oracle(w).verdict == Definiteness::PositiveDefinite;
    if (test_positive_definite(w).verdict == oracle) ++agree;
  }
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << agree << "/" << total << " agree, " << t << " s";
  return {agree == total && t < 10.0, d.str()};
}

Outcome bew_preserves_spectrum() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> md(1, 4), nd(1, 4), bd(1, 3);
  int ok = 0;
  const int total = 200;
  double worst = 0.0;
  for (int trial = 0; trial < total; ++trial) {
    const int m = md(rng), n = nd(rng);
    std::vector<std::vector<Index>> dims(static_cast<std::size_t>(m),
                                         std::vector<Index>(static_cast<std::size_t>(n)));
    std::vector<Index> slot(static_cast<std::size_t>(m), 0);
    for (int k = 0; k < m; ++k)
      for (auto& x : dims[static_cast<std::size_t>(k)]) slot[static_cast<std::size_t>(k)] += x = bd(rng);
    const Index size = std::accumulate(slot.begin(), slot.end(), Index{0});
    const MatrixXd f = gaussian(rng, size, size);
    MatrixXd s = f * f.transpose() / static_cast<double>(size);
    s += (std::uniform_real_distribution<double>(-0.5, 0.5)(rng) - min_eig(s)) *
         MatrixXd::Identity(size, size);
    std::vector<std::vector<BlockMatrixd>> cells(static_cast<std::size_t>(m));
    Index r = 0;
    for (int k = 0; k < m; ++k) {
      Index c = 0;
      for (int l = 0; l < m; ++l) {
        cells[static_cast<std::size_t>(k)].emplace_back(
            dims[static_cast<std::size_t>(k)], dims[static_cast<std::size_t>(l)],
            s.block(r, c, slot[static_cast<std::size_t>(k)], slot[static_cast<std::size_t>(l)]));
        c += slot[static_cast<std::size_t>(l)];
      }
      r += slot[static_cast<std::size_t>(k)];
    }
    const BlockMatrixd bew = bew_transform(BlockBlockMatrix<double>(cells));
    Eigen::SelfAdjointEigenSolver<MatrixXd> e1(s, Eigen::EigenvaluesOnly),
        e2(bew.dense(), Eigen::EigenvaluesOnly);
    const double diff = (e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    const bool same_verdict = (definiteness_oracle(s).verdict == Definiteness::PositiveDefinite) ==
                              (definiteness_oracle(bew).verdict == Definiteness::PositiveDefinite);
    if (diff <= 1e-9 && same_verdict) ++ok;
  }
  std::ostringstream d;
  d << ok << "/" << total << " match, worst eigenvalue gap " << worst;
  return {ok == total, d.str()};
}

Outcome analysis_certificates_are_sound() {
  std::mt19937_64 rng(103);
  AnalysisOptions strict;
  strict.strict = true;
  int stab = 0, stab_ok = 0, diss = 0, diss_ok = 0;
  double worst_violation = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + trial % 4;
    MatrixXd a = gaussian(rng, n, n);
    a -= (eigen_stability_oracle(a).max_real + 0.2 + 0.05 * trial) * MatrixXd::Identity(n, n);
    if (trial % 5 == 4) a += 0.5 * MatrixXd::Identity(n, n);  // some unstable draws
    const Certificate c = check_stability_centralized(a, strict);
    if (c.feasible) {
      ++stab;
      const MatrixXd lyap = -a.transpose() * c.P - c.P * a;
      if (min_eig(c.P) >= kEps / 2 && min_eig(lyap) >= kEps / 2) ++stab_ok;
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + trial % 3, m = 1 + trial % 2;
    MatrixXd a = gaussian(rng, n, n);
    a -= (eigen_stability_oracle(a).max_real + 1.0) * MatrixXd::Identity(n, n);
    const MatrixXd b = gaussian(rng, n, m), c = gaussian(rng, m, n), d = 0.1 * gaussian(rng, m, m);
    const double gamma = trial % 4 == 3 ? 0.05 : 20.0;
    const MatrixXd q = -MatrixXd::Identity(m, m), s = MatrixXd::Zero(m, m),
                   r = gamma * gamma * MatrixXd::Identity(m, m);
    const Certificate cert = check_dissipativity_centralized(a, b, c, d, q, s, r, strict);
    if (!cert.feasible) continue;
    ++diss;
    const bool margin = min_eig(cert.P) >= kEps / 2 &&
                        min_eig(supply_matrix(a, b, c, d, q, s, r, cert.P)) >= kEps / 2;
    SimulationOptions so;
    so.inputs = 100;
    so.seed = static_cast<std::uint64_t>(trial + 1);
    const double v = simulate_dissipation(a, b, c, d, q, s, r, cert.P, so).max_violation;
    worst_violation = std::max(worst_violation, v);
    if (margin && v <= 1e-6) ++diss_ok;
  }
  std::ostringstream d;
  d << "stability " << stab_ok << "/" << stab << ", dissipativity " << diss_ok << "/" << diss
    << ", worst violation " << worst_violation;
  return {stab > 0 && diss > 0 && stab_ok == stab && diss_ok == diss, d.str()};
}

Outcome stability_synthesis() {
  const int total = 50;
  int success = 0, sound = 0;
  double slowest = 0.0;
  for (int k = 0; k < total; ++k) {
    GeneratorOptions g;
    g.target = GenerationTarget::Unstable;
    g.seed = static_cast<std::uint64_t>(1000 + k);
    const NetworkedSystem sys = generate_system(g).system;
    SynthesisOptions opt;
    opt.raise = false;
    const auto t0 = Clock::now();
    SynthesisResult r;
    try {
      r = synthesize_stability(sys, DesignSpec::uniform(sys.size(), Designation::Removable),
                               distance_costs(sys), opt);
    } catch (const Error&) {
      r.success = false;
    }
    slowest = std::max(slowest, seconds_since(t0));
    if (!r.success) continue;
    ++success;
    if (eigen_stability_oracle(r.system.A.dense()).max_real < -1e-6) ++sound;
  }
  std::ostringstream d;
  d << success << "/" << total << " succeed, " << sound << " Hurwitz, slowest " << slowest << " s";
  return {sound == success && success >= 0.9 * total && slowest < 30.0, d.str()};
}

Outcome stabilizability_synthesis() {
  const int total = 50;
  int success = 0, sound = 0;
  double worst = 0.0;
  for (int k = 0; k < total; ++k) {
    GeneratorOptions g;
    g.target = GenerationTarget::Unstable;
    g.subsystems = 4;
    g.dim = 2;
    g.seed = static_cast<std::uint64_t>(2000 + k);
    NetworkedSystem sys = generate_system(g).system;
    // Actuate every subsystem with a random local input matrix.
    std::mt19937_64 rng(g.seed);
    NetworkedSystem act = NetworkedSystem::zeros(sys.topology, sys.nx, sys.nx,
                                                 std::vector<Index>(4, 0), std::vector<Index>(4, 0));
    act.A = sys.A;
    for (int i = 0; i < 4; ++i) act.B.block(i, i) = gaussian(rng, 2, 2);
    SynthesisOptions opt;
    opt.raise = false;
    SynthesisResult r;
    try {
      r = synthesize_stabilizability(act, DesignSpec::free_non_edges(act), distance_costs(act),
                                     opt);
    } catch (const Error&) {
      r.success = false;
    }
    if (!r.success) continue;
    ++success;
    double gap = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        gap = std::max(gap, (MatrixXd(r.L->block(i, j)) -
                             MatrixXd(r.system.K->block(i, j)) *
                                 r.certificates[static_cast<std::size_t>(j)])
                                .norm());
    worst = std::max(worst, gap);
    if (eigen_stability_oracle(r.system.closed_loop_a()).hurwitz && gap <= 1e-8) ++sound;
  }
  std::ostringstream d;
  d << sound << "/" << success << " successes sound (of " << total << "), worst |L - KM| "
    << worst;
  return {success > 0 && sound == success, d.str()};
}

Outcome dissipativity_synthesis() {
  const int total = 30;
  int runs[2] = {0, 0}, success[2] = {0, 0}, sound[2] = {0, 0};
  for (int mode = 0; mode < 2; ++mode)
    for (int k = 0; k < total; ++k) {
      GeneratorOptions g;
      g.subsystems = 3;
      g.dim = 2;
      g.target = mode == 0 ? GenerationTarget::Dissipative : GenerationTarget::Dissipativatable;
      g.seed = static_cast<std::uint64_t>(3000 + 100 * mode + k);
      GeneratedSystem gen;
      try {
        gen = generate_system(g);
      } catch (const GenerationError&) {
        continue;
      }
      ++runs[mode];
      const NetworkedSystem& sys = gen.system;
      SynthesisOptions opt;
      opt.raise = false;
      opt.simulation.inputs = 100;
      const DesignSpec spec = DesignSpec::uniform(sys.size(), Designation::Designable);
      SynthesisResult r;
      try {
        r = mode == 0 ? synthesize_dissipativity(sys, spec, *gen.qsr, distance_costs(sys), opt)
                      : synthesize_dissipativation(sys, spec, *gen.qsr, distance_costs(sys), opt);
      } catch (const Error&) {
        r.success = false;
      }
      if (!r.success) continue;
      ++success[mode];
      const Channel ch = mode == 0 ? Channel::Input : Channel::Disturbance;
      const bool central = check_dissipativity_centralized(r.system, *gen.qsr, ch).feasible;
      if (central && r.verification.dissipativity_ok && r.verification.simulation_violation <= 1e-6)
        ++sound[mode];
    }
  std::ostringstream d;
  d << "open loop " << sound[0] << "/" << success[0] << " of " << runs[0] << ", closed loop "
    << sound[1] << "/" << success[1] << " of " << runs[1];
  const bool pass = runs[0] >= total && runs[1] >= total && success[0] > 0 && success[1] > 0 &&
                    sound[0] == success[0] && sound[1] == success[1];
  return {pass, d.str()};
}

Outcome case_study_blocks(const std::string& data) {
  const NetworkedSystem sys = load_system(data + "/case_study_blocks.json");
  const MatrixXd a55 =
      (MatrixXd(3, 3) << -2.86, -0.56, -1.64, -0.56, -2.20, -1.06, -1.64, -1.06, -4.93).finished();
  const MatrixXd a23 =
      (MatrixXd(3, 3) << -1.35, -1.62, -8.97, 1.51, -1.40, -13.70, 8.99, 13.68, -1.43).finished();
  const MatrixXd a54 =
      (MatrixXd(3, 3) << -1.42, 0.09, -0.61, 0.09, -0.30, -0.18, -0.61, -0.18, -0.86).finished();
  const bool exact = MatrixXd(sys.A.block(4, 4)) == a55 && MatrixXd(sys.A.block(1, 2)) == a23 &&
                     MatrixXd(sys.A.block(4, 3)) == a54;
  const StabilityVerdict v = eigen_stability_oracle(a55);
  std::ostringstream d;
  d << "blocks exact " << (exact ? "yes" : "no") << ", A55 max Re " << v.max_real
    << "; instability of the full initial system is unverifiable from six blocks";
  return {exact && v.hurwitz, d.str()};
}

Outcome archive_growth() {
  std::mt19937_64 rng(108);
  int equal = 0;
  const int total = 50;
  for (int trial = 0; trial < total; ++trial) {
    const BlockMatrixd w = random_symmetric(rng, 8);
    const int n = static_cast<int>(w.block_rows());
    const PdTestResult scratch = test_positive_definite(w);
    CertificateArchive grown;
    bool verdict = true, rows_equal = true;
    for (int s = 0; s < n && verdict; ++s) {
      std::vector<MatrixXd> row;
      for (int k = 0; k <= s; ++k) row.emplace_back(w.block(s, k));
      verdict = extend_archive(grown, row).verdict;
    }
    if (grown.size() != scratch.archive.size()) rows_equal = false;
    for (int k = 0; rows_equal && k < grown.size(); ++k)
      for (std::size_t b = 0; b < grown.row(k).blocks.size(); ++b)
        if (grown.row(k).blocks[b] != scratch.archive.row(k).blocks[b]) rows_equal = false;
    if (rows_equal && verdict == scratch.verdict) ++equal;
  }
  std::ostringstream d;
  d << equal << "/" << total << " sequences identical";
  return {equal == total, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code == kExitError) std::cerr << err.str();
  return code;
}

Outcome dits_baseline(const fs::path& dir) {
  int success = 0, sound = 0, failed_verification = 0;
  for (int k = 0; k < 10; ++k) {
    GeneratorOptions g;
    g.target = GenerationTarget::Unstable;
    g.seed = static_cast<std::uint64_t>(4000 + k);
    const NetworkedSystem sys = generate_system(g).system;
    for (IndexMode mode : {IndexMode::Weak, IndexMode::Strong}) {
      const DitsInstance inst = wrap_subsystems(sys, 0.01, mode);
      DitsResult r;
      try {
        r = synthesize_dits(inst, DesignSpec::uniform(sys.size(), Designation::Designable),
                            distance_costs(sys));
      } catch (const VerificationError&) {
        ++failed_verification;
        continue;
      } catch (const Error&) {
        continue;
      }
      if (!r.success) continue;
      ++success;
      const MatrixXd closed = BlockMatrixd::block_diagonal(inst.a).dense() + r.M.dense();
      if (r.spectral_max < 0 && eigen_stability_oracle(closed).hurwitz) ++sound;
    }
  }

  const fs::path sys_path = dir / "instance.json";
  const auto t0 = Clock::now();
  bool report_ok =
      cli({"generate", "--target", "unstable", "--seed", "7", "--out", sys_path.string()}) ==
          kExitOk &&
      cli({"compare", "--system", sys_path.string(), "--out", (dir / "cmp").string()}) == kExitOk;
  const double t = seconds_since(t0);
  if (report_ok) {
    const auto report = read_json_file((dir / "cmp" / "report.json").string());
    report_ok = report["rows"].size() == 6;
    for (const char* m : {"dets", "dits-weak", "dits-strong"})
      for (const char* c : {"C_f", "C_d"}) {
        const fs::path dot = dir / "cmp" / (std::string(m) + "_" + c + ".dot");
        report_ok = report_ok && fs::exists(dot) && slurp(dot).find("color=") != std::string::npos;
      }
  }
  std::ostringstream d;
  d << sound << "/" << success << " successes verified, " << failed_verification
    << " failed verification, compare report " << (report_ok ? "written" : "missing") << " in "
    << t << " s";
  return {success > 0 && sound == success && failed_verification == 0 && report_ok && t < 60.0,
          d.str()};
}

Outcome determinism(const fs::path& dir) {
  std::string reports[2], compares[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path sys = dir / ("det" + std::to_string(run) + ".json");
    const fs::path out = dir / ("det_out" + std::to_string(run));
    const fs::path cmp = dir / ("det_cmp" + std::to_string(run));
    if (cli({"generate", "--target", "unstable", "--seed", "11", "--out", sys.string()}) !=
            kExitOk ||
        cli({"synthesize", "--system", sys.string(), "--out", out.string()}) != kExitOk ||
        cli({"compare", "--system", sys.string(), "--out", cmp.string()}) != kExitOk)
      return {false, "a run failed"};
    reports[run] = slurp(out / "report.json");
    compares[run] = slurp(cmp / "report.json");
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1] && compares[0] == compares[1];
  return {same, same ? "synthesis and compare reports byte-identical" : "reports differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data = argc > 1 ? argv[1] : NETSYN_TEST_DATA;
  const fs::path dir = fs::temp_directory_path() / "netsyn_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"block elimination agrees with the eigenvalue oracle", block_elimination_matches_oracle},
      {"BEW reordering preserves the spectrum", bew_preserves_spectrum},
      {"analysis certificates are sound", analysis_certificates_are_sound},
      {"stability topology synthesis", stability_synthesis},
      {"stabilizing gain synthesis", stabilizability_synthesis},
      {"dissipativity synthesis, open and closed loop", dissipativity_synthesis},
      {"case-study blocks", [&] { return case_study_blocks(data); }},
      {"incremental archive growth", archive_growth},
      {"DiTS baseline and comparison report", [&] { return dits_baseline(dir); }},
      {"deterministic reports", [&] { return determinism(dir); }},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu: %s (%s) [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
