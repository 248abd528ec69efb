#include "netsyn/dits.hpp"

#include <gtest/gtest.h>

#include "netsyn/generator.hpp"
#include "netsyn/io.hpp"

namespace netsyn {
namespace {

std::vector<Index> ones(int n) { return std::vector<Index>(static_cast<std::size_t>(n), 1); }

NetworkedSystem scalar_network(const MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Topology t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && a(i, j) != 0) t.add_edge(i, j);
  const std::vector<Index> zero(static_cast<std::size_t>(n), 0);
  NetworkedSystem sys = NetworkedSystem::zeros(t, ones(n), zero, zero, zero);
  sys.A.dense() = a;
  return sys;
}

MatrixXd unit_costs(int n) {
  MatrixXd c = MatrixXd::Ones(n, n);
  c.diagonal().setZero();
  return c;
}

TEST(WrapTest, ReferenceHoldsTheCouplings) {
  const NetworkedSystem dec = scalar_network((MatrixXd(2, 2) << -1, 0, 0, -2).finished());
  EXPECT_TRUE(wrap_subsystems(dec).reference.dense().isZero(0.0));

  const NetworkedSystem one = scalar_network((MatrixXd(2, 2) << -1, 0.3, 0, -2).finished());
  const DitsInstance inst = wrap_subsystems(one);
  EXPECT_EQ(inst.reference.dense()(0, 1), 0.3);
  EXPECT_EQ((inst.reference.dense().array() != 0).count(), 1);
  for (double nu : inst.nu) {
    EXPECT_GT(nu, 0.0);
    EXPECT_LT(nu, 0.01);
  }
  for (double rho : inst.rho) EXPECT_GT(rho, 0.0);
}

TEST(WrapTest, CaseStudyBlocksLandInTheirCells) {
  const NetworkedSystem sys =
      load_system(std::string(NETSYN_TEST_DATA) + "/case_study_blocks.json");
  DitsInstance inst;
  inst.reference = sys.A;
  for (int i = 0; i < sys.size(); ++i) inst.reference.block(i, i).setZero();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const bool expected = (i == 1 && (j == 2 || j == 3)) || (i == 4 && (j == 1 || j == 3));
      EXPECT_EQ(!inst.reference.block_is_zero(i, j), expected) << i << "," << j;
      if (expected) EXPECT_EQ(MatrixXd(inst.reference.block(i, j)), MatrixXd(sys.A.block(i, j)));
    }
}

TEST(DitsTest, DecoupledGivesZeroInterconnection) {
  const NetworkedSystem sys = scalar_network(MatrixXd::Constant(1, 1, -1.0));
  const DitsResult r =
      synthesize_dits(wrap_subsystems(sys), DesignSpec::free_non_edges(sys), unit_costs(1));
  ASSERT_TRUE(r.success) << r.message;
  EXPECT_TRUE(r.M.dense().isZero(0.0));
  EXPECT_LT(r.spectral_max, 0.0);
}

TEST(DitsTest, TwoPassiveSubsystemsKeepWeakCoupling) {
  const NetworkedSystem sys = scalar_network((MatrixXd(2, 2) << -2, 0.1, 0.1, -2).finished());
  DesignSpec spec = DesignSpec::uniform(2, Designation::Designable);
  const MatrixXd costs = 0.1 * unit_costs(2);
  const DitsResult r = synthesize_dits(wrap_subsystems(sys), spec, costs);
  ASSERT_TRUE(r.success) << r.message;
  EXPECT_TRUE(r.stability.hurwitz);
  EXPECT_LT(r.spectral_max, 0.0);
  EXPECT_NEAR(r.M.dense()(0, 1), 0.1, 0.05);
  EXPECT_NEAR(r.M.dense()(1, 0), 0.1, 0.05);
}

TEST(DitsTest, NonPositiveInputIndexIsPreconditionError) {
  DitsInstance inst = wrap_subsystems(scalar_network(MatrixXd::Constant(1, 1, -1.0)));
  inst.nu[0] = 0.0;
  EXPECT_THROW(synthesize_dits(inst, DesignSpec::all_fixed(1), unit_costs(1)), PreconditionError);
}

TEST(DitsTest, ConstraintIsHomogeneousInTheScalars) {
  // Scaling (p, L) by c > 0 scales the constraint matrix by c.
  const double nu = 0.004, rho = 1.5, c = 3.0;
  const auto block = [&](double p, double l) {
    MatrixXd m(2, 2);
    const double x = -0.5 / nu;
    m << p * nu, l, l, -(2 * l * x - p * rho);
    return m;
  };
  const MatrixXd base = block(1.0, 0.001), scaled = block(c, c * 0.001);
  EXPECT_NEAR((scaled - c * base).norm(), 0.0, 1e-12);
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(base).eigenvalues()(0);
  EXPECT_GT(lmin, 0.0);
  EXPECT_NEAR(Eigen::SelfAdjointEigenSolver<MatrixXd>(scaled).eigenvalues()(0), c * lmin, 1e-9);
}

TEST(DitsTest, FixedPairsAreKept) {
  const NetworkedSystem sys = scalar_network((MatrixXd(2, 2) << -2, 0.1, 0, -2).finished());
  const DitsResult r =
      synthesize_dits(wrap_subsystems(sys), DesignSpec::free_non_edges(sys), unit_costs(2));
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.M.dense()(0, 1), 0.1);
}

TEST(CompareTest, StableInitialSystemHasNoDeviation) {
  const NetworkedSystem sys = scalar_network((MatrixXd(2, 2) << -2, 0.1, 0.1, -2).finished());
  DesignSpec spec = DesignSpec::uniform(2, Designation::Designable);
  const auto rows = compare_methods(sys, spec, {{"C_f", unit_costs(2)}},
                                    {Method::DeTS, Method::WeakDiTS, Method::StrongDiTS});
  ASSERT_EQ(rows.size(), 3u);
  for (const ComparisonRow& r : rows) {
    ASSERT_TRUE(r.success) << to_string(r.method) << ": " << r.message;
    EXPECT_LT(r.cost.deviation, 1e-3) << to_string(r.method);
    EXPECT_TRUE(r.stability.hurwitz);
  }
}

TEST(CompareTest, GeneratedUnstableInstance) {
  GeneratorOptions g;
  g.target = GenerationTarget::Unstable;
  g.seed = 5;
  const NetworkedSystem sys = generate_system(g).system;
  DesignSpec spec = DesignSpec::free_non_edges(sys);
  for (int i = 0; i < sys.size(); ++i)
    for (int j : sys.topology.in_neighbors(i)) spec = mark_refinable(spec, sys, i, j);
  const auto costs = std::vector<std::pair<std::string, MatrixXd>>{
      {"C_f", cost_matrix(CostModel::fixed_levels(), sys.topology)},
      {"C_d", cost_matrix(CostModel::graph_distance(), sys.topology)}};
  const auto rows =
      compare_methods(sys, spec, costs, {Method::DeTS, Method::WeakDiTS, Method::StrongDiTS});
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].costs, "C_f");
  EXPECT_EQ(rows[1].costs, "C_d");
  for (const ComparisonRow& r : rows)
    if (r.success) {
      EXPECT_TRUE(r.stability.hurwitz) << to_string(r.method);
      EXPECT_NE(r.dot.find("digraph"), std::string::npos);
    }
  EXPECT_TRUE(rows[0].success) << rows[0].message;
  const auto j = comparison_to_json(rows);
  EXPECT_EQ(j.size(), 6u);
  const std::string csv = comparison_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

}  // namespace
}  // namespace netsyn
