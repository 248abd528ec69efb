#include "netsyn/system.hpp"

#include <string>

namespace netsyn {

namespace {

std::string pair_name(int i, int j) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

void check_partition(const BlockMatrixd& m, const std::vector<Index>& rows,
                     const std::vector<Index>& cols, const char* name) {
  if (m.row_dims() != rows || m.col_dims() != cols)
    throw StructureError(std::string("matrix ") + name +
                         " does not match the subsystem dimensions");
}

BlockMatrixd scaled_identity(const std::vector<Index>& rows,
                             const std::vector<Index>& cols, double s) {
  BlockMatrixd m(rows, cols);
  for (Index i = 0; i < m.block_rows(); ++i)
    m.block(i, i) = s * MatrixXd::Identity(rows[i], cols[i]);
  return m;
}

}  // namespace

NetworkedSystem NetworkedSystem::zeros(const Topology& topology,
                                       std::vector<Index> nx,
                                       std::vector<Index> nu,
                                       std::vector<Index> nw,
                                       std::vector<Index> ny) {
  const auto n = static_cast<std::size_t>(topology.size());
  if (nx.size() != n || nu.size() != n || nw.size() != n || ny.size() != n)
    throw StructureError("dimension lists must have one entry per subsystem");
  NetworkedSystem s;
  s.topology = topology;
  s.nx = std::move(nx);
  s.nu = std::move(nu);
  s.nw = std::move(nw);
  s.ny = std::move(ny);
  s.A = BlockMatrixd(s.nx, s.nx);
  s.B = BlockMatrixd(s.nx, s.nu);
  s.E = BlockMatrixd(s.nx, s.nw);
  s.C = BlockMatrixd(s.ny, s.nx);
  s.D = BlockMatrixd(s.ny, s.nu);
  s.F = BlockMatrixd(s.ny, s.nw);
  return s;
}

void NetworkedSystem::validate(double tol) const {
  const auto n = static_cast<std::size_t>(size());
  if (nx.size() != n || nu.size() != n || nw.size() != n || ny.size() != n)
    throw StructureError("dimension lists must have one entry per subsystem");
  for (Index d : nx)
    if (d < 1) throw StructureError("state dimensions must be positive");
  check_partition(A, nx, nx, "A");
  check_partition(B, nx, nu, "B");
  check_partition(E, nx, nw, "E");
  check_partition(C, ny, nx, "C");
  check_partition(D, ny, nu, "D");
  check_partition(F, ny, nw, "F");
  if (K) check_partition(*K, nu, nx, "K");
  const std::pair<const BlockMatrixd*, const char*> mats[] = {
      {&A, "A"}, {&B, "B"}, {&E, "E"}, {&C, "C"}, {&D, "D"}, {&F, "F"}};
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j) {
      if (i == j || topology.has_edge(i, j)) continue;
      for (const auto& [m, name] : mats)
        if (!m->block_is_zero(i, j, tol))
          throw StructureError(std::string(name) + pair_name(i, j) +
                               " is nonzero but " + std::to_string(j + 1) +
                               " is not an in-neighbor of " +
                               std::to_string(i + 1));
      if (K && !K->block_is_zero(i, j, tol))
        throw StructureError("K" + pair_name(i, j) + " is nonzero but " +
                             std::to_string(j + 1) +
                             " is not an in-neighbor of " +
                             std::to_string(i + 1));
    }
}

std::vector<std::pair<int, int>> NetworkedSystem::vacuous_edges(
    double tol) const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < size(); ++i)
    for (int j : topology.in_neighbors(i)) {
      bool zero = A.block_is_zero(i, j, tol) && B.block_is_zero(i, j, tol) &&
                  E.block_is_zero(i, j, tol) && C.block_is_zero(i, j, tol) &&
                  D.block_is_zero(i, j, tol) && F.block_is_zero(i, j, tol);
      if (K) zero = zero && K->block_is_zero(i, j, tol);
      if (zero) out.emplace_back(i, j);
    }
  return out;
}

Topology NetworkedSystem::realized_topology(double tol) const {
  Topology t(size());
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j) {
      if (i == j) continue;
      bool zero = A.block_is_zero(i, j, tol) && B.block_is_zero(i, j, tol) &&
                  E.block_is_zero(i, j, tol) && C.block_is_zero(i, j, tol) &&
                  D.block_is_zero(i, j, tol) && F.block_is_zero(i, j, tol);
      if (K) zero = zero && K->block_is_zero(i, j, tol);
      if (!zero) t.add_edge(i, j);
    }
  return t;
}

MatrixXd NetworkedSystem::closed_loop_a() const {
  if (!K) return A.dense();
  return A.dense() + B.dense() * K->dense();
}

void QsrSpec::validate(double tol) const {
  if (!Q.square_partitioned() || !R.square_partitioned())
    throw SpecError("Q and R must be square partitioned");
  if (S.row_dims() != Q.row_dims() || S.col_dims() != R.col_dims())
    throw SpecError("S must be shaped rows(Q) x cols(R)");
  if (!R.is_symmetric(tol)) throw SpecError("R must be symmetric");
  if (!Q.is_symmetric(tol)) throw SpecError("Q must be symmetric");
  if (Q.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(-Q.dense(),
                                               Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0)
      throw SpecError("-Q must be positive definite");
  }
}

QsrSpec QsrSpec::passive(const std::vector<Index>& ydims,
                         const std::vector<Index>& udims, double delta) {
  return {scaled_identity(ydims, ydims, -delta),
          scaled_identity(ydims, udims, 0.5), BlockMatrixd(udims, udims)};
}

QsrSpec QsrSpec::strictly_passive(const std::vector<Index>& ydims,
                                  const std::vector<Index>& udims, double nu,
                                  double rho) {
  return {scaled_identity(ydims, ydims, -rho),
          scaled_identity(ydims, udims, 0.5),
          scaled_identity(udims, udims, -nu)};
}

QsrSpec QsrSpec::l2_gain(const std::vector<Index>& ydims,
                         const std::vector<Index>& udims, double gamma) {
  return {scaled_identity(ydims, ydims, -1.0), BlockMatrixd(ydims, udims),
          scaled_identity(udims, udims, gamma * gamma)};
}

QsrSpec QsrSpec::sector(const std::vector<Index>& ydims,
                        const std::vector<Index>& udims, double a, double b) {
  return {scaled_identity(ydims, ydims, -1.0),
          scaled_identity(ydims, udims, 0.5 * (a + b)),
          scaled_identity(udims, udims, -a * b)};
}

}  // namespace netsyn
