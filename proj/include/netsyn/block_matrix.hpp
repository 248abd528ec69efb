#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "netsyn/errors.hpp"

namespace netsyn {

using Eigen::Index;

/// A dense matrix partitioned into a grid of blocks.
///
/// Storage is one contiguous matrix; `block(i, j)` returns an Eigen block
/// view into it. Block (i, j) has shape row_dims[i] x col_dims[j].
template <typename Scalar>
class BlockMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BlockMatrix() = default;

  BlockMatrix(std::vector<Index> row_dims, std::vector<Index> col_dims)
      : row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
    init_offsets();
    data_ = Matrix::Zero(row_offsets_.back(), col_offsets_.back());
  }

  BlockMatrix(std::vector<Index> row_dims, std::vector<Index> col_dims,
              Matrix dense)
      : row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
    init_offsets();
    if (dense.rows() != row_offsets_.back() ||
        dense.cols() != col_offsets_.back()) {
      throw StructureError("dense matrix does not match the block partition");
    }
    data_ = std::move(dense);
  }

  static BlockMatrix zero(const std::vector<Index>& dims) {
    return BlockMatrix(dims, dims);
  }

  static BlockMatrix identity(const std::vector<Index>& dims) {
    BlockMatrix m(dims, dims);
    m.data_.setIdentity();
    return m;
  }

  /// e_{ij} = I * 1{i == j}, shaped n_i x n_j.
  static Matrix e(Index ni, Index nj, bool same) {
    return same ? Matrix(Matrix::Identity(ni, nj)) : Matrix(Matrix::Zero(ni, nj));
  }

  static BlockMatrix block_diagonal(const std::vector<Matrix>& blocks) {
    std::vector<Index> rd, cd;
    for (const auto& b : blocks) {
      rd.push_back(b.rows());
      cd.push_back(b.cols());
    }
    BlockMatrix m(rd, cd);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      m.block(static_cast<Index>(i), static_cast<Index>(i)) = blocks[i];
    }
    return m;
  }

  Index block_rows() const { return static_cast<Index>(row_dims_.size()); }
  Index block_cols() const { return static_cast<Index>(col_dims_.size()); }
  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }

  const std::vector<Index>& row_dims() const { return row_dims_; }
  const std::vector<Index>& col_dims() const { return col_dims_; }
  Index row_offset(Index i) const { return row_offsets_[i]; }
  Index col_offset(Index j) const { return col_offsets_[j]; }

  bool square_partitioned() const { return row_dims_ == col_dims_; }

  auto block(Index i, Index j) {
    check_index(i, j);
    return data_.block(row_offsets_[i], col_offsets_[j], row_dims_[i],
                       col_dims_[j]);
  }
  auto block(Index i, Index j) const {
    check_index(i, j);
    return data_.block(row_offsets_[i], col_offsets_[j], row_dims_[i],
                       col_dims_[j]);
  }

  const Matrix& dense() const { return data_; }
  Matrix& dense() { return data_; }

  BlockMatrix transpose() const {
    return BlockMatrix(col_dims_, row_dims_, data_.transpose());
  }

  bool is_symmetric(Scalar tol = Scalar(0)) const {
    if (!square_partitioned()) return false;
    return ((data_ - data_.transpose()).cwiseAbs().maxCoeff() <= tol) ||
           data_.size() == 0;
  }

  bool block_is_zero(Index i, Index j, Scalar tol = Scalar(0)) const {
    const auto b = block(i, j);
    return b.size() == 0 || b.cwiseAbs().maxCoeff() <= tol;
  }

  bool is_block_diagonal(Scalar tol = Scalar(0)) const {
    for (Index i = 0; i < block_rows(); ++i)
      for (Index j = 0; j < block_cols(); ++j)
        if (i != j && !block_is_zero(i, j, tol)) return false;
    return true;
  }

  BlockMatrix operator+(const BlockMatrix& o) const {
    check_same_partition(o);
    return BlockMatrix(row_dims_, col_dims_, data_ + o.data_);
  }
  BlockMatrix operator-(const BlockMatrix& o) const {
    check_same_partition(o);
    return BlockMatrix(row_dims_, col_dims_, data_ - o.data_);
  }
  BlockMatrix operator*(const BlockMatrix& o) const {
    if (col_dims_ != o.row_dims_) {
      throw StructureError("block product with incompatible partitions");
    }
    return BlockMatrix(row_dims_, o.col_dims_, data_ * o.data_);
  }
  friend BlockMatrix operator*(Scalar a, const BlockMatrix& m) {
    return BlockMatrix(m.row_dims_, m.col_dims_, a * m.data_);
  }

  bool same_partition(const BlockMatrix& o) const {
    return row_dims_ == o.row_dims_ && col_dims_ == o.col_dims_;
  }

 private:
  void init_offsets() {
    for (Index d : row_dims_)
      if (d < 0) throw StructureError("negative block dimension");
    for (Index d : col_dims_)
      if (d < 0) throw StructureError("negative block dimension");
    row_offsets_.assign(row_dims_.size() + 1, 0);
    col_offsets_.assign(col_dims_.size() + 1, 0);
    std::partial_sum(row_dims_.begin(), row_dims_.end(),
                     row_offsets_.begin() + 1);
    std::partial_sum(col_dims_.begin(), col_dims_.end(),
                     col_offsets_.begin() + 1);
  }
  void check_index(Index i, Index j) const {
    if (i < 0 || j < 0 || i >= block_rows() || j >= block_cols()) {
      throw StructureError("block index (" + std::to_string(i) + "," +
                           std::to_string(j) + ") out of range");
    }
  }
  void check_same_partition(const BlockMatrix& o) const {
    if (!same_partition(o)) throw StructureError("partition mismatch");
  }

  std::vector<Index> row_dims_{};
  std::vector<Index> col_dims_{};
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_offsets_{0};
  Matrix data_{};
};

using BlockMatrixd = BlockMatrix<double>;

/// An m x m grid of block matrices Psi^{kl}. Cell (k, l) is partitioned with
/// the inner row dims of outer row k and the inner col dims of outer col l;
/// every cell has the same number of inner blocks.
template <typename Scalar>
class BlockBlockMatrix {
 public:
  using Cell = BlockMatrix<Scalar>;

  explicit BlockBlockMatrix(std::vector<std::vector<Cell>> cells)
      : cells_(std::move(cells)) {
    const std::size_t m = cells_.size();
    if (m == 0) throw StructureError("block-block matrix needs m >= 1");
    for (const auto& row : cells_)
      if (row.size() != m)
        throw StructureError("block-block matrix must be square in cells");
    const Index n = cells_[0][0].block_rows();
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t l = 0; l < m; ++l) {
        const Cell& c = cells_[k][l];
        if (c.block_rows() != n || c.block_cols() != n ||
            c.row_dims() != cells_[k][0].row_dims() ||
            c.col_dims() != cells_[0][l].col_dims()) {
          throw StructureError("mismatched inner partition in cell (" +
                               std::to_string(k) + "," + std::to_string(l) +
                               ")");
        }
      }
    }
  }

  Index outer() const { return static_cast<Index>(cells_.size()); }
  Index inner() const { return cells_[0][0].block_rows(); }
  const Cell& cell(Index k, Index l) const { return cells_[k][l]; }

  /// Inner row dims of outer row k.
  const std::vector<Index>& row_dims(Index k) const {
    return cells_[k][0].row_dims();
  }
  const std::vector<Index>& col_dims(Index l) const {
    return cells_[0][l].col_dims();
  }

  /// The block-block matrix flattened in its natural (outer-major) order.
  typename Cell::Matrix flatten() const {
    Index rows = 0, cols = 0;
    for (Index k = 0; k < outer(); ++k) rows += cells_[k][0].rows();
    for (Index l = 0; l < outer(); ++l) cols += cells_[0][l].cols();
    typename Cell::Matrix out(rows, cols);
    Index r = 0;
    for (Index k = 0; k < outer(); ++k) {
      Index c = 0;
      for (Index l = 0; l < outer(); ++l) {
        out.block(r, c, cells_[k][l].rows(), cells_[k][l].cols()) =
            cells_[k][l].dense();
        c += cells_[k][l].cols();
      }
      r += cells_[k][0].rows();
    }
    return out;
  }

 private:
  std::vector<std::vector<Cell>> cells_;
};

/// Index map of the block element-wise reordering: entry p of the result
/// gives the flattened (outer-major) position that lands at BEW position p.
/// `dims[k][i]` is the inner dimension of inner block i in outer slot k.
inline std::vector<Index> bew_index_map(
    const std::vector<std::vector<Index>>& dims) {
  const std::size_t m = dims.size();
  const std::size_t n = m ? dims[0].size() : 0;
  std::vector<std::vector<Index>> start(m, std::vector<Index>(n, 0));
  Index pos = 0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      start[k][i] = pos;
      pos += dims[k][i];
    }
  std::vector<Index> map;
  map.reserve(static_cast<std::size_t>(pos));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k)
      for (Index t = 0; t < dims[k][i]; ++t) map.push_back(start[k][i] + t);
  return map;
}

/// BEW(Psi) = [[Psi^{kl}_{ij}]_{k,l}]_{i,j}.
template <typename Scalar>
BlockMatrix<Scalar> bew_transform(const BlockBlockMatrix<Scalar>& psi) {
  const Index m = psi.outer(), n = psi.inner();
  std::vector<std::vector<Index>> rdims(m), cdims(m);
  for (Index k = 0; k < m; ++k) {
    rdims[k] = psi.row_dims(k);
    cdims[k] = psi.col_dims(k);
  }
  const auto rmap = bew_index_map(rdims);
  const auto cmap = bew_index_map(cdims);
  const auto flat = psi.flatten();

  std::vector<Index> out_rows(n, 0), out_cols(n, 0);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < m; ++k) {
      out_rows[i] += rdims[k][i];
      out_cols[i] += cdims[k][i];
    }
  typename BlockMatrix<Scalar>::Matrix out(flat.rows(), flat.cols());
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c) out(r, c) = flat(rmap[r], cmap[c]);
  return BlockMatrix<Scalar>(out_rows, out_cols, std::move(out));
}

/// Undo bew_transform: returns the flattened Psi given BEW(Psi) and the
/// per-outer-slot inner dims.
template <typename Scalar>
typename BlockMatrix<Scalar>::Matrix inverse_bew(
    const BlockMatrix<Scalar>& bew, const std::vector<std::vector<Index>>& rdims,
    const std::vector<std::vector<Index>>& cdims) {
  const auto rmap = bew_index_map(rdims);
  const auto cmap = bew_index_map(cdims);
  const auto& d = bew.dense();
  if (static_cast<Index>(rmap.size()) != d.rows() ||
      static_cast<Index>(cmap.size()) != d.cols())
    throw StructureError("BEW dims do not match the matrix");
  typename BlockMatrix<Scalar>::Matrix flat(d.rows(), d.cols());
  for (Index r = 0; r < d.rows(); ++r)
    for (Index c = 0; c < d.cols(); ++c) flat(rmap[r], cmap[c]) = d(r, c);
  return flat;
}

enum class Definiteness { PositiveDefinite, PositiveSemidefinite, Indefinite };

inline const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite:
      return "positive definite";
    case Definiteness::PositiveSemidefinite:
      return "positive semidefinite";
    default:
      return "indefinite";
  }
}

struct DefinitenessReport {
  Definiteness verdict;
  double min_eigenvalue;
};

inline constexpr double kSymmetryTol = 1e-9;
inline constexpr double kDefinitenessTol = 1e-8;

/// Independent oracle: dense symmetric eigen-decomposition of W.
/// PositiveDefinite iff lambda_min > tol, PositiveSemidefinite iff
/// lambda_min > -tol.
template <typename Derived>
DefinitenessReport definiteness_oracle(const Eigen::MatrixBase<Derived>& w,
                                       double tol = kDefinitenessTol,
                                       double sym_tol = kSymmetryTol) {
  using Matrix = Eigen::MatrixXd;
  const Matrix m = w.template cast<double>();
  if (m.rows() != m.cols()) throw StructureError("oracle needs a square matrix");
  if (m.size() == 0) return {Definiteness::PositiveDefinite, 0.0};
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol)
    throw StructureError("matrix is not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin > tol) return {Definiteness::PositiveDefinite, lmin};
  if (lmin > -tol) return {Definiteness::PositiveSemidefinite, lmin};
  return {Definiteness::Indefinite, lmin};
}

template <typename Scalar>
DefinitenessReport definiteness_oracle(const BlockMatrix<Scalar>& w,
                                       double tol = kDefinitenessTol,
                                       double sym_tol = kSymmetryTol) {
  return definiteness_oracle(w.dense(), tol, sym_tol);
}

}  // namespace netsyn
