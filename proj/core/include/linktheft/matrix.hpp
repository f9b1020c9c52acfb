#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace linktheft {

/// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }

  std::span<double> row(int r) {
    return {data.data() + static_cast<size_t>(r) * cols,
            static_cast<size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<size_t>(r) * cols,
            static_cast<size_t>(cols)};
  }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool all_finite() const;
};

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B (A is stored untransposed)
Matrix matmul_at(const Matrix& a, const Matrix& b);
/// C = A * B^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Compressed sparse row matrix; used as the fast path for the normalized
/// adjacency so desk-scale graphs (Pubmed-sized) never materialize n x n.
struct Csr {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // size rows + 1
  std::vector<int> col_idx;
  std::vector<double> vals;

  size_t nnz() const { return vals.size(); }
};

/// C = S * D for sparse S, dense D.
Matrix spmm(const Csr& s, const Matrix& d);

Csr transpose(const Csr& s);

/// Dense view of a sparse matrix (small graphs / tests only).
Matrix to_dense(const Csr& s);

}  // namespace linktheft
