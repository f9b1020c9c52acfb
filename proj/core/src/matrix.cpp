#include "linktheft/matrix.hpp"

#include <cmath>

#include "linktheft/errors.hpp"

namespace linktheft {

bool Matrix::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// i-k-j loop order keeps the inner accesses contiguous. Row-parallel, so each
// output element is accumulated by exactly one thread in a fixed order and
// results are bit-identical for any thread count.
Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) {
    double* crow = c.data.data() + static_cast<size_t>(i) * c.cols;
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw ShapeError("matmul_at: row counts differ");
  Matrix c(a.cols, b.cols);
  // Parallelize over output rows (columns of a); each thread scans its own
  // strided column, so accumulation order per element stays fixed.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.cols; ++i) {
    double* crow = c.data.data() + static_cast<size_t>(i) * c.cols;
    for (int k = 0; k < a.rows; ++k) {
      const double aki = a.at(k, i);
      if (aki == 0.0) continue;
      const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
      for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw ShapeError("matmul_bt: column counts differ");
  Matrix c(a.rows, b.rows);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + static_cast<size_t>(i) * a.cols;
    double* crow = c.data.data() + static_cast<size_t>(i) * c.cols;
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.data.data() + static_cast<size_t>(j) * b.cols;
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      crow[j] = s;
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Matrix spmm(const Csr& s, const Matrix& d) {
  if (s.cols != d.rows) throw ShapeError("spmm: inner dimensions differ");
  Matrix c(s.rows, d.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < s.rows; ++i) {
    double* crow = c.data.data() + static_cast<size_t>(i) * c.cols;
    for (int p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      const double v = s.vals[p];
      const double* drow =
          d.data.data() + static_cast<size_t>(s.col_idx[p]) * d.cols;
      for (int j = 0; j < d.cols; ++j) crow[j] += v * drow[j];
    }
  }
  return c;
}

Csr transpose(const Csr& s) {
  Csr t;
  t.rows = s.cols;
  t.cols = s.rows;
  t.row_ptr.assign(t.rows + 1, 0);
  for (int c : s.col_idx) ++t.row_ptr[c + 1];
  for (int i = 0; i < t.rows; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col_idx.resize(s.nnz());
  t.vals.resize(s.nnz());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int i = 0; i < s.rows; ++i) {
    for (int p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      int pos = next[s.col_idx[p]]++;
      t.col_idx[pos] = i;
      t.vals[pos] = s.vals[p];
    }
  }
  return t;
}

Matrix to_dense(const Csr& s) {
  Matrix d(s.rows, s.cols);
  for (int i = 0; i < s.rows; ++i)
    for (int p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p)
      d.at(i, s.col_idx[p]) = s.vals[p];
  return d;
}

}  // namespace linktheft
