#pragma once

#include <span>
#include <string>
#include <vector>

#include "dense.hpp"

namespace stagemg {

/**
 * Immutable real matrix in compressed-row storage. Within each row the
 * column indices are strictly increasing; duplicate triplets are summed and
 * entries of magnitude below 1e-300 are dropped during finalization.
 */
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr,
               std::vector<int> col, std::vector<double> val);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(col_.size()); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col() const { return col_; }
  const std::vector<double>& val() const { return val_; }

  /** Entry lookup by binary search within the row; absent entries are 0. */
  double at(int i, int j) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
};

/** Triplet accumulator; finalize() produces the CSR form. */
class SparseBuilder {
 public:
  SparseBuilder(int rows, int cols);

  void add(int i, int j, double v);
  SparseMatrix finalize();

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  struct Triplet {
    int i, j;
    double v;
  };
  int rows_, cols_;
  std::vector<Triplet> trips_;
};

/** y = A x with a real matrix and a real or complex vector. */
template <class S>
void spmv(const SparseMatrix& a, std::span<const S> x, std::span<S> y) {
  require(a.cols() == static_cast<int>(x.size()) &&
              a.rows() == static_cast<int>(y.size()),
          ErrorCode::DimensionMismatch, "spmv: size mismatch");
  const auto& rp = a.row_ptr();
  const auto& col = a.col();
  const auto& val = a.val();
  for (int i = 0; i < a.rows(); ++i) {
    S acc(0);
    for (int k = rp[i]; k < rp[i + 1]; ++k) acc += val[k] * x[col[k]];
    y[i] = acc;
  }
}

/** y = A^T x accumulated row by row. */
template <class S>
void spmv_transpose(const SparseMatrix& a, std::span<const S> x,
                    std::span<S> y) {
  require(a.rows() == static_cast<int>(x.size()) &&
              a.cols() == static_cast<int>(y.size()),
          ErrorCode::DimensionMismatch, "spmv_transpose: size mismatch");
  const auto& rp = a.row_ptr();
  const auto& col = a.col();
  const auto& val = a.val();
  for (int j = 0; j < a.cols(); ++j) y[j] = S(0);
  for (int i = 0; i < a.rows(); ++i) {
    S xi = x[i];
    if (xi == S(0)) continue;
    for (int k = rp[i]; k < rp[i + 1]; ++k) y[col[k]] += val[k] * xi;
  }
}

SparseMatrix sparse_add(double alpha, const SparseMatrix& a, double beta,
                        const SparseMatrix& b);
SparseMatrix sparse_transpose(const SparseMatrix& a);
SparseMatrix sparse_identity(int n);

/**
 * Kronecker product kron(A, K) of a dense factor against a sparse factor,
 * with block row i holding A(i, j) * K. Structural zeros of A contribute
 * nothing.
 */
SparseMatrix kron_sparse(const DenseMatrix<double>& a, const SparseMatrix& k);

DenseMatrix<double> densify(const SparseMatrix& a);
double sparse_max_abs(const SparseMatrix& a);

/** Matrix Market coordinate-format export with 17 significant digits, so a
 *  write/read round trip reproduces every entry exactly. */
void write_matrix_market(const std::string& path, const SparseMatrix& a);
SparseMatrix read_matrix_market(const std::string& path);

}  // namespace stagemg
