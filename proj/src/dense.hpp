#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <utility>
#include <vector>

#include "common.hpp"

namespace stagemg {

/** Row-major dense matrix over double or std::complex<double>. */
template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    require(rows >= 0 && cols >= 0, ErrorCode::InvalidArgument,
            "dense matrix dimensions must be nonnegative");
    a_.assign(static_cast<size_t>(rows) * cols, T(0));
  }

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const {
    return a_[static_cast<size_t>(i) * cols_ + j];
  }

  std::vector<T>& data() { return a_; }
  const std::vector<T>& data() const { return a_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> a_;
};

inline double abs_of(double v) { return std::abs(v); }
inline double abs_of(const cdouble& v) { return std::abs(v); }

inline double conj_of(double v) { return v; }
inline cdouble conj_of(const cdouble& v) { return std::conj(v); }

template <class T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  require(a.cols() == b.rows(), ErrorCode::DimensionMismatch,
          "matmul: inner dimensions differ");
  DenseMatrix<T> c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      T aik = a(i, k);
      if (aik == T(0)) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

template <class T>
DenseMatrix<T> mat_add(const DenseMatrix<T>& a, const DenseMatrix<T>& b,
                       T alpha = T(1), T beta = T(1)) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          ErrorCode::DimensionMismatch, "mat_add: shapes differ");
  DenseMatrix<T> c(a.rows(), a.cols());
  for (size_t i = 0; i < c.data().size(); ++i)
    c.data()[i] = alpha * a.data()[i] + beta * b.data()[i];
  return c;
}

template <class T>
DenseMatrix<T> transpose(const DenseMatrix<T>& a) {
  DenseMatrix<T> t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline DenseMatrix<cdouble> conj_transpose(const DenseMatrix<cdouble>& a) {
  DenseMatrix<cdouble> t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  return t;
}

template <class T>
std::vector<T> matvec(const DenseMatrix<T>& a, std::span<const T> x) {
  require(a.cols() == static_cast<int>(x.size()), ErrorCode::DimensionMismatch,
          "matvec: size mismatch");
  std::vector<T> y(a.rows(), T(0));
  for (int i = 0; i < a.rows(); ++i) {
    T acc(0);
    for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

template <class T>
double max_abs(const DenseMatrix<T>& a) {
  double m = 0.0;
  for (const T& v : a.data()) m = std::max(m, abs_of(v));
  return m;
}

/** Entrywise k-th power by repeated multiplication; k = 0 gives the identity. */
template <class T>
DenseMatrix<T> matpow(const DenseMatrix<T>& a, int k) {
  require(a.rows() == a.cols(), ErrorCode::InvalidArgument,
          "matpow: matrix must be square");
  require(k >= 0, ErrorCode::InvalidArgument, "matpow: exponent must be >= 0");
  DenseMatrix<T> r = DenseMatrix<T>::identity(a.rows());
  for (int i = 0; i < k; ++i) r = matmul(r, a);
  return r;
}

inline DenseMatrix<cdouble> to_complex(const DenseMatrix<double>& a) {
  DenseMatrix<cdouble> c(a.rows(), a.cols());
  for (size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i];
  return c;
}

/**
 * LU factorization with partial pivoting, PA = LU stored packed.
 * piv[k] records the row swapped into position k at step k.
 */
template <class T>
struct DenseLu {
  DenseMatrix<T> lu;
  std::vector<int> piv;
  int sign = 1;

  int dim() const { return lu.rows(); }

  T determinant() const {
    T det = (sign > 0) ? T(1) : T(-1);
    for (int i = 0; i < dim(); ++i) det *= lu(i, i);
    return det;
  }
};

template <class T>
DenseLu<T> lu_factor(DenseMatrix<T> a) {
  require(a.rows() == a.cols(), ErrorCode::InvalidArgument,
          "lu_factor: matrix must be square");
  int n = a.rows();
  DenseLu<T> f;
  f.piv.resize(n);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = abs_of(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = abs_of(a(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    require(best != 0.0, ErrorCode::SingularMatrix,
            "lu_factor: exactly singular pivot at column " + std::to_string(k));
    f.piv[k] = p;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      f.sign = -f.sign;
    }
    for (int i = k + 1; i < n; ++i) {
      T m = a(i, k) / a(k, k);
      a(i, k) = m;
      if (m == T(0)) continue;
      for (int j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

template <class T>
std::vector<T> lu_solve(const DenseLu<T>& f, std::vector<T> b) {
  int n = f.dim();
  require(static_cast<int>(b.size()) == n, ErrorCode::DimensionMismatch,
          "lu_solve: rhs size mismatch");
  // The factorization swaps whole rows, so the stored multipliers live in
  // final pivoted positions: permute b completely before eliminating.
  for (int k = 0; k < n; ++k)
    if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i) b[i] -= f.lu(i, k) * b[k];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) b[i] -= f.lu(i, j) * b[j];
    b[i] /= f.lu(i, i);
  }
  return b;
}

template <class T>
DenseMatrix<T> lu_inverse(const DenseLu<T>& f) {
  int n = f.dim();
  DenseMatrix<T> inv(n, n);
  std::vector<T> e(n, T(0));
  for (int j = 0; j < n; ++j) {
    e.assign(n, T(0));
    e[j] = T(1);
    std::vector<T> col = lu_solve(f, e);
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

}  // namespace stagemg
