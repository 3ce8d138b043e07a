#include "sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stagemg {

namespace {
constexpr double kDropTol = 1e-300;
}

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> row_ptr,
                           std::vector<int> col, std::vector<double> val)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_(std::move(col)),
      val_(std::move(val)) {
  require(static_cast<int>(row_ptr_.size()) == rows_ + 1,
          ErrorCode::InvalidArgument, "SparseMatrix: bad row pointer length");
  require(col_.size() == val_.size(), ErrorCode::InvalidArgument,
          "SparseMatrix: column/value length mismatch");
}

double SparseMatrix::at(int i, int j) const {
  require(i >= 0 && i < rows_ && j >= 0 && j < cols_,
          ErrorCode::InvalidArgument, "SparseMatrix::at: index out of range");
  auto begin = col_.begin() + row_ptr_[i];
  auto end = col_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return val_[it - col_.begin()];
}

SparseBuilder::SparseBuilder(int rows, int cols) : rows_(rows), cols_(cols) {
  require(rows >= 0 && cols >= 0, ErrorCode::InvalidArgument,
          "SparseBuilder: dimensions must be nonnegative");
}

void SparseBuilder::add(int i, int j, double v) {
  require(i >= 0 && i < rows_ && j >= 0 && j < cols_,
          ErrorCode::InvalidArgument, "SparseBuilder::add: index out of range");
  trips_.push_back({i, j, v});
}

SparseMatrix SparseBuilder::finalize() {
  std::stable_sort(trips_.begin(), trips_.end(),
                   [](const Triplet& a, const Triplet& b) {
                     if (a.i != b.i) return a.i < b.i;
                     return a.j < b.j;
                   });
  std::vector<int> row_ptr(rows_ + 1, 0);
  std::vector<int> col;
  std::vector<double> val;
  col.reserve(trips_.size());
  val.reserve(trips_.size());
  size_t p = 0;
  for (int i = 0; i < rows_; ++i) {
    while (p < trips_.size() && trips_[p].i == i) {
      int j = trips_[p].j;
      double acc = 0.0;
      while (p < trips_.size() && trips_[p].i == i && trips_[p].j == j) {
        acc += trips_[p].v;
        ++p;
      }
      if (std::abs(acc) >= kDropTol) {
        col.push_back(j);
        val.push_back(acc);
      }
    }
    row_ptr[i + 1] = static_cast<int>(col.size());
  }
  trips_.clear();
  return SparseMatrix(rows_, cols_, std::move(row_ptr), std::move(col),
                      std::move(val));
}

SparseMatrix sparse_add(double alpha, const SparseMatrix& a, double beta,
                        const SparseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          ErrorCode::DimensionMismatch, "sparse_add: shapes differ");
  SparseBuilder out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      out.add(i, a.col()[k], alpha * a.val()[k]);
  for (int i = 0; i < b.rows(); ++i)
    for (int k = b.row_ptr()[i]; k < b.row_ptr()[i + 1]; ++k)
      out.add(i, b.col()[k], beta * b.val()[k]);
  return out.finalize();
}

SparseMatrix sparse_transpose(const SparseMatrix& a) {
  SparseBuilder out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      out.add(a.col()[k], i, a.val()[k]);
  return out.finalize();
}

SparseMatrix sparse_identity(int n) {
  SparseBuilder b(n, n);
  for (int i = 0; i < n; ++i) b.add(i, i, 1.0);
  return b.finalize();
}

SparseMatrix kron_sparse(const DenseMatrix<double>& a, const SparseMatrix& k) {
  int s = a.rows();
  int t = a.cols();
  int m = k.rows();
  int n = k.cols();
  std::vector<int> row_ptr(static_cast<size_t>(s) * m + 1, 0);
  std::vector<int> col;
  std::vector<double> val;
  for (int bi = 0; bi < s; ++bi) {
    for (int p = 0; p < m; ++p) {
      for (int bj = 0; bj < t; ++bj) {
        double w = a(bi, bj);
        if (w == 0.0) continue;
        for (int kk = k.row_ptr()[p]; kk < k.row_ptr()[p + 1]; ++kk) {
          col.push_back(bj * n + k.col()[kk]);
          val.push_back(w * k.val()[kk]);
        }
      }
      row_ptr[static_cast<size_t>(bi) * m + p + 1] =
          static_cast<int>(col.size());
    }
  }
  return SparseMatrix(s * m, t * n, std::move(row_ptr), std::move(col),
                      std::move(val));
}

DenseMatrix<double> densify(const SparseMatrix& a) {
  DenseMatrix<double> d(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      d(i, a.col()[k]) = a.val()[k];
  return d;
}

double sparse_max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (double v : a.val()) m = std::max(m, std::abs(v));
  return m;
}

void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io,
          "write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
  char buf[64];
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", a.val()[k]);
      out << (i + 1) << " " << (a.col()[k] + 1) << " " << buf << "\n";
    }
  }
  require(out.good(), ErrorCode::Io, "write_matrix_market: write failed");
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "read_matrix_market: cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io,
          "read_matrix_market: empty file");
  require(line.rfind("%%MatrixMarket", 0) == 0, ErrorCode::Io,
          "read_matrix_market: missing MatrixMarket banner");
  {
    std::istringstream hdr(line);
    std::string tag, object, fmt, field, symmetry;
    hdr >> tag >> object >> fmt >> field >> symmetry;
    require(object == "matrix" && fmt == "coordinate" && field == "real" &&
                symmetry == "general",
            ErrorCode::Io,
            "read_matrix_market: only coordinate real general is supported");
  }
  do {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io,
            "read_matrix_market: missing size line");
  } while (!line.empty() && line[0] == '%');
  int rows, cols, nnz;
  {
    std::istringstream sz(line);
    require(static_cast<bool>(sz >> rows >> cols >> nnz), ErrorCode::Io,
            "read_matrix_market: malformed size line");
  }
  SparseBuilder b(rows, cols);
  for (int e = 0; e < nnz; ++e) {
    int i, j;
    double v;
    require(static_cast<bool>(in >> i >> j >> v), ErrorCode::Io,
            "read_matrix_market: malformed entry line");
    require(i >= 1 && i <= rows && j >= 1 && j <= cols, ErrorCode::Io,
            "read_matrix_market: entry index out of range");
    b.add(i - 1, j - 1, v);
  }
  return b.finalize();
}

}  // namespace stagemg
