#pragma once

#include <string>
#include <vector>

#include "dense.hpp"

namespace stagemg {

enum class TableauFamily { RadauIIA, GaussLegendre };

std::string family_name(TableauFamily family);
TableauFamily family_from_name(const std::string& name);

/** Coefficients of an s-stage collocation Runge-Kutta method. */
struct ButcherTableau {
  TableauFamily family;
  int s = 0;
  DenseMatrix<double> A;
  std::vector<double> b;
  std::vector<double> c;
};

/**
 * Eigendecomposition A = X diag(eigenvalues) X^{-1} with unit-norm
 * eigenvector columns. Eigenvalues are sorted by imaginary part, then real
 * part, so conjugate pairs sit symmetrically about the middle of the list.
 * cond2 is the 2-norm condition number of X.
 */
struct SpectralDecomposition {
  std::vector<cdouble> eigenvalues;
  DenseMatrix<cdouble> X;
  DenseMatrix<cdouble> Xinv;
  double cond2 = 0.0;
};

/** Stiffly accurate Radau IIA collocation method, s in 1..6. */
ButcherTableau make_radau_iia(int s);

/** Gauss-Legendre collocation method, s in 1..6. */
ButcherTableau make_gauss_legendre(int s);

ButcherTableau make_tableau(TableauFamily family, int s);

/**
 * A[i][j] = integral over [0, c_i] of the j-th Lagrange basis polynomial on
 * the node set c. Nodes closer together than 1e-12 are rejected.
 */
DenseMatrix<double> collocation_matrix(const std::vector<double>& c);

/** Diagonalizes the coefficient matrix; rejects numerically defective input
 *  (eigenvector matrix condition above 1e12). */
SpectralDecomposition eig_decompose(const ButcherTableau& tab);

/** One row per eigenvalue of the stage matrix of (family, s). */
struct SpectrumRow {
  std::string family;
  int s;
  double re;
  double im;
  double cond2;
};

std::vector<SpectrumRow> spectrum_report(
    const std::vector<TableauFamily>& families, int s_min, int s_max);

}  // namespace stagemg
