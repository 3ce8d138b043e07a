#pragma once

#include <vector>

#include "dense.hpp"

namespace stagemg {

/**
 * Eigenvalues of a general square matrix, sorted by real part then imaginary
 * part. Reduction to upper Hessenberg form by Householder similarity, then
 * shifted QR: Francis double shifts for real input, Wilkinson single shifts
 * for complex input. max_sweeps < 0 selects the default cap of 30 * n QR
 * sweeps; exceeding the cap raises ErrorCode::NoConvergence.
 */
std::vector<cdouble> dense_eigenvalues(DenseMatrix<double> a,
                                       int max_sweeps = -1);
std::vector<cdouble> dense_eigenvalues(DenseMatrix<cdouble> a,
                                       int max_sweeps = -1);

double spectral_radius(const DenseMatrix<double>& a);
double spectral_radius(const DenseMatrix<cdouble>& a);

}  // namespace stagemg
