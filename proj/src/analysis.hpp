#pragma once

#include <functional>
#include <string>
#include <vector>

#include "multigrid.hpp"
#include "tableau.hpp"

namespace stagemg {

/** Dense matrix of a linear map, column j = op(e_j). Capped at 3000. */
DenseMatrix<double> densify_operator(
    const std::function<std::vector<double>(std::span<const double>)>& op,
    int dim);

/** s x s grid of N x N complex blocks, stored row-major by (i, j). */
struct BlockGrid {
  int s = 0;
  int n = 0;
  std::vector<DenseMatrix<cdouble>> blocks;

  DenseMatrix<cdouble>& block(int i, int j) { return blocks[i * s + j]; }
  const DenseMatrix<cdouble>& block(int i, int j) const {
    return blocks[i * s + j];
  }
};

/**
 * Similarity transform (X^{-1} (x) I) Y (X (x) I) computed blockwise on the
 * s x s grid of N x N blocks of Y; never forms a complex sN x sN matrix.
 */
BlockGrid characteristic_transform(const DenseMatrix<double>& Y,
                                   const DenseMatrix<cdouble>& X);

/** Inverse of characteristic_transform: (X (x) I) Z (X^{-1} (x) I). */
DenseMatrix<double> characteristic_reassemble(const BlockGrid& Z,
                                              const DenseMatrix<cdouble>& X);

struct MonolithicityReport {
  bool is_monolithic = false;
  /// Largest off-diagonal-block magnitude relative to max |Y|.
  double max_offdiag = 0.0;
  std::vector<DenseMatrix<cdouble>> blocks;  // the s diagonal blocks
  double tol = 0.0;
};

/**
 * Transforms Y into the eigenbasis of the stage coupling and measures how
 * far it is from block-diagonal.
 */
MonolithicityReport monolithicity_check(const DenseMatrix<double>& Y,
                                        const DenseMatrix<cdouble>& X,
                                        double tol = 1e-9);

/**
 * Single-stage complex cycle operator for eigenvalue lambda of the stage
 * coupling: per-level pencils M + lambda dt K, per-level single-stage
 * smoother inverses built directly from those pencils, real transfers, an
 * exact bottom solve, and the recursion
 *   T_0 = 0,   T_l = S_l^{nu2} (I - P (I - T_{l-1}^gamma) B_{l-1}^{-1}
 *                                  P^T B_l) S_l^{nu1}.
 * Everything is assembled from scratch in complex arithmetic, nothing is
 * read off the coupled operator.
 */
DenseMatrix<cdouble> characteristic_cycle_operator(const MgHierarchy& h,
                                                   const MgConfig& cfg,
                                                   cdouble lambda);

/** Two-level form of the characteristic cycle over an explicit level pair. */
DenseMatrix<cdouble> build_characteristic_two_grid(const MgLevel& fine,
                                                   const MgLevel& coarse,
                                                   SmootherKind smoother,
                                                   double dt,
                                                   const MgConfig& cfg,
                                                   cdouble lambda);

struct SpectralReport {
  double rho_coupled = 0.0;
  std::vector<double> rho_blocks;
  double max_block_rho = 0.0;
  double discrepancy = 0.0;
};

/**
 * Both sides of the identity rho(T) = max_i rho(T_i): the left from the
 * densified coupled cycle on the full hierarchy, the right from the
 * independently built characteristic cycle operators.
 */
SpectralReport verify_spectral_theorem(const MgHierarchy& h,
                                       const MgConfig& cfg);

struct VerifyCase {
  TableauFamily family = TableauFamily::RadauIIA;
  int s = 1;
  SmootherKind smoother = SmootherKind::StageBlockJacobi;
  int levels = 2;  // 2 = two-grid, 3 = V-cycle on three levels
  int degree = 1;

  std::string name() const;
};

struct VerifyResult {
  VerifyCase c;
  SpectralReport report;
  double max_offdiag = 0.0;  // off-diagonal leakage of the transformed T
  bool pass = false;
};

struct VerifySettings {
  int base_n = 2;
  double dt = 0.25;
  int nu = 2;
  double omega = 2.0 / 3.0;
  double rho_tol = 1e-8;
  double mono_tol = 1e-8;
  int threads = 1;
};

/**
 * The standard sweep: RadauIIA s=1..3 and Gauss-Legendre s=1..2, both
 * monolithic smoothers, two-grid and three-level V-cycles, degrees 1 and 2.
 */
std::vector<VerifyCase> default_verify_cases();

VerifyResult run_verify_case(const VerifyCase& c, const VerifySettings& vs);

/** Runs all cases, parallel across cases, deterministic result order. */
std::vector<VerifyResult> run_verify_sweep(const std::vector<VerifyCase>& cases,
                                           const VerifySettings& vs);

/** CSV with header case,s,family,smoother,cycle,rho_coupled,max_block_rho,discrepancy,max_offdiag. */
void write_verify_csv(const std::vector<VerifyResult>& results,
                      const std::string& path);

}  // namespace stagemg
