#pragma once

#include <functional>
#include <memory>
#include <span>

#include "fem.hpp"
#include "sparse.hpp"
#include "tableau.hpp"

namespace stagemg {

/**
 * The coupled operator of one implicit Runge-Kutta step,
 * B = I (x) M + dt A (x) K, over stage-major vectors: all spatial dofs of
 * stage 1 first, then stage 2, and so on. Immutable once built.
 */
struct StageSystem {
  SparseMatrix M;
  SparseMatrix K;
  ButcherTableau tableau;
  double dt = 0.0;

  int stages() const { return tableau.s; }
  int space_dim() const { return M.rows(); }
  int total_dim() const { return tableau.s * M.rows(); }
};

StageSystem make_stage_system(const SparseMatrix& M, const SparseMatrix& K,
                              const ButcherTableau& tableau, double dt);

/**
 * y_i = M x_i + dt sum_j A_ij K x_j, computed stage by stage from spmv
 * products; the coupled matrix is never formed. Stages may run on several
 * threads; the combination is deterministic either way.
 */
std::vector<double> apply_stage_operator(const StageSystem& sys,
                                         std::span<const double> x,
                                         int threads = 1);

/** Explicit sparse I (x) M + dt A (x) K; refuses dimensions above the cap. */
SparseMatrix materialize(const StageSystem& sys, int cap = 20000);

/** Space-time forcing f(x, y, t) tied to the space it is integrated on. */
struct ForcingSpec {
  std::function<double(double, double, double)> f;
  std::shared_ptr<const FunctionSpace> space;
};

/**
 * Stacked stage loads: block i holds the load vector of f at time
 * t_n + c_i dt with boundary entries zeroed, matching the convention that
 * boundary dofs stay inert.
 */
std::vector<double> stage_rhs(const ForcingSpec& fs, double t_n,
                              const ButcherTableau& tableau, double dt);

/** u_{n+1} = u_n + dt sum_i b_i k_i over the stage-major stack k. */
std::vector<double> rk_update(std::span<const double> u_n,
                              std::span<const double> k,
                              const ButcherTableau& tableau, double dt);

/**
 * Equivalent reformulation Ainv (x) M + dt I (x) K of the stage operator
 * with right-hand side (Ainv (x) I) rhs. Optional solver path; the
 * multigrid pipeline works on the untransformed system.
 */
struct TransformedStageSystem {
  DenseMatrix<double> a_inv;
  std::function<std::vector<double>(std::span<const double>)> apply;
  std::vector<double> rhs;
};

TransformedStageSystem butcher_transform(const StageSystem& sys,
                                         std::span<const double> rhs);

/** Single-stage complex pencil M + z K. */
struct ComplexPencil {
  SparseMatrix M;
  SparseMatrix K;
  cdouble z;
};

/** Pencil with z = lambda * dt, the characteristic block of the coupled B. */
ComplexPencil characteristic_pencil(const SparseMatrix& M,
                                    const SparseMatrix& K, cdouble lambda,
                                    double dt);

/** y = M x + z (K x), composed exactly in that order. */
std::vector<cdouble> apply_pencil(const ComplexPencil& pencil,
                                  std::span<const cdouble> x);

DenseMatrix<cdouble> densify_pencil(const ComplexPencil& pencil);

}  // namespace stagemg
