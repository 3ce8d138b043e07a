#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gmres.hpp"
#include "smoothers.hpp"

namespace stagemg {

enum class SmootherKind { PointJacobi, StageBlockJacobi, StageAsm };

std::string smoother_name(SmootherKind kind);
SmootherKind smoother_from_name(const std::string& name);

/**
 * Cycle shape: nu_pre sweeps before and nu_post after the coarse
 * correction, gamma recursions per level (1 = V, 2 = W), damping omega.
 */
struct MgConfig {
  int nu_pre = 2;
  int nu_post = 2;
  int gamma = 1;
  double omega = 2.0 / 3.0;
};

void validate(const MgConfig& cfg);

/**
 * One level of the hierarchy. P maps this level's dofs to the next finer
 * level and is absent on the finest level; the coarsest level carries the
 * dense factorization used for the exact bottom solve.
 */
struct MgLevel {
  std::shared_ptr<const FunctionSpace> space;
  StageSystem sys;
  std::unique_ptr<StagePreconditioner> prec;
  PatchDecomposition patches;  // populated for the Schwarz smoother
  SparseMatrix P;
  bool has_p = false;
  DenseLu<double> coarse_lu;
  bool has_lu = false;
};

/** Levels ordered coarsest first. */
struct MgHierarchy {
  std::vector<MgLevel> levels;
  ButcherTableau tableau;
  double dt = 0.0;
  SmootherKind smoother = SmootherKind::StageBlockJacobi;

  const MgLevel& finest() const { return levels.back(); }
  int finest_index() const { return static_cast<int>(levels.size()) - 1; }
};

/**
 * Meshes by repeated refinement from an n x n base grid, operators
 * assembled directly on every level with boundary elimination applied,
 * transfers built between consecutive levels. The coarsest operator is
 * materialized and LU-factored; its coupled dimension must stay within
 * coarse_cap.
 */
MgHierarchy build_hierarchy(int coarse_n, int levels, int degree,
                            const ButcherTableau& tableau, double dt,
                            SmootherKind smoother, int threads = 1,
                            int coarse_cap = 3000);

/** Per-stage application of P: block i of the result is P * block i. */
std::vector<double> stage_prolong(const SparseMatrix& P,
                                  std::span<const double> coarse, int s);

/** Per-stage application of the transpose of P (restriction). */
std::vector<double> stage_restrict(const SparseMatrix& P,
                                   std::span<const double> fine, int s);

/**
 * Recursive cycle on the sub-hierarchy up to level_index: pre-smooth,
 * restrict the residual, gamma coarse recursions from a zero guess,
 * prolong-correct, post-smooth. The coarsest level solves exactly.
 */
std::vector<double> cycle(const MgHierarchy& h, const MgConfig& cfg,
                          int level_index, std::span<const double> x,
                          std::span<const double> b);

/**
 * One two-level step. Shares the recursion code with cycle(), so a
 * two-level hierarchy's cycle and this call agree bit for bit; if the
 * coarse level carries no factorization, one is built on the fly.
 */
std::vector<double> two_grid_step(const MgLevel& fine, const MgLevel& coarse,
                                  const MgConfig& cfg,
                                  std::span<const double> x,
                                  std::span<const double> b);

struct StationaryStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/**
 * Plain cycle iteration x <- cycle(x, b) until the true relative residual
 * drops below tol.
 */
StationaryStats mg_stationary_solve(const MgHierarchy& h, const MgConfig& cfg,
                                    std::span<double> x,
                                    std::span<const double> b,
                                    double tol = 1e-8, int max_iter = 200);

struct MgSolveResult {
  std::vector<double> x;
  GmresStats stats;
  double true_rel_residual = 0.0;
};

/**
 * GMRES on the finest stage system with one cycle from a zero guess as the
 * (fixed, linear) preconditioner. After the preconditioned iteration
 * converges, the unpreconditioned residual is checked and the solve is
 * resumed at tighter inner tolerance until that residual meets tol too.
 */
MgSolveResult mg_preconditioned_gmres(const MgHierarchy& h,
                                      const MgConfig& cfg,
                                      std::span<const double> b, double tol,
                                      int max_iter = 500);

}  // namespace stagemg
