#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stage_system.hpp"

namespace stagemg {

enum class PatchKind { VertexStar, SingleDof, Custom };

/**
 * Overlapping subsets of spatial dofs. Boundary dofs never appear in a
 * patch; they are handled by the identity part of the preconditioners.
 */
struct PatchDecomposition {
  std::vector<std::vector<int>> patches;  // each sorted ascending
  std::shared_ptr<const FunctionSpace> space;
  PatchKind kind = PatchKind::Custom;
};

/**
 * One patch per mesh vertex: the vertex dof plus, for quadratic spaces,
 * the midpoint dofs of interior edges meeting the vertex. Patches around
 * boundary vertices keep only their interior members (needed to cover
 * interior edge dofs whose endpoints both sit on the boundary); empty
 * patches are dropped.
 */
PatchDecomposition vertex_star_patches(
    const std::shared_ptr<const FunctionSpace>& space);

/** One singleton patch per interior dof. */
PatchDecomposition single_dof_patches(
    const std::shared_ptr<const FunctionSpace>& space);

/** Debug export, one line per patch: "<id>: <dof> <dof> ...". */
void export_patches(const PatchDecomposition& pd, const std::string& path);

/**
 * Preconditioner W for the coupled stage operator. apply_inverse computes
 * W^{-1} r; every implementation acts as the identity on boundary dofs, so
 * consistent boundary values survive smoothing untouched.
 */
class StagePreconditioner {
 public:
  virtual ~StagePreconditioner() = default;
  virtual void apply_inverse(std::span<const double> r,
                             std::span<double> out) const = 0;
  virtual std::string kind() const = 0;
  /** Damping that pairs well with the smoother: 2/3 for Jacobi types, 1
   *  for the Schwarz smoother. */
  virtual double default_omega() const = 0;
  int total_dim() const { return total_dim_; }

 protected:
  int total_dim_ = 0;
};

/**
 * Entrywise diagonal of the coupled operator. Ignores the off-diagonal
 * tableau coupling, which is what breaks its stage-decoupling property for
 * methods with genuinely coupled stages.
 */
std::unique_ptr<StagePreconditioner> point_jacobi(const StageSystem& sys);

/**
 * One dense s x s system per spatial dof: m_pp I + dt k_pp A. Boundary
 * blocks are the identity because of the boundary elimination convention.
 */
std::unique_ptr<StagePreconditioner> stage_block_jacobi(
    const StageSystem& sys);

/**
 * Additive Schwarz over stage-product patches: for each patch the full
 * (s p) x (s p) restriction of the coupled operator is factored once;
 * application sums the patch corrections and passes boundary entries
 * through unchanged.
 */
std::unique_ptr<StagePreconditioner> stage_asm(const StageSystem& sys,
                                               const PatchDecomposition& pd,
                                               int threads = 1);

/** nu sweeps of x <- x - omega W^{-1} (B x - b); returns the final iterate. */
std::vector<double> smooth_apply(const StagePreconditioner& prec,
                                 const StageSystem& sys,
                                 std::span<const double> x,
                                 std::span<const double> b, int nu,
                                 double omega);

/**
 * Dense inverse of the single-stage surrogate diag(M) + z diag(K) of the
 * stage block Jacobi smoother, identity on boundary dofs by construction.
 */
DenseMatrix<cdouble> pencil_block_jacobi_inverse(const ComplexPencil& pencil,
                                                 const FunctionSpace& space);

/**
 * Dense inverse of the single-stage Schwarz smoother for a pencil: sum of
 * patchwise inverses of M + z K plus the identity on boundary dofs.
 */
DenseMatrix<cdouble> pencil_asm_inverse(const ComplexPencil& pencil,
                                        const PatchDecomposition& pd);

}  // namespace stagemg
