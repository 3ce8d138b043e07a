#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "dense.hpp"
#include "mesh.hpp"
#include "sparse.hpp"

namespace stagemg {

/**
 * Symmetric triangle rule, exact through polynomial degree 4. Points are
 * barycentric, weights sum to one; integrals scale by the triangle area.
 */
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

const QuadratureRule& triangle_quadrature_degree4();

/**
 * Basis values at a barycentric point, local ordering: vertices 0,1,2 then
 * (degree 2 only) midpoints of edges (0,1), (1,2), (0,2).
 */
void shape_values(int degree, const std::array<double, 3>& lambda, double* out);

/** Reference derivatives d/dxi, d/deta with (xi, eta) = (lambda1, lambda2). */
void shape_gradients(int degree, const std::array<double, 3>& lambda,
                     double* dxi, double* deta);

/** Element mass matrix on an arbitrary (counterclockwise) triangle. */
DenseMatrix<double> local_mass(const std::array<std::array<double, 2>, 3>& xy,
                               int degree);

/** Element stiffness matrix for the Laplacian on the same triangle. */
DenseMatrix<double> local_stiffness(
    const std::array<std::array<double, 2>, 3>& xy, int degree);

/**
 * Continuous Lagrange space on a mesh, degree 1 or 2. Dofs are vertex
 * values, plus edge-midpoint values for degree 2 (edge dofs numbered after
 * all vertex dofs, in lexicographic edge order).
 */
class FunctionSpace {
 public:
  FunctionSpace(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int ndof() const { return ndof_; }
  int dofs_per_cell() const { return degree_ == 1 ? 3 : 6; }

  /** Global dofs of a triangle in local order; unused slots are -1. */
  std::array<int, 6> cell_dofs(int t) const;

  const std::vector<std::array<double, 2>>& dof_coords() const {
    return dof_coords_;
  }
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
  bool is_boundary_dof(int dof) const { return on_boundary_[dof]; }

  /** Edge list backing the degree-2 midpoint dofs (empty for degree 1). */
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /** Degree-2 only: global dof of the midpoint of vertex pair (a, b). */
  int edge_dof(int a, int b) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  int ndof_;
  std::vector<std::array<double, 2>> dof_coords_;
  std::vector<int> boundary_dofs_;
  std::vector<char> on_boundary_;
  std::vector<std::array<int, 2>> edges_;
  std::map<std::array<int, 2>, int> edge_index_;
};

struct AssembledForms {
  SparseMatrix M;
  SparseMatrix K;
  std::shared_ptr<const FunctionSpace> space;
};

/**
 * Mass and stiffness assembly. Local work may run on several threads; the
 * accumulation order is fixed by triangle index, so the result does not
 * depend on the schedule.
 */
AssembledForms assemble(const std::shared_ptr<const FunctionSpace>& space,
                        int threads = 1);

/** Load vector F_i = integral of f(x, y, t) phi_i. */
std::vector<double> assemble_load(
    const FunctionSpace& space,
    const std::function<double(double, double, double)>& f, double t);

/**
 * Matrix of the inclusion of the coarse space into the fine one; column j
 * holds fine nodal values of coarse basis function j. Requires
 * fine.mesh = refine(coarse.mesh) and equal degree.
 */
SparseMatrix prolongation(const FunctionSpace& coarse,
                          const FunctionSpace& fine);

/**
 * Homogeneous Dirichlet rows/columns removed symmetrically: boundary rows
 * and columns are zeroed, with unit mass diagonal and zero stiffness
 * diagonal, so boundary dofs stay inert under any pencil M + z K.
 */
AssembledForms apply_dirichlet(const AssembledForms& forms);

/** Evaluate f at every dof coordinate (Lagrange interpolation). */
std::vector<double> interpolate(
    const FunctionSpace& space,
    const std::function<double(double, double)>& f);

/** Quadrature L2 distance between a coefficient vector and a scalar field. */
double l2_error(const FunctionSpace& space, std::span<const double> u,
                const std::function<double(double, double)>& exact);

}  // namespace stagemg
