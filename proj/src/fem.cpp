#include "fem.hpp"

#include <cmath>

#include "parallel.hpp"

namespace stagemg {

const QuadratureRule& triangle_quadrature_degree4() {
  // Six-point symmetric rule: two orbits of three points. The barycentric
  // coordinates and weights have closed forms in sqrt(10); the rule is
  // exact for every polynomial of total degree <= 4.
  static const QuadratureRule rule = [] {
    const double s10 = std::sqrt(10.0);
    const double r = std::sqrt(38.0 - 44.0 * std::sqrt(0.4));
    const double b_in = (8.0 - s10 + r) / 18.0;   // orbit nearer the center
    const double b_out = (8.0 - s10 - r) / 18.0;  // orbit nearer the corners
    const double wr = std::sqrt(213125.0 - 53320.0 * s10);
    const double w_in = (620.0 + wr) / 3720.0;
    const double w_out = (620.0 - wr) / 3720.0;
    QuadratureRule q;
    for (const auto& [b, w] :
         {std::pair{b_in, w_in}, std::pair{b_out, w_out}}) {
      double a = 1.0 - 2.0 * b;
      q.points.push_back({a, b, b});
      q.points.push_back({b, a, b});
      q.points.push_back({b, b, a});
      q.weights.insert(q.weights.end(), 3, w);
    }
    return q;
  }();
  return rule;
}

void shape_values(int degree, const std::array<double, 3>& lambda,
                  double* out) {
  const double l0 = lambda[0], l1 = lambda[1], l2 = lambda[2];
  if (degree == 1) {
    out[0] = l0;
    out[1] = l1;
    out[2] = l2;
    return;
  }
  out[0] = l0 * (2.0 * l0 - 1.0);
  out[1] = l1 * (2.0 * l1 - 1.0);
  out[2] = l2 * (2.0 * l2 - 1.0);
  out[3] = 4.0 * l0 * l1;
  out[4] = 4.0 * l1 * l2;
  out[5] = 4.0 * l0 * l2;
}

void shape_gradients(int degree, const std::array<double, 3>& lambda,
                     double* dxi, double* deta) {
  const double l0 = lambda[0], l1 = lambda[1], l2 = lambda[2];
  if (degree == 1) {
    dxi[0] = -1.0;
    deta[0] = -1.0;
    dxi[1] = 1.0;
    deta[1] = 0.0;
    dxi[2] = 0.0;
    deta[2] = 1.0;
    return;
  }
  dxi[0] = 1.0 - 4.0 * l0;
  deta[0] = 1.0 - 4.0 * l0;
  dxi[1] = 4.0 * l1 - 1.0;
  deta[1] = 0.0;
  dxi[2] = 0.0;
  deta[2] = 4.0 * l2 - 1.0;
  dxi[3] = 4.0 * (l0 - l1);
  deta[3] = -4.0 * l1;
  dxi[4] = 4.0 * l2;
  deta[4] = 4.0 * l1;
  dxi[5] = -4.0 * l2;
  deta[5] = 4.0 * (l0 - l2);
}

namespace {

struct AffineMap {
  double j11, j12, j21, j22, det;
};

AffineMap triangle_map(const std::array<std::array<double, 2>, 3>& xy) {
  AffineMap m;
  m.j11 = xy[1][0] - xy[0][0];
  m.j12 = xy[2][0] - xy[0][0];
  m.j21 = xy[1][1] - xy[0][1];
  m.j22 = xy[2][1] - xy[0][1];
  m.det = m.j11 * m.j22 - m.j12 * m.j21;
  require(m.det > 0.0, ErrorCode::InvalidArgument,
          "triangle is degenerate or clockwise");
  return m;
}

int local_size(int degree) {
  require(degree == 1 || degree == 2, ErrorCode::InvalidArgument,
          "polynomial degree must be 1 or 2");
  return degree == 1 ? 3 : 6;
}

}  // namespace

DenseMatrix<double> local_mass(const std::array<std::array<double, 2>, 3>& xy,
                               int degree) {
  int nd = local_size(degree);
  AffineMap map = triangle_map(xy);
  double area = 0.5 * map.det;
  const QuadratureRule& q = triangle_quadrature_degree4();
  DenseMatrix<double> m(nd, nd);
  double phi[6];
  for (size_t k = 0; k < q.points.size(); ++k) {
    shape_values(degree, q.points[k], phi);
    double w = area * q.weights[k];
    // phi[i]*phi[j] first: the product commutes bitwise, so the assembled
    // matrix is exactly symmetric.
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) m(i, j) += w * (phi[i] * phi[j]);
  }
  return m;
}

DenseMatrix<double> local_stiffness(
    const std::array<std::array<double, 2>, 3>& xy, int degree) {
  int nd = local_size(degree);
  AffineMap map = triangle_map(xy);
  double area = 0.5 * map.det;
  const QuadratureRule& q = triangle_quadrature_degree4();
  DenseMatrix<double> kmat(nd, nd);
  double dxi[6], deta[6], gx[6], gy[6];
  for (size_t k = 0; k < q.points.size(); ++k) {
    shape_gradients(degree, q.points[k], dxi, deta);
    for (int i = 0; i < nd; ++i) {
      gx[i] = (map.j22 * dxi[i] - map.j21 * deta[i]) / map.det;
      gy[i] = (-map.j12 * dxi[i] + map.j11 * deta[i]) / map.det;
    }
    double w = area * q.weights[k];
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        kmat(i, j) += w * (gx[i] * gx[j] + gy[i] * gy[j]);
  }
  return kmat;
}

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  require(mesh_ != nullptr, ErrorCode::InvalidArgument,
          "function space needs a mesh");
  local_size(degree_);
  dof_coords_ = mesh_->vertices;
  if (degree_ == 2) {
    edges_ = mesh_edges(*mesh_);
    int nv = mesh_->vertex_count();
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
      edge_index_[edges_[e]] = nv + e;
      const auto& a = mesh_->vertices[edges_[e][0]];
      const auto& b = mesh_->vertices[edges_[e][1]];
      dof_coords_.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
    }
  }
  ndof_ = static_cast<int>(dof_coords_.size());
  on_boundary_.assign(ndof_, 0);
  for (int i = 0; i < ndof_; ++i) {
    const auto& p = dof_coords_[i];
    if (p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0) {
      on_boundary_[i] = 1;
      boundary_dofs_.push_back(i);
    }
  }
}

std::array<int, 6> FunctionSpace::cell_dofs(int t) const {
  const auto& tri = mesh_->triangles[t];
  std::array<int, 6> dofs = {tri[0], tri[1], tri[2], -1, -1, -1};
  if (degree_ == 2) {
    dofs[3] = edge_dof(tri[0], tri[1]);
    dofs[4] = edge_dof(tri[1], tri[2]);
    dofs[5] = edge_dof(tri[0], tri[2]);
  }
  return dofs;
}

int FunctionSpace::edge_dof(int a, int b) const {
  require(degree_ == 2, ErrorCode::InvalidArgument,
          "edge dofs exist only for degree 2");
  if (a > b) std::swap(a, b);
  auto it = edge_index_.find({a, b});
  require(it != edge_index_.end(), ErrorCode::InvalidArgument,
          "no edge between the given vertices");
  return it->second;
}

AssembledForms assemble(const std::shared_ptr<const FunctionSpace>& space,
                        int threads) {
  require(space != nullptr, ErrorCode::InvalidArgument,
          "assemble: null space");
  const Mesh& mesh = space->mesh();
  int nt = mesh.triangle_count();
  int nd = space->dofs_per_cell();

  std::vector<DenseMatrix<double>> mloc(nt), kloc(nt);
  parallel_for(nt, threads, [&](int t) {
    const auto& tri = mesh.triangles[t];
    std::array<std::array<double, 2>, 3> xy = {
        mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
    mloc[t] = local_mass(xy, space->degree());
    kloc[t] = local_stiffness(xy, space->degree());
  });

  // Serial accumulation in triangle order keeps the result schedule-free.
  SparseBuilder bm(space->ndof(), space->ndof());
  SparseBuilder bk(space->ndof(), space->ndof());
  for (int t = 0; t < nt; ++t) {
    auto dofs = space->cell_dofs(t);
    for (int i = 0; i < nd; ++i) {
      for (int j = 0; j < nd; ++j) {
        bm.add(dofs[i], dofs[j], mloc[t](i, j));
        bk.add(dofs[i], dofs[j], kloc[t](i, j));
      }
    }
  }
  return {bm.finalize(), bk.finalize(), space};
}

std::vector<double> assemble_load(
    const FunctionSpace& space,
    const std::function<double(double, double, double)>& f, double t) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& q = triangle_quadrature_degree4();
  std::vector<double> load(space.ndof(), 0.0);
  int nd = space.dofs_per_cell();
  double phi[6];
  for (int tr = 0; tr < mesh.triangle_count(); ++tr) {
    const auto& tri = mesh.triangles[tr];
    const auto& a = mesh.vertices[tri[0]];
    const auto& b = mesh.vertices[tri[1]];
    const auto& c = mesh.vertices[tri[2]];
    double area = triangle_signed_area(mesh, tr);
    auto dofs = space.cell_dofs(tr);
    for (size_t k = 0; k < q.points.size(); ++k) {
      const auto& l = q.points[k];
      double x = l[0] * a[0] + l[1] * b[0] + l[2] * c[0];
      double y = l[0] * a[1] + l[1] * b[1] + l[2] * c[1];
      double w = area * q.weights[k] * f(x, y, t);
      shape_values(space.degree(), l, phi);
      for (int i = 0; i < nd; ++i) load[dofs[i]] += w * phi[i];
    }
  }
  return load;
}

SparseMatrix prolongation(const FunctionSpace& coarse,
                          const FunctionSpace& fine) {
  require(fine.degree() == coarse.degree(), ErrorCode::InvalidArgument,
          "prolongation: degrees differ");
  require(fine.mesh().parent == coarse.mesh_ptr(), ErrorCode::InvalidArgument,
          "prolongation: fine mesh is not the refinement of the coarse mesh");
  const Mesh& fmesh = fine.mesh();
  const Mesh& cmesh = coarse.mesh();
  int nd = fine.dofs_per_cell();

  SparseBuilder builder(fine.ndof(), coarse.ndof());
  std::vector<char> visited(fine.ndof(), 0);
  double phi[6];
  for (int t = 0; t < fmesh.triangle_count(); ++t) {
    int ct = fmesh.parent_triangle[t];
    const auto& ctri = cmesh.triangles[ct];
    const auto& a = cmesh.vertices[ctri[0]];
    const auto& b = cmesh.vertices[ctri[1]];
    const auto& c = cmesh.vertices[ctri[2]];
    double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    auto fdofs = fine.cell_dofs(t);
    auto cdofs = coarse.cell_dofs(ct);
    for (int ld = 0; ld < nd; ++ld) {
      int g = fdofs[ld];
      if (visited[g]) continue;
      visited[g] = 1;
      const auto& p = fine.dof_coords()[g];
      double l1 = ((p[0] - a[0]) * (c[1] - a[1]) -
                   (p[1] - a[1]) * (c[0] - a[0])) / det;
      double l2 = ((b[0] - a[0]) * (p[1] - a[1]) -
                   (b[1] - a[1]) * (p[0] - a[0])) / det;
      shape_values(coarse.degree(), {1.0 - l1 - l2, l1, l2}, phi);
      for (int lc = 0; lc < nd; ++lc)
        if (phi[lc] != 0.0) builder.add(g, cdofs[lc], phi[lc]);
    }
  }
  return builder.finalize();
}

AssembledForms apply_dirichlet(const AssembledForms& forms) {
  require(forms.space != nullptr, ErrorCode::InvalidArgument,
          "apply_dirichlet: forms carry no space");
  const FunctionSpace& space = *forms.space;
  int n = space.ndof();
  SparseBuilder bm(n, n), bk(n, n);
  auto strip = [&space](const SparseMatrix& src, SparseBuilder& dst) {
    for (int i = 0; i < src.rows(); ++i) {
      if (space.is_boundary_dof(i)) continue;
      for (int k = src.row_ptr()[i]; k < src.row_ptr()[i + 1]; ++k) {
        int j = src.col()[k];
        if (!space.is_boundary_dof(j)) dst.add(i, j, src.val()[k]);
      }
    }
  };
  strip(forms.M, bm);
  strip(forms.K, bk);
  for (int i : space.boundary_dofs()) bm.add(i, i, 1.0);
  return {bm.finalize(), bk.finalize(), forms.space};
}

std::vector<double> interpolate(
    const FunctionSpace& space,
    const std::function<double(double, double)>& f) {
  std::vector<double> u(space.ndof());
  for (int i = 0; i < space.ndof(); ++i)
    u[i] = f(space.dof_coords()[i][0], space.dof_coords()[i][1]);
  return u;
}

double l2_error(const FunctionSpace& space, std::span<const double> u,
                const std::function<double(double, double)>& exact) {
  require(static_cast<int>(u.size()) == space.ndof(),
          ErrorCode::DimensionMismatch, "l2_error: coefficient size mismatch");
  const Mesh& mesh = space.mesh();
  const QuadratureRule& q = triangle_quadrature_degree4();
  int nd = space.dofs_per_cell();
  double phi[6];
  double err2 = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto& a = mesh.vertices[tri[0]];
    const auto& b = mesh.vertices[tri[1]];
    const auto& c = mesh.vertices[tri[2]];
    double area = triangle_signed_area(mesh, t);
    auto dofs = space.cell_dofs(t);
    for (size_t k = 0; k < q.points.size(); ++k) {
      const auto& l = q.points[k];
      shape_values(space.degree(), l, phi);
      double uh = 0.0;
      for (int i = 0; i < nd; ++i) uh += u[dofs[i]] * phi[i];
      double x = l[0] * a[0] + l[1] * b[0] + l[2] * c[0];
      double y = l[0] * a[1] + l[1] * b[1] + l[2] * c[1];
      double d = uh - exact(x, y);
      err2 += area * q.weights[k] * d * d;
    }
  }
  return std::sqrt(err2);
}

}  // namespace stagemg
