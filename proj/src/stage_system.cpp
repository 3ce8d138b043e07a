#include "stage_system.hpp"

#include "parallel.hpp"

namespace stagemg {

StageSystem make_stage_system(const SparseMatrix& M, const SparseMatrix& K,
                              const ButcherTableau& tableau, double dt) {
  require(M.rows() == M.cols() && K.rows() == K.cols() &&
              M.rows() == K.rows(),
          ErrorCode::DimensionMismatch,
          "stage system needs square mass and stiffness of equal size");
  require(dt > 0.0, ErrorCode::InvalidArgument,
          "stage system needs a positive time step");
  require(tableau.s >= 1, ErrorCode::InvalidArgument,
          "stage system needs a nonempty tableau");
  return {M, K, tableau, dt};
}

std::vector<double> apply_stage_operator(const StageSystem& sys,
                                         std::span<const double> x,
                                         int threads) {
  int s = sys.stages(), n = sys.space_dim();
  require(static_cast<int>(x.size()) == s * n, ErrorCode::DimensionMismatch,
          "apply_stage_operator: vector length is not stages * dofs");
  std::vector<double> mx(static_cast<size_t>(s) * n);
  std::vector<double> kx(static_cast<size_t>(s) * n);
  parallel_for(s, threads, [&](int i) {
    std::span<const double> xi = x.subspan(static_cast<size_t>(i) * n, n);
    spmv<double>(sys.M, xi, std::span<double>(mx).subspan(
                                static_cast<size_t>(i) * n, n));
    spmv<double>(sys.K, xi, std::span<double>(kx).subspan(
                                static_cast<size_t>(i) * n, n));
  });
  std::vector<double> y(static_cast<size_t>(s) * n);
  for (int i = 0; i < s; ++i) {
    double* yi = y.data() + static_cast<size_t>(i) * n;
    const double* mi = mx.data() + static_cast<size_t>(i) * n;
    for (int p = 0; p < n; ++p) yi[p] = mi[p];
    for (int j = 0; j < s; ++j) {
      double w = sys.dt * sys.tableau.A(i, j);
      if (w == 0.0) continue;
      const double* kj = kx.data() + static_cast<size_t>(j) * n;
      for (int p = 0; p < n; ++p) yi[p] += w * kj[p];
    }
  }
  return y;
}

SparseMatrix materialize(const StageSystem& sys, int cap) {
  require(sys.total_dim() <= cap, ErrorCode::InvalidArgument,
          "materialize: coupled dimension " + std::to_string(sys.total_dim()) +
              " exceeds cap " + std::to_string(cap));
  int s = sys.stages();
  auto eye = DenseMatrix<double>::identity(s);
  DenseMatrix<double> dt_a = sys.tableau.A;
  for (auto& v : dt_a.data()) v *= sys.dt;
  return sparse_add(1.0, kron_sparse(eye, sys.M), 1.0,
                    kron_sparse(dt_a, sys.K));
}

std::vector<double> stage_rhs(const ForcingSpec& fs, double t_n,
                              const ButcherTableau& tableau, double dt) {
  require(fs.space != nullptr, ErrorCode::InvalidArgument,
          "stage_rhs: forcing has no space");
  const FunctionSpace& space = *fs.space;
  int n = space.ndof();
  std::vector<double> rhs(static_cast<size_t>(tableau.s) * n);
  for (int i = 0; i < tableau.s; ++i) {
    auto load = assemble_load(space, fs.f, t_n + tableau.c[i] * dt);
    for (int p = 0; p < n; ++p)
      rhs[static_cast<size_t>(i) * n + p] =
          space.is_boundary_dof(p) ? 0.0 : load[p];
  }
  return rhs;
}

std::vector<double> rk_update(std::span<const double> u_n,
                              std::span<const double> k,
                              const ButcherTableau& tableau, double dt) {
  int n = static_cast<int>(u_n.size());
  require(static_cast<int>(k.size()) == tableau.s * n,
          ErrorCode::DimensionMismatch,
          "rk_update: stage stack length is not stages * dofs");
  std::vector<double> u(u_n.begin(), u_n.end());
  for (int i = 0; i < tableau.s; ++i) {
    double w = dt * tableau.b[i];
    const double* ki = k.data() + static_cast<size_t>(i) * n;
    for (int p = 0; p < n; ++p) u[p] += w * ki[p];
  }
  return u;
}

TransformedStageSystem butcher_transform(const StageSystem& sys,
                                         std::span<const double> rhs) {
  require(static_cast<int>(rhs.size()) == sys.total_dim(),
          ErrorCode::DimensionMismatch,
          "butcher_transform: rhs length is not stages * dofs");
  int s = sys.stages(), n = sys.space_dim();
  DenseMatrix<double> a_inv = lu_inverse(lu_factor(sys.tableau.A));

  TransformedStageSystem out;
  out.a_inv = a_inv;
  out.rhs.resize(rhs.size());
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      double w = a_inv(i, j);
      if (w == 0.0) continue;
      for (int p = 0; p < n; ++p)
        out.rhs[static_cast<size_t>(i) * n + p] +=
            w * rhs[static_cast<size_t>(j) * n + p];
    }

  SparseMatrix m = sys.M, k = sys.K;
  double dt = sys.dt;
  out.apply = [m, k, a_inv, s, n,
               dt](std::span<const double> x) -> std::vector<double> {
    require(static_cast<int>(x.size()) == s * n, ErrorCode::DimensionMismatch,
            "transformed stage operator: vector length mismatch");
    std::vector<double> mx(static_cast<size_t>(s) * n);
    std::vector<double> y(static_cast<size_t>(s) * n);
    for (int j = 0; j < s; ++j)
      spmv<double>(m, x.subspan(static_cast<size_t>(j) * n, n),
                   std::span<double>(mx).subspan(static_cast<size_t>(j) * n,
                                                 n));
    for (int i = 0; i < s; ++i) {
      double* yi = y.data() + static_cast<size_t>(i) * n;
      for (int j = 0; j < s; ++j) {
        double w = a_inv(i, j);
        if (w == 0.0) continue;
        const double* mj = mx.data() + static_cast<size_t>(j) * n;
        for (int p = 0; p < n; ++p) yi[p] += w * mj[p];
      }
      std::vector<double> kx(n);
      spmv<double>(k, x.subspan(static_cast<size_t>(i) * n, n),
                   std::span<double>(kx));
      for (int p = 0; p < n; ++p) yi[p] += dt * kx[p];
    }
    return y;
  };
  return out;
}

ComplexPencil characteristic_pencil(const SparseMatrix& M,
                                    const SparseMatrix& K, cdouble lambda,
                                    double dt) {
  require(M.rows() == M.cols() && K.rows() == K.cols() &&
              M.rows() == K.rows(),
          ErrorCode::DimensionMismatch,
          "characteristic_pencil: mass and stiffness sizes differ");
  return {M, K, lambda * dt};
}

std::vector<cdouble> apply_pencil(const ComplexPencil& pencil,
                                  std::span<const cdouble> x) {
  require(static_cast<int>(x.size()) == pencil.M.rows(),
          ErrorCode::DimensionMismatch, "apply_pencil: vector length mismatch");
  int n = pencil.M.rows();
  std::vector<cdouble> mx(n), kx(n);
  spmv<cdouble>(pencil.M, x, mx);
  spmv<cdouble>(pencil.K, x, kx);
  for (int i = 0; i < n; ++i) mx[i] += pencil.z * kx[i];
  return mx;
}

DenseMatrix<cdouble> densify_pencil(const ComplexPencil& pencil) {
  int n = pencil.M.rows();
  DenseMatrix<cdouble> d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = pencil.M.row_ptr()[i]; k < pencil.M.row_ptr()[i + 1]; ++k)
      d(i, pencil.M.col()[k]) += pencil.M.val()[k];
    for (int k = pencil.K.row_ptr()[i]; k < pencil.K.row_ptr()[i + 1]; ++k)
      d(i, pencil.K.col()[k]) += pencil.z * pencil.K.val()[k];
  }
  return d;
}

}  // namespace stagemg
