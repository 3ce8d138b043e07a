#include "smoothers.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "parallel.hpp"

namespace stagemg {

PatchDecomposition vertex_star_patches(
    const std::shared_ptr<const FunctionSpace>& space) {
  require(space != nullptr, ErrorCode::InvalidArgument,
          "vertex_star_patches: null space");
  const Mesh& mesh = space->mesh();

  // Interior edges are those shared by two triangles.
  std::map<std::array<int, 2>, int> edge_use;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_use[{a, b}];
    }
  }

  PatchDecomposition pd;
  pd.space = space;
  pd.kind = PatchKind::VertexStar;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    std::vector<int> patch;
    if (!space->is_boundary_dof(v)) patch.push_back(v);
    if (space->degree() == 2) {
      for (const auto& [edge, uses] : edge_use) {
        if (uses != 2) continue;
        if (edge[0] != v && edge[1] != v) continue;
        int d = space->edge_dof(edge[0], edge[1]);
        if (!space->is_boundary_dof(d)) patch.push_back(d);
      }
    }
    if (patch.empty()) continue;
    std::sort(patch.begin(), patch.end());
    pd.patches.push_back(std::move(patch));
  }
  return pd;
}

PatchDecomposition single_dof_patches(
    const std::shared_ptr<const FunctionSpace>& space) {
  require(space != nullptr, ErrorCode::InvalidArgument,
          "single_dof_patches: null space");
  PatchDecomposition pd;
  pd.space = space;
  pd.kind = PatchKind::SingleDof;
  for (int d = 0; d < space->ndof(); ++d)
    if (!space->is_boundary_dof(d)) pd.patches.push_back({d});
  return pd;
}

void export_patches(const PatchDecomposition& pd, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, ErrorCode::Io, "export_patches: cannot open " + path);
  for (size_t p = 0; p < pd.patches.size(); ++p) {
    std::fprintf(f, "%zu:", p);
    for (int d : pd.patches[p]) std::fprintf(f, " %d", d);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

namespace {

class PointJacobi final : public StagePreconditioner {
 public:
  explicit PointJacobi(const StageSystem& sys) : n_(sys.space_dim()) {
    total_dim_ = sys.total_dim();
    int s = sys.stages();
    diag_.resize(static_cast<size_t>(s) * n_);
    for (int i = 0; i < s; ++i)
      for (int p = 0; p < n_; ++p) {
        double d = sys.M.at(p, p) + sys.dt * sys.tableau.A(i, i) * sys.K.at(p, p);
        require(d != 0.0, ErrorCode::SingularMatrix,
                "point_jacobi: zero diagonal at stage " + std::to_string(i) +
                    ", dof " + std::to_string(p));
        diag_[static_cast<size_t>(i) * n_ + p] = d;
      }
  }

  void apply_inverse(std::span<const double> r,
                     std::span<double> out) const override {
    require(static_cast<int>(r.size()) == total_dim_ &&
                static_cast<int>(out.size()) == total_dim_,
            ErrorCode::DimensionMismatch, "point_jacobi: length mismatch");
    for (int k = 0; k < total_dim_; ++k) out[k] = r[k] / diag_[k];
  }

  std::string kind() const override { return "point-jacobi"; }
  double default_omega() const override { return 2.0 / 3.0; }

 private:
  int n_;
  std::vector<double> diag_;
};

class StageBlockJacobi final : public StagePreconditioner {
 public:
  explicit StageBlockJacobi(const StageSystem& sys)
      : s_(sys.stages()), n_(sys.space_dim()) {
    total_dim_ = sys.total_dim();
    blocks_.reserve(n_);
    for (int p = 0; p < n_; ++p) {
      double m = sys.M.at(p, p), k = sys.K.at(p, p);
      DenseMatrix<double> block(s_, s_);
      for (int i = 0; i < s_; ++i) {
        block(i, i) = m;
        for (int j = 0; j < s_; ++j)
          block(i, j) += sys.dt * k * sys.tableau.A(i, j);
      }
      try {
        blocks_.push_back(lu_factor(std::move(block)));
      } catch (const Error&) {
        fail(ErrorCode::SingularMatrix,
             "stage_block_jacobi: singular stage block at dof " +
                 std::to_string(p));
      }
    }
  }

  void apply_inverse(std::span<const double> r,
                     std::span<double> out) const override {
    require(static_cast<int>(r.size()) == total_dim_ &&
                static_cast<int>(out.size()) == total_dim_,
            ErrorCode::DimensionMismatch,
            "stage_block_jacobi: length mismatch");
    std::vector<double> local(s_);
    for (int p = 0; p < n_; ++p) {
      for (int i = 0; i < s_; ++i)
        local[i] = r[static_cast<size_t>(i) * n_ + p];
      auto sol = lu_solve(blocks_[p], local);
      for (int i = 0; i < s_; ++i)
        out[static_cast<size_t>(i) * n_ + p] = sol[i];
    }
  }

  std::string kind() const override { return "stage-block-jacobi"; }
  double default_omega() const override { return 2.0 / 3.0; }

 private:
  int s_, n_;
  std::vector<DenseLu<double>> blocks_;
};

class StageAsm final : public StagePreconditioner {
 public:
  StageAsm(const StageSystem& sys, const PatchDecomposition& pd, int threads)
      : s_(sys.stages()), n_(sys.space_dim()), patches_(pd.patches) {
    require(pd.space != nullptr && pd.space->ndof() == n_,
            ErrorCode::DimensionMismatch,
            "stage_asm: patch decomposition does not match the system");
    total_dim_ = sys.total_dim();
    boundary_.assign(n_, 0);
    for (int d = 0; d < n_; ++d)
      if (pd.space->is_boundary_dof(d)) boundary_[d] = 1;
    for (const auto& patch : patches_)
      for (int d : patch)
        require(d >= 0 && d < n_ && !boundary_[d], ErrorCode::InvalidArgument,
                "stage_asm: patch dof out of range or on the boundary");

    int np = static_cast<int>(patches_.size());
    factors_.resize(np);
    std::vector<std::string> failure(np);
    parallel_for(np, threads, [&](int pi) {
      const auto& patch = patches_[pi];
      int p = static_cast<int>(patch.size());
      DenseMatrix<double> c(s_ * p, s_ * p);
      for (int i = 0; i < s_; ++i)
        for (int j = 0; j < s_; ++j) {
          double w = sys.dt * sys.tableau.A(i, j);
          for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
              double v = w * sys.K.at(patch[a], patch[b]);
              if (i == j) v += sys.M.at(patch[a], patch[b]);
              c(i * p + a, j * p + b) = v;
            }
        }
      try {
        factors_[pi] = lu_factor(std::move(c));
      } catch (const Error&) {
        failure[pi] = "stage_asm: singular patch block at patch " +
                      std::to_string(pi);
      }
    });
    for (const auto& msg : failure)
      if (!msg.empty()) fail(ErrorCode::SingularMatrix, msg);
  }

  void apply_inverse(std::span<const double> r,
                     std::span<double> out) const override {
    require(static_cast<int>(r.size()) == total_dim_ &&
                static_cast<int>(out.size()) == total_dim_,
            ErrorCode::DimensionMismatch, "stage_asm: length mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    // Boundary dofs sit in no patch; the identity part keeps them inert.
    for (int i = 0; i < s_; ++i)
      for (int d = 0; d < n_; ++d)
        if (boundary_[d])
          out[static_cast<size_t>(i) * n_ + d] =
              r[static_cast<size_t>(i) * n_ + d];
    std::vector<double> local;
    for (size_t pi = 0; pi < patches_.size(); ++pi) {
      const auto& patch = patches_[pi];
      int p = static_cast<int>(patch.size());
      local.assign(static_cast<size_t>(s_) * p, 0.0);
      for (int i = 0; i < s_; ++i)
        for (int a = 0; a < p; ++a)
          local[static_cast<size_t>(i) * p + a] =
              r[static_cast<size_t>(i) * n_ + patch[a]];
      auto sol = lu_solve(factors_[pi], local);
      for (int i = 0; i < s_; ++i)
        for (int a = 0; a < p; ++a)
          out[static_cast<size_t>(i) * n_ + patch[a]] +=
              sol[static_cast<size_t>(i) * p + a];
    }
  }

  std::string kind() const override { return "stage-asm"; }
  double default_omega() const override { return 1.0; }

 private:
  int s_, n_;
  std::vector<std::vector<int>> patches_;
  std::vector<char> boundary_;
  std::vector<DenseLu<double>> factors_;
};

}  // namespace

std::unique_ptr<StagePreconditioner> point_jacobi(const StageSystem& sys) {
  return std::make_unique<PointJacobi>(sys);
}

std::unique_ptr<StagePreconditioner> stage_block_jacobi(
    const StageSystem& sys) {
  return std::make_unique<StageBlockJacobi>(sys);
}

std::unique_ptr<StagePreconditioner> stage_asm(const StageSystem& sys,
                                               const PatchDecomposition& pd,
                                               int threads) {
  return std::make_unique<StageAsm>(sys, pd, threads);
}

std::vector<double> smooth_apply(const StagePreconditioner& prec,
                                 const StageSystem& sys,
                                 std::span<const double> x,
                                 std::span<const double> b, int nu,
                                 double omega) {
  require(static_cast<int>(x.size()) == sys.total_dim() &&
              static_cast<int>(b.size()) == sys.total_dim(),
          ErrorCode::DimensionMismatch, "smooth_apply: length mismatch");
  require(nu >= 0, ErrorCode::InvalidArgument,
          "smooth_apply: sweep count must be nonnegative");
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> corr(cur.size());
  for (int sweep = 0; sweep < nu; ++sweep) {
    auto residual = apply_stage_operator(sys, cur);
    for (size_t i = 0; i < residual.size(); ++i) residual[i] -= b[i];
    prec.apply_inverse(residual, corr);
    for (size_t i = 0; i < cur.size(); ++i) cur[i] -= omega * corr[i];
  }
  return cur;
}

DenseMatrix<cdouble> pencil_block_jacobi_inverse(const ComplexPencil& pencil,
                                                 const FunctionSpace& space) {
  int n = pencil.M.rows();
  require(space.ndof() == n, ErrorCode::DimensionMismatch,
          "pencil_block_jacobi_inverse: space does not match the pencil");
  DenseMatrix<cdouble> w_inv(n, n);
  for (int p = 0; p < n; ++p) {
    cdouble d = pencil.M.at(p, p) + pencil.z * pencil.K.at(p, p);
    require(std::abs(d) != 0.0, ErrorCode::SingularMatrix,
            "pencil_block_jacobi_inverse: zero diagonal at dof " +
                std::to_string(p));
    w_inv(p, p) = 1.0 / d;
  }
  return w_inv;
}

DenseMatrix<cdouble> pencil_asm_inverse(const ComplexPencil& pencil,
                                        const PatchDecomposition& pd) {
  int n = pencil.M.rows();
  require(pd.space != nullptr && pd.space->ndof() == n,
          ErrorCode::DimensionMismatch,
          "pencil_asm_inverse: patches do not match the pencil");
  DenseMatrix<cdouble> w_inv(n, n);
  for (int d = 0; d < n; ++d)
    if (pd.space->is_boundary_dof(d)) w_inv(d, d) = 1.0;
  for (size_t pi = 0; pi < pd.patches.size(); ++pi) {
    const auto& patch = pd.patches[pi];
    int p = static_cast<int>(patch.size());
    DenseMatrix<cdouble> c(p, p);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        c(a, b) = pencil.M.at(patch[a], patch[b]) +
                  pencil.z * pencil.K.at(patch[a], patch[b]);
    DenseMatrix<cdouble> cinv;
    try {
      cinv = lu_inverse(lu_factor(std::move(c)));
    } catch (const Error&) {
      fail(ErrorCode::SingularMatrix,
           "pencil_asm_inverse: singular patch block at patch " +
               std::to_string(pi));
    }
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) w_inv(patch[a], patch[b]) += cinv(a, b);
  }
  return w_inv;
}

}  // namespace stagemg
