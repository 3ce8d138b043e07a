#include "multigrid.hpp"

#include <cmath>

#include "fem.hpp"

namespace stagemg {

std::string smoother_name(SmootherKind kind) {
  switch (kind) {
    case SmootherKind::PointJacobi: return "point-jacobi";
    case SmootherKind::StageBlockJacobi: return "block-jacobi";
    case SmootherKind::StageAsm: return "asm-star";
  }
  fail(ErrorCode::Internal, "smoother_name: unknown kind");
}

SmootherKind smoother_from_name(const std::string& name) {
  if (name == "point-jacobi") return SmootherKind::PointJacobi;
  if (name == "block-jacobi") return SmootherKind::StageBlockJacobi;
  if (name == "asm-star") return SmootherKind::StageAsm;
  fail(ErrorCode::InvalidArgument, "unknown smoother '" + name + "'");
}

void validate(const MgConfig& cfg) {
  require(cfg.nu_pre >= 0 && cfg.nu_post >= 0, ErrorCode::InvalidArgument,
          "smoothing counts must be nonnegative");
  require(cfg.nu_pre + cfg.nu_post >= 1, ErrorCode::InvalidArgument,
          "at least one smoothing sweep per level is required");
  require(cfg.gamma == 1 || cfg.gamma == 2, ErrorCode::InvalidArgument,
          "cycle index must be 1 or 2");
  require(cfg.omega > 0.0 && cfg.omega <= 1.0, ErrorCode::InvalidArgument,
          "damping must lie in (0, 1]");
}

namespace {

std::unique_ptr<StagePreconditioner> make_smoother(const StageSystem& sys,
                                                   SmootherKind kind,
                                                   const PatchDecomposition& pd,
                                                   int threads) {
  switch (kind) {
    case SmootherKind::PointJacobi: return point_jacobi(sys);
    case SmootherKind::StageBlockJacobi: return stage_block_jacobi(sys);
    case SmootherKind::StageAsm: return stage_asm(sys, pd, threads);
  }
  fail(ErrorCode::Internal, "make_smoother: unknown kind");
}

}  // namespace

MgHierarchy build_hierarchy(int coarse_n, int levels, int degree,
                            const ButcherTableau& tableau, double dt,
                            SmootherKind smoother, int threads,
                            int coarse_cap) {
  require(coarse_n >= 1, ErrorCode::InvalidArgument,
          "base grid size must be positive");
  require(levels >= 1, ErrorCode::InvalidArgument,
          "hierarchy needs at least one level");
  require(dt > 0.0, ErrorCode::InvalidArgument, "time step must be positive");

  MgHierarchy h;
  h.tableau = tableau;
  h.dt = dt;
  h.smoother = smoother;
  h.levels.resize(levels);

  auto mesh = unit_square_mesh(coarse_n);
  for (int l = 0; l < levels; ++l) {
    MgLevel& lev = h.levels[l];
    lev.space = std::make_shared<const FunctionSpace>(mesh, degree);
    AssembledForms forms = apply_dirichlet(assemble(lev.space, threads));
    lev.sys = make_stage_system(forms.M, forms.K, tableau, dt);
    if (smoother == SmootherKind::StageAsm)
      lev.patches = vertex_star_patches(lev.space);
    lev.prec = make_smoother(lev.sys, smoother, lev.patches, threads);
    if (l + 1 < levels) {
      auto fine_mesh = refine(mesh);
      FunctionSpace fine_space(fine_mesh, degree);
      lev.P = prolongation(*lev.space, fine_space);
      lev.has_p = true;
      mesh = fine_mesh;
    }
  }

  const StageSystem& bottom = h.levels[0].sys;
  require(bottom.total_dim() <= coarse_cap, ErrorCode::InvalidArgument,
          "coarsest stage operator exceeds the dense factorization cap");
  h.levels[0].coarse_lu =
      lu_factor(densify(materialize(bottom, coarse_cap)));
  h.levels[0].has_lu = true;
  return h;
}

std::vector<double> stage_prolong(const SparseMatrix& P,
                                  std::span<const double> coarse, int s) {
  require(s >= 1 && static_cast<int>(coarse.size()) == s * P.cols(),
          ErrorCode::DimensionMismatch, "stage_prolong: size mismatch");
  std::vector<double> fine(static_cast<size_t>(s) * P.rows());
  for (int i = 0; i < s; ++i)
    spmv(P, coarse.subspan(static_cast<size_t>(i) * P.cols(), P.cols()),
         std::span<double>(fine).subspan(static_cast<size_t>(i) * P.rows(),
                                         P.rows()));
  return fine;
}

std::vector<double> stage_restrict(const SparseMatrix& P,
                                   std::span<const double> fine, int s) {
  require(s >= 1 && static_cast<int>(fine.size()) == s * P.rows(),
          ErrorCode::DimensionMismatch, "stage_restrict: size mismatch");
  std::vector<double> coarse(static_cast<size_t>(s) * P.cols());
  for (int i = 0; i < s; ++i)
    spmv_transpose(P,
                   fine.subspan(static_cast<size_t>(i) * P.rows(), P.rows()),
                   std::span<double>(coarse).subspan(
                       static_cast<size_t>(i) * P.cols(), P.cols()));
  return coarse;
}

namespace {

/// Shared recursion over an explicit level-pointer stack so the dedicated
/// two-level entry point and a two-level hierarchy run identical code.
std::vector<double> cycle_impl(const std::vector<const MgLevel*>& levels,
                               const DenseLu<double>& bottom_lu,
                               const MgConfig& cfg, int idx,
                               std::span<const double> x,
                               std::span<const double> b) {
  const MgLevel& lev = *levels[idx];
  const int n = lev.sys.total_dim();
  require(static_cast<int>(x.size()) == n && static_cast<int>(b.size()) == n,
          ErrorCode::DimensionMismatch, "cycle: vector size mismatch");

  if (idx == 0) {
    // Exact bottom solve; the incoming iterate is irrelevant here.
    return lu_solve(bottom_lu, std::vector<double>(b.begin(), b.end()));
  }

  std::vector<double> xv =
      smooth_apply(*lev.prec, lev.sys, x, b, cfg.nu_pre, cfg.omega);

  const MgLevel& below = *levels[idx - 1];
  require(below.has_p, ErrorCode::Internal, "cycle: missing transfer");
  const int s = lev.sys.stages();

  std::vector<double> r = apply_stage_operator(lev.sys, xv);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  std::vector<double> rc = stage_restrict(below.P, r, s);

  std::vector<double> ec(rc.size(), 0.0);
  for (int g = 0; g < cfg.gamma; ++g)
    ec = cycle_impl(levels, bottom_lu, cfg, idx - 1, ec, rc);

  std::vector<double> corr = stage_prolong(below.P, ec, s);
  for (int i = 0; i < n; ++i) xv[i] += corr[i];

  return smooth_apply(*lev.prec, lev.sys, xv, b, cfg.nu_post, cfg.omega);
}

}  // namespace

std::vector<double> cycle(const MgHierarchy& h, const MgConfig& cfg,
                          int level_index, std::span<const double> x,
                          std::span<const double> b) {
  validate(cfg);
  require(level_index >= 0 &&
              level_index < static_cast<int>(h.levels.size()),
          ErrorCode::InvalidArgument, "cycle: level index out of range");
  require(h.levels[0].has_lu, ErrorCode::Internal,
          "cycle: coarsest level lacks a factorization");
  std::vector<const MgLevel*> ptrs;
  ptrs.reserve(level_index + 1);
  for (int l = 0; l <= level_index; ++l) ptrs.push_back(&h.levels[l]);
  return cycle_impl(ptrs, h.levels[0].coarse_lu, cfg, level_index, x, b);
}

std::vector<double> two_grid_step(const MgLevel& fine, const MgLevel& coarse,
                                  const MgConfig& cfg,
                                  std::span<const double> x,
                                  std::span<const double> b) {
  validate(cfg);
  std::vector<const MgLevel*> ptrs{&coarse, &fine};
  if (coarse.has_lu)
    return cycle_impl(ptrs, coarse.coarse_lu, cfg, 1, x, b);
  DenseLu<double> local =
      lu_factor(densify(materialize(coarse.sys, 20000)));
  return cycle_impl(ptrs, local, cfg, 1, x, b);
}

StationaryStats mg_stationary_solve(const MgHierarchy& h, const MgConfig& cfg,
                                    std::span<double> x,
                                    std::span<const double> b, double tol,
                                    int max_iter) {
  validate(cfg);
  require(tol > 0.0 && max_iter >= 0, ErrorCode::InvalidArgument,
          "mg_stationary_solve: bad control parameters");
  const MgLevel& top = h.finest();
  const int n = top.sys.total_dim();
  require(static_cast<int>(x.size()) == n && static_cast<int>(b.size()) == n,
          ErrorCode::DimensionMismatch, "mg_stationary_solve: size mismatch");

  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);

  StationaryStats st;
  auto rel_residual = [&]() {
    std::vector<double> r = apply_stage_operator(top.sys, x);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = b[i] - r[i];
      s += d * d;
    }
    double nrm = std::sqrt(s);
    return bnorm > 0.0 ? nrm / bnorm : nrm;
  };

  st.rel_residual = rel_residual();
  st.history.push_back(st.rel_residual);
  if (st.rel_residual <= tol) {
    st.converged = true;
    return st;
  }
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> next = cycle(h, cfg, h.finest_index(), x, b);
    std::copy(next.begin(), next.end(), x.begin());
    st.iterations = it + 1;
    st.rel_residual = rel_residual();
    st.history.push_back(st.rel_residual);
    if (st.rel_residual <= tol) {
      st.converged = true;
      return st;
    }
  }
  return st;
}

MgSolveResult mg_preconditioned_gmres(const MgHierarchy& h,
                                      const MgConfig& cfg,
                                      std::span<const double> b, double tol,
                                      int max_iter) {
  validate(cfg);
  require(tol > 0.0 && max_iter >= 1, ErrorCode::InvalidArgument,
          "mg_preconditioned_gmres: bad control parameters");
  const MgLevel& top = h.finest();
  const int n = top.sys.total_dim();
  require(static_cast<int>(b.size()) == n, ErrorCode::DimensionMismatch,
          "mg_preconditioned_gmres: rhs size mismatch");
  const int top_idx = h.finest_index();

  std::function<void(std::span<const double>, std::span<double>)> apply_a =
      [&](std::span<const double> in, std::span<double> out) {
        std::vector<double> y = apply_stage_operator(top.sys, in);
        std::copy(y.begin(), y.end(), out.begin());
      };
  std::vector<double> zero(n, 0.0);
  std::function<void(std::span<const double>, std::span<double>)> apply_m =
      [&](std::span<const double> in, std::span<double> out) {
        std::vector<double> y = cycle(h, cfg, top_idx, zero, in);
        std::copy(y.begin(), y.end(), out.begin());
      };

  MgSolveResult res;
  res.x.assign(n, 0.0);

  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);

  auto true_rel = [&]() {
    std::vector<double> r = apply_stage_operator(top.sys, res.x);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = b[i] - r[i];
      s += d * d;
    }
    double nrm = std::sqrt(s);
    return bnorm > 0.0 ? nrm / bnorm : nrm;
  };

  // The iteration controls the preconditioned residual; tighten it until
  // the unpreconditioned one is below tol as well.
  double inner = tol;
  for (int round = 0; round < 4; ++round) {
    GmresStats st = gmres<double>(n, apply_a, apply_m, b, res.x, inner,
                                  max_iter);
    if (round == 0) {
      res.stats = st;
    } else {
      res.stats.iterations += st.iterations;
      res.stats.converged = st.converged;
      res.stats.residual_history.insert(res.stats.residual_history.end(),
                                        st.residual_history.begin(),
                                        st.residual_history.end());
    }
    res.true_rel_residual = true_rel();
    if (!st.converged || res.true_rel_residual <= tol) break;
    inner *= 0.01;
  }
  return res;
}

}  // namespace stagemg
