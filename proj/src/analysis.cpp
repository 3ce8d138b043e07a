#include "analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "eig.hpp"
#include "parallel.hpp"
#include "stage_system.hpp"

namespace stagemg {

DenseMatrix<double> densify_operator(
    const std::function<std::vector<double>(std::span<const double>)>& op,
    int dim) {
  require(dim >= 0, ErrorCode::InvalidArgument,
          "densify_operator: negative dimension");
  require(dim <= 3000, ErrorCode::InvalidArgument,
          "densify_operator: dimension exceeds the densification cap");
  DenseMatrix<double> a(dim, dim);
  std::vector<double> e(dim, 0.0);
  for (int j = 0; j < dim; ++j) {
    e[j] = 1.0;
    std::vector<double> col = op(e);
    require(static_cast<int>(col.size()) == dim, ErrorCode::DimensionMismatch,
            "densify_operator: operator changed the dimension");
    for (int i = 0; i < dim; ++i) a(i, j) = col[i];
    e[j] = 0.0;
  }
  return a;
}

BlockGrid characteristic_transform(const DenseMatrix<double>& Y,
                                   const DenseMatrix<cdouble>& X) {
  require(Y.rows() == Y.cols(), ErrorCode::InvalidArgument,
          "characteristic_transform: operator must be square");
  require(X.rows() == X.cols() && X.rows() >= 1, ErrorCode::InvalidArgument,
          "characteristic_transform: eigenvector matrix must be square");
  int s = X.rows();
  require(Y.rows() % s == 0, ErrorCode::DimensionMismatch,
          "characteristic_transform: operator size is not a stage multiple");
  int n = Y.rows() / s;

  DenseMatrix<cdouble> Xinv = lu_inverse(lu_factor(X));

  // Right factor: YR[a][j] = sum_b X(b, j) Y[a][b], all blocks N x N.
  std::vector<DenseMatrix<cdouble>> yr(static_cast<size_t>(s) * s);
  for (int a = 0; a < s; ++a)
    for (int j = 0; j < s; ++j) {
      DenseMatrix<cdouble> acc(n, n);
      for (int b = 0; b < s; ++b) {
        cdouble w = X(b, j);
        if (w == cdouble(0)) continue;
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c)
            acc(r, c) += w * Y(a * n + r, b * n + c);
      }
      yr[a * s + j] = std::move(acc);
    }

  BlockGrid out;
  out.s = s;
  out.n = n;
  out.blocks.resize(static_cast<size_t>(s) * s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      DenseMatrix<cdouble> acc(n, n);
      for (int a = 0; a < s; ++a) {
        cdouble w = Xinv(i, a);
        if (w == cdouble(0)) continue;
        const DenseMatrix<cdouble>& blk = yr[a * s + j];
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) acc(r, c) += w * blk(r, c);
      }
      out.blocks[i * s + j] = std::move(acc);
    }
  return out;
}

DenseMatrix<double> characteristic_reassemble(const BlockGrid& Z,
                                              const DenseMatrix<cdouble>& X) {
  int s = Z.s, n = Z.n;
  require(X.rows() == s && X.cols() == s, ErrorCode::DimensionMismatch,
          "characteristic_reassemble: eigenvector matrix mismatch");
  DenseMatrix<cdouble> Xinv = lu_inverse(lu_factor(X));

  DenseMatrix<double> out(s * n, s * n);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      DenseMatrix<cdouble> acc(n, n);
      for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
          cdouble w = X(i, a) * Xinv(b, j);
          if (w == cdouble(0)) continue;
          const DenseMatrix<cdouble>& blk = Z.block(a, b);
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) acc(r, c) += w * blk(r, c);
        }
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          out(i * n + r, j * n + c) = acc(r, c).real();
    }
  return out;
}

MonolithicityReport monolithicity_check(const DenseMatrix<double>& Y,
                                        const DenseMatrix<cdouble>& X,
                                        double tol) {
  require(tol > 0.0, ErrorCode::InvalidArgument,
          "monolithicity_check: tolerance must be positive");
  BlockGrid grid = characteristic_transform(Y, X);
  double scale = max_abs(Y);

  MonolithicityReport rep;
  rep.tol = tol;
  double off = 0.0;
  for (int i = 0; i < grid.s; ++i)
    for (int j = 0; j < grid.s; ++j)
      if (i != j) off = std::max(off, max_abs(grid.block(i, j)));
  rep.max_offdiag = scale > 0.0 ? off / scale : off;
  rep.is_monolithic = rep.max_offdiag <= tol;
  rep.blocks.reserve(grid.s);
  for (int i = 0; i < grid.s; ++i)
    rep.blocks.push_back(std::move(grid.block(i, i)));
  return rep;
}

namespace {

struct CharLevel {
  DenseMatrix<cdouble> B;  // dense pencil M + lambda dt K
  DenseMatrix<cdouble> S;  // smoothing iteration I - omega W^{-1} B
  const SparseMatrix* P = nullptr;
};

CharLevel make_char_level(const MgLevel& lev, SmootherKind kind, double dt,
                          double omega, cdouble lambda) {
  ComplexPencil pencil =
      characteristic_pencil(lev.sys.M, lev.sys.K, lambda, dt);
  CharLevel cl;
  cl.B = densify_pencil(pencil);

  DenseMatrix<cdouble> winv;
  switch (kind) {
    case SmootherKind::StageBlockJacobi:
      winv = pencil_block_jacobi_inverse(pencil, *lev.space);
      break;
    case SmootherKind::StageAsm: {
      if (!lev.patches.patches.empty()) {
        winv = pencil_asm_inverse(pencil, lev.patches);
      } else {
        winv = pencil_asm_inverse(pencil, vertex_star_patches(lev.space));
      }
      break;
    }
    case SmootherKind::PointJacobi:
      fail(ErrorCode::InvalidArgument,
           "the pointwise Jacobi smoother has no single-stage surrogate");
  }

  int n = cl.B.rows();
  cl.S = mat_add(DenseMatrix<cdouble>::identity(n), matmul(winv, cl.B),
                 cdouble(1), cdouble(-omega));
  cl.P = lev.has_p ? &lev.P : nullptr;
  return cl;
}

DenseMatrix<cdouble> char_cycle_impl(const std::vector<CharLevel>& lv,
                                     const MgConfig& cfg) {
  // T_0 = 0: the bottom solve is exact.
  DenseMatrix<cdouble> T(lv[0].B.rows(), lv[0].B.rows());
  for (size_t l = 1; l < lv.size(); ++l) {
    const CharLevel& coarse = lv[l - 1];
    const CharLevel& fine = lv[l];
    require(coarse.P != nullptr, ErrorCode::Internal,
            "characteristic cycle: missing transfer");
    int nf = fine.B.rows();
    int nc = coarse.B.rows();

    DenseMatrix<cdouble> binv_c = lu_inverse(lu_factor(coarse.B));
    DenseMatrix<cdouble> solve_c =
        mat_add(DenseMatrix<cdouble>::identity(nc), matpow(T, cfg.gamma),
                cdouble(1), cdouble(-1));
    DenseMatrix<cdouble> Pd = to_complex(densify(*coarse.P));
    DenseMatrix<cdouble> Rd = transpose(Pd);

    DenseMatrix<cdouble> cgc = matmul(
        Pd, matmul(solve_c, matmul(binv_c, matmul(Rd, fine.B))));
    DenseMatrix<cdouble> C = mat_add(DenseMatrix<cdouble>::identity(nf), cgc,
                                     cdouble(1), cdouble(-1));
    T = matmul(matpow(fine.S, cfg.nu_post),
               matmul(C, matpow(fine.S, cfg.nu_pre)));
  }
  return T;
}

}  // namespace

DenseMatrix<cdouble> characteristic_cycle_operator(const MgHierarchy& h,
                                                   const MgConfig& cfg,
                                                   cdouble lambda) {
  validate(cfg);
  std::vector<CharLevel> lv;
  lv.reserve(h.levels.size());
  for (const MgLevel& lev : h.levels)
    lv.push_back(make_char_level(lev, h.smoother, h.dt, cfg.omega, lambda));
  return char_cycle_impl(lv, cfg);
}

DenseMatrix<cdouble> build_characteristic_two_grid(const MgLevel& fine,
                                                   const MgLevel& coarse,
                                                   SmootherKind smoother,
                                                   double dt,
                                                   const MgConfig& cfg,
                                                   cdouble lambda) {
  validate(cfg);
  require(coarse.has_p, ErrorCode::InvalidArgument,
          "build_characteristic_two_grid: coarse level lacks a transfer");
  std::vector<CharLevel> lv;
  lv.push_back(make_char_level(coarse, smoother, dt, cfg.omega, lambda));
  lv.push_back(make_char_level(fine, smoother, dt, cfg.omega, lambda));
  return char_cycle_impl(lv, cfg);
}

SpectralReport verify_spectral_theorem(const MgHierarchy& h,
                                       const MgConfig& cfg) {
  validate(cfg);
  int n = h.finest().sys.total_dim();
  std::vector<double> zero(n, 0.0);
  DenseMatrix<double> T = densify_operator(
      [&](std::span<const double> e) {
        return cycle(h, cfg, h.finest_index(), e, zero);
      },
      n);

  SpectralReport rep;
  rep.rho_coupled = spectral_radius(T);
  SpectralDecomposition dec = eig_decompose(h.tableau);
  for (cdouble lambda : dec.eigenvalues) {
    DenseMatrix<cdouble> Ti = characteristic_cycle_operator(h, cfg, lambda);
    rep.rho_blocks.push_back(spectral_radius(Ti));
  }
  rep.max_block_rho = 0.0;
  for (double r : rep.rho_blocks)
    rep.max_block_rho = std::max(rep.max_block_rho, r);
  rep.discrepancy = std::abs(rep.rho_coupled - rep.max_block_rho);
  return rep;
}

std::string VerifyCase::name() const {
  return family_name(family) + "-s" + std::to_string(s) + "-" +
         smoother_name(smoother) + (levels == 2 ? "-tg" : "-v3") + "-p" +
         std::to_string(degree);
}

std::vector<VerifyCase> default_verify_cases() {
  std::vector<VerifyCase> cases;
  const std::pair<TableauFamily, int> tabs[] = {
      {TableauFamily::RadauIIA, 1},      {TableauFamily::RadauIIA, 2},
      {TableauFamily::RadauIIA, 3},      {TableauFamily::GaussLegendre, 1},
      {TableauFamily::GaussLegendre, 2},
  };
  for (auto [family, s] : tabs)
    for (SmootherKind sm : {SmootherKind::StageBlockJacobi,
                            SmootherKind::StageAsm})
      for (int levels : {2, 3})
        for (int degree : {1, 2})
          cases.push_back(VerifyCase{family, s, sm, levels, degree});
  return cases;
}

VerifyResult run_verify_case(const VerifyCase& c, const VerifySettings& vs) {
  ButcherTableau tab = make_tableau(c.family, c.s);
  MgHierarchy h = build_hierarchy(vs.base_n, c.levels, c.degree, tab, vs.dt,
                                  c.smoother);
  MgConfig cfg;
  cfg.nu_pre = vs.nu;
  cfg.nu_post = vs.nu;
  cfg.omega = vs.omega;

  int n = h.finest().sys.total_dim();
  std::vector<double> zero(n, 0.0);
  DenseMatrix<double> T = densify_operator(
      [&](std::span<const double> e) {
        return cycle(h, cfg, h.finest_index(), e, zero);
      },
      n);

  VerifyResult res;
  res.c = c;
  res.report.rho_coupled = spectral_radius(T);

  SpectralDecomposition dec = eig_decompose(tab);
  MonolithicityReport mono = monolithicity_check(T, dec.X, vs.mono_tol);
  res.max_offdiag = mono.max_offdiag;

  if (c.smoother == SmootherKind::PointJacobi) {
    // No single-stage surrogate exists for the pointwise smoother, so the
    // per-eigenvalue radii are read off the transformed diagonal blocks;
    // the leakage measurement is what this control case is for.
    for (const DenseMatrix<cdouble>& blk : mono.blocks)
      res.report.rho_blocks.push_back(spectral_radius(blk));
  } else {
    for (cdouble lambda : dec.eigenvalues) {
      DenseMatrix<cdouble> Ti = characteristic_cycle_operator(h, cfg, lambda);
      res.report.rho_blocks.push_back(spectral_radius(Ti));
    }
  }
  for (double r : res.report.rho_blocks)
    res.report.max_block_rho = std::max(res.report.max_block_rho, r);
  res.report.discrepancy =
      std::abs(res.report.rho_coupled - res.report.max_block_rho);

  res.pass = res.report.discrepancy <= vs.rho_tol &&
             res.report.rho_coupled < 1.0 && res.max_offdiag <= vs.mono_tol;
  return res;
}

std::vector<VerifyResult> run_verify_sweep(const std::vector<VerifyCase>& cases,
                                           const VerifySettings& vs) {
  std::vector<VerifyResult> results(cases.size());
  VerifySettings inner = vs;
  inner.threads = 1;  // cases must not race on nested pools
  parallel_for(static_cast<int>(cases.size()), vs.threads,
               [&](int i) { results[i] = run_verify_case(cases[i], inner); });
  return results;
}

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_verify_csv(const std::vector<VerifyResult>& results,
                      const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "case,s,family,smoother,cycle,rho_coupled,max_block_rho,"
         "discrepancy,max_offdiag\n";
  for (const VerifyResult& r : results) {
    out << r.c.name() << ',' << r.c.s << ',' << family_name(r.c.family) << ','
        << smoother_name(r.c.smoother) << ','
        << (r.c.levels == 2 ? "two-grid" : "v-cycle-3") << ','
        << fmt_g(r.report.rho_coupled) << ',' << fmt_g(r.report.max_block_rho)
        << ',' << fmt_g(r.report.discrepancy) << ',' << fmt_g(r.max_offdiag)
        << '\n';
  }
  require(out.good(), ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace stagemg
