#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "eig.hpp"
#include "fem.hpp"
#include "multigrid.hpp"
#include "stage_system.hpp"

using namespace stagemg;

namespace {

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Zero out boundary rows of every stage block.
void clear_boundary(const FunctionSpace& space, std::vector<double>& v) {
  int n = space.ndof();
  int s = static_cast<int>(v.size()) / n;
  for (int i = 0; i < s; ++i)
    for (int d : space.boundary_dofs()) v[static_cast<size_t>(i) * n + d] = 0.0;
}

DenseMatrix<double> error_propagator(const MgHierarchy& h,
                                     const MgConfig& cfg) {
  int n = h.finest().sys.total_dim();
  DenseMatrix<double> T(n, n);
  std::vector<double> e(n, 0.0), zero(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    std::vector<double> col = cycle(h, cfg, h.finest_index(), e, zero);
    for (int i = 0; i < n; ++i) T(i, j) = col[i];
    e[j] = 0.0;
  }
  return T;
}

}  // namespace

TEST_CASE("hierarchy carries spaces, operators, transfers, bottom factor") {
  auto tab = make_radau_iia(1);
  MgHierarchy h = build_hierarchy(4, 2, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi);
  REQUIRE(h.levels.size() == 2);
  CHECK(h.levels[0].space->ndof() == 25);
  CHECK(h.levels[1].space->ndof() == 81);
  CHECK(h.levels[0].sys.total_dim() == 25);
  CHECK(h.levels[1].sys.total_dim() == 81);
  CHECK(h.levels[0].has_p);
  CHECK_FALSE(h.levels[1].has_p);
  CHECK(h.levels[0].P.rows() == 81);
  CHECK(h.levels[0].P.cols() == 25);
  CHECK(h.levels[0].has_lu);
  CHECK_FALSE(h.levels[1].has_lu);
  CHECK(h.levels[0].coarse_lu.dim() == 25);
  CHECK(h.finest_index() == 1);
  CHECK(&h.finest() == &h.levels[1]);

  // The stored transfer is the inclusion between the stored spaces.
  SparseMatrix P = prolongation(*h.levels[0].space, *h.levels[1].space);
  REQUIRE(P.val().size() == h.levels[0].P.val().size());
  CHECK(P.col() == h.levels[0].P.col());
  CHECK(P.row_ptr() == h.levels[0].P.row_ptr());
  CHECK(P.val() == h.levels[0].P.val());
}

TEST_CASE("stage transfers act per block and are mutually adjoint") {
  auto tab = make_gauss_legendre(2);
  MgHierarchy h = build_hierarchy(2, 2, 2, tab, 0.25,
                                  SmootherKind::StageBlockJacobi);
  const SparseMatrix& P = h.levels[0].P;
  int s = tab.s;

  std::vector<double> u = random_vector(s * P.cols(), 11);
  std::vector<double> fine = stage_prolong(P, u, s);
  for (int i = 0; i < s; ++i) {
    std::vector<double> block(P.rows());
    spmv(P, std::span<const double>(u).subspan(i * P.cols(), P.cols()),
         std::span<double>(block));
    for (int r = 0; r < P.rows(); ++r)
      CHECK(fine[static_cast<size_t>(i) * P.rows() + r] == block[r]);
  }

  std::vector<double> v = random_vector(s * P.rows(), 12);
  std::vector<double> coarse = stage_restrict(P, v, s);
  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < fine.size(); ++i) lhs += fine[i] * v[i];
  for (size_t i = 0; i < u.size(); ++i) rhs += u[i] * coarse[i];
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));

  CHECK_THROWS_AS(stage_prolong(P, v, s), Error);
  CHECK_THROWS_AS(stage_restrict(P, u, s), Error);
}

TEST_CASE("cycle configuration is validated") {
  MgConfig cfg;
  cfg.gamma = 3;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = MgConfig{};
  cfg.nu_pre = 0;
  cfg.nu_post = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = MgConfig{};
  cfg.nu_pre = -1;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = MgConfig{};
  cfg.omega = 0.0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg.omega = 1.5;
  CHECK_THROWS_AS(validate(cfg), Error);
  CHECK_NOTHROW(validate(MgConfig{}));
}

TEST_CASE("hierarchy construction rejects bad shapes") {
  auto tab = make_radau_iia(1);
  CHECK_THROWS_AS(build_hierarchy(4, 0, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi),
                  Error);
  CHECK_THROWS_AS(build_hierarchy(0, 2, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi),
                  Error);
  CHECK_THROWS_AS(build_hierarchy(4, 2, 1, tab, 0.0,
                                  SmootherKind::StageBlockJacobi),
                  Error);
  // 25 coupled unknowns on the coarsest level exceed a cap of 10.
  CHECK_THROWS_AS(build_hierarchy(4, 2, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi, 1, 10),
                  Error);

  MgHierarchy h = build_hierarchy(2, 2, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi);
  std::vector<double> z(h.finest().sys.total_dim(), 0.0);
  CHECK_THROWS_AS(cycle(h, MgConfig{}, 2, z, z), Error);
  CHECK_THROWS_AS(cycle(h, MgConfig{}, -1, z, z), Error);
}

TEST_CASE("smoother names round-trip") {
  for (SmootherKind k : {SmootherKind::PointJacobi,
                         SmootherKind::StageBlockJacobi,
                         SmootherKind::StageAsm})
    CHECK(smoother_from_name(smoother_name(k)) == k);
  CHECK_THROWS_AS(smoother_from_name("ilu"), Error);
}

TEST_CASE("zero iterate and zero data stay exactly zero") {
  auto tab = make_radau_iia(2);
  MgHierarchy h = build_hierarchy(2, 3, 1, tab, 0.25,
                                  SmootherKind::StageBlockJacobi);
  int n = h.finest().sys.total_dim();
  std::vector<double> z(n, 0.0);
  std::vector<double> out = cycle(h, MgConfig{}, h.finest_index(), z, z);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("consistent data is a fixed point of the cycle") {
  auto tab = make_radau_iia(2);
  SUBCASE("linear elements, stage block Jacobi") {
    MgHierarchy h = build_hierarchy(2, 2, 1, tab, 0.25,
                                    SmootherKind::StageBlockJacobi);
    int n = h.finest().sys.total_dim();
    std::vector<double> xs = random_vector(n, 21);
    std::vector<double> b = apply_stage_operator(h.finest().sys, xs);
    std::vector<double> out = cycle(h, MgConfig{}, 1, xs, b);
    CHECK(max_abs_diff(out, xs) <= 1e-12 * norm2(xs));
  }
  SUBCASE("quadratic elements, Schwarz smoother") {
    MgHierarchy h = build_hierarchy(2, 2, 2, tab, 0.25,
                                    SmootherKind::StageAsm);
    int n = h.finest().sys.total_dim();
    std::vector<double> xs = random_vector(n, 22);
    std::vector<double> b = apply_stage_operator(h.finest().sys, xs);
    MgConfig cfg;
    cfg.omega = 2.0 / 3.0;
    std::vector<double> out = cycle(h, cfg, 1, xs, b);
    CHECK(max_abs_diff(out, xs) <= 1e-11 * norm2(xs));
  }
}

TEST_CASE("cycle output is linear in iterate and data") {
  auto tab = make_gauss_legendre(1);
  MgHierarchy h = build_hierarchy(2, 2, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi);
  int n = h.finest().sys.total_dim();
  MgConfig cfg;

  std::vector<double> x1 = random_vector(n, 31), x2 = random_vector(n, 32);
  std::vector<double> b1 = random_vector(n, 33), b2 = random_vector(n, 34);
  double a = 0.375, c = -1.25;

  std::vector<double> xc(n), bc(n);
  for (int i = 0; i < n; ++i) {
    xc[i] = a * x1[i] + c * x2[i];
    bc[i] = a * b1[i] + c * b2[i];
  }
  std::vector<double> y1 = cycle(h, cfg, 1, x1, b1);
  std::vector<double> y2 = cycle(h, cfg, 1, x2, b2);
  std::vector<double> yc = cycle(h, cfg, 1, xc, bc);
  std::vector<double> expect(n);
  for (int i = 0; i < n; ++i) expect[i] = a * y1[i] + c * y2[i];
  CHECK(max_abs_diff(yc, expect) <= 1e-12 * std::max(norm2(y1), norm2(y2)));
}

TEST_CASE("two-grid step reproduces the two-level cycle bit for bit") {
  auto tab = make_radau_iia(2);
  for (SmootherKind kind : {SmootherKind::StageBlockJacobi,
                            SmootherKind::StageAsm}) {
    CAPTURE(smoother_name(kind));
    MgHierarchy h = build_hierarchy(2, 2, 1, tab, 0.25, kind);
    int n = h.finest().sys.total_dim();
    MgConfig cfg;
    cfg.omega = 2.0 / 3.0;
    std::vector<double> x0 = random_vector(n, 41);
    std::vector<double> b = random_vector(n, 42);
    clear_boundary(*h.finest().space, b);

    std::vector<double> via_cycle = cycle(h, cfg, 1, x0, b);
    std::vector<double> via_step =
        two_grid_step(h.levels[1], h.levels[0], cfg, x0, b);
    REQUIRE(via_cycle.size() == via_step.size());
    for (int i = 0; i < n; ++i) CHECK(via_cycle[i] == via_step[i]);
  }
}

TEST_CASE("exact bottom solve makes two-level W and V cycles identical") {
  auto tab = make_radau_iia(2);
  MgHierarchy h = build_hierarchy(2, 2, 1, tab, 0.25,
                                  SmootherKind::StageBlockJacobi);
  int n = h.finest().sys.total_dim();
  std::vector<double> x0 = random_vector(n, 51);
  std::vector<double> b = random_vector(n, 52);
  MgConfig v, w;
  w.gamma = 2;
  std::vector<double> yv = cycle(h, v, 1, x0, b);
  std::vector<double> yw = cycle(h, w, 1, x0, b);
  for (int i = 0; i < n; ++i) CHECK(yv[i] == yw[i]);
}

TEST_CASE("self-coarse two-grid step solves in one pass") {
  auto tab = make_radau_iia(2);
  auto mesh = unit_square_mesh(4);
  auto space = std::make_shared<const FunctionSpace>(mesh, 1);
  AssembledForms forms = apply_dirichlet(assemble(space));
  StageSystem sys = make_stage_system(forms.M, forms.K, tab, 0.25);
  int n = sys.total_dim();

  MgLevel coarse;
  coarse.space = space;
  coarse.sys = sys;
  coarse.prec = stage_block_jacobi(sys);
  coarse.P = sparse_identity(space->ndof());
  coarse.has_p = true;

  MgLevel fine;
  fine.space = space;
  fine.sys = sys;
  fine.prec = stage_block_jacobi(sys);

  std::vector<double> xs = random_vector(n, 61);
  std::vector<double> b = apply_stage_operator(sys, xs);
  std::vector<double> x0 = random_vector(n, 62);

  MgConfig cfg;
  cfg.nu_pre = 1;
  cfg.nu_post = 0;
  // No stored factorization on the coarse level: built on the fly.
  std::vector<double> out = two_grid_step(fine, coarse, cfg, x0, b);
  CHECK(max_abs_diff(out, xs) <= 1e-10 * norm2(xs));

  cfg.nu_post = 1;
  out = two_grid_step(fine, coarse, cfg, x0, b);
  CHECK(max_abs_diff(out, xs) <= 1e-10 * norm2(xs));
}

TEST_CASE("stationary V-cycle converges on three levels") {
  for (int s = 1; s <= 3; ++s) {
    CAPTURE(s);
    auto tab = make_radau_iia(s);
    MgHierarchy h = build_hierarchy(2, 3, 1, tab, 0.5,
                                    SmootherKind::StageBlockJacobi);
    int n = h.finest().sys.total_dim();
    std::vector<double> xs = random_vector(n, 70 + s);
    clear_boundary(*h.finest().space, xs);
    std::vector<double> b = apply_stage_operator(h.finest().sys, xs);

    MgConfig cfg;
    cfg.omega = 2.0 / 3.0;
    std::vector<double> x(n, 0.0);
    StationaryStats st = mg_stationary_solve(h, cfg, x, b);
    CHECK(st.converged);
    CHECK(st.iterations <= 50);
    CHECK(st.rel_residual <= 1e-8);
    CHECK(max_abs_diff(x, xs) <= 1e-6 * norm2(xs));
    // The recorded history tracks the true residual per sweep.
    REQUIRE(st.history.size() == static_cast<size_t>(st.iterations) + 1);
    CHECK(st.history.front() == 1.0);
    CHECK(st.history.back() == st.rel_residual);
  }
}

TEST_CASE("gamma-two cycles converge on three levels") {
  auto tab = make_gauss_legendre(2);
  MgHierarchy h = build_hierarchy(2, 3, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi);
  int n = h.finest().sys.total_dim();
  std::vector<double> xs = random_vector(n, 81);
  clear_boundary(*h.finest().space, xs);
  std::vector<double> b = apply_stage_operator(h.finest().sys, xs);

  MgConfig cfg;
  cfg.gamma = 2;
  cfg.omega = 2.0 / 3.0;
  std::vector<double> x(n, 0.0);
  StationaryStats st = mg_stationary_solve(h, cfg, x, b);
  CHECK(st.converged);
  CHECK(st.iterations <= 50);
}

TEST_CASE("observed contraction matches the spectral radius") {
  auto tab = make_radau_iia(2);
  MgHierarchy h = build_hierarchy(4, 2, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi);
  MgConfig cfg;
  cfg.omega = 2.0 / 3.0;
  int n = h.finest().sys.total_dim();

  DenseMatrix<double> T = error_propagator(h, cfg);
  double rho = spectral_radius(T);
  CHECK(rho < 1.0);

  // Error iteration: five warm-up cycles align the error with the dominant
  // mode, after which one sweep contracts by at most rho plus slack.
  std::vector<double> e = random_vector(n, 91);
  std::vector<double> zero(n, 0.0);
  for (int warm = 0; warm < 5; ++warm) {
    e = cycle(h, cfg, 1, e, zero);
    double nrm = norm2(e);
    REQUIRE(nrm > 0.0);
    for (double& v : e) v /= nrm;
  }
  std::vector<double> next = cycle(h, cfg, 1, e, zero);
  CHECK(norm2(next) / norm2(e) <= rho + 0.05);
}

TEST_CASE("Schwarz-smoothed cycle converges on quadratic elements") {
  auto tab = make_radau_iia(2);
  MgHierarchy h = build_hierarchy(2, 2, 2, tab, 0.25, SmootherKind::StageAsm);
  int n = h.finest().sys.total_dim();
  std::vector<double> xs = random_vector(n, 95);
  clear_boundary(*h.finest().space, xs);
  std::vector<double> b = apply_stage_operator(h.finest().sys, xs);

  MgConfig cfg;
  cfg.omega = 2.0 / 3.0;
  std::vector<double> x(n, 0.0);
  StationaryStats st = mg_stationary_solve(h, cfg, x, b);
  CHECK(st.converged);
  CHECK(st.iterations <= 50);
}

TEST_CASE("single-level hierarchy preconditions to convergence in one step") {
  auto tab = make_radau_iia(2);
  MgHierarchy h = build_hierarchy(4, 1, 1, tab, 0.5,
                                  SmootherKind::StageBlockJacobi);
  int n = h.finest().sys.total_dim();
  std::vector<double> xs = random_vector(n, 101);
  clear_boundary(*h.finest().space, xs);
  std::vector<double> b = apply_stage_operator(h.finest().sys, xs);

  MgSolveResult res = mg_preconditioned_gmres(h, MgConfig{}, b, 1e-8);
  CHECK(res.stats.converged);
  CHECK(res.stats.iterations == 1);
  CHECK(res.true_rel_residual <= 1e-8);
  CHECK(max_abs_diff(res.x, xs) <= 1e-8 * norm2(xs));
}

TEST_CASE("preconditioned counts are robust in stage count and depth") {
  // Fine-grid time step tied to the fine mesh width: dt = 4 h.
  auto solve_iters = [](int s, int levels) {
    auto tab = make_radau_iia(s);
    int fine_n = 4 << (levels - 1);
    double dt = 4.0 / fine_n;
    MgHierarchy h = build_hierarchy(4, levels, 1, tab, dt,
                                    SmootherKind::StageBlockJacobi);
    int n = h.finest().sys.total_dim();
    std::vector<double> xs = random_vector(n, 111);
    xs.resize(n);
    clear_boundary(*h.finest().space, xs);
    std::vector<double> b = apply_stage_operator(h.finest().sys, xs);
    MgConfig cfg;
    cfg.omega = 2.0 / 3.0;
    MgSolveResult res = mg_preconditioned_gmres(h, cfg, b, 1e-8);
    REQUIRE(res.stats.converged);
    REQUIRE(res.true_rel_residual <= 1e-8);
    return res.stats.iterations;
  };

  int i1 = solve_iters(1, 3);
  int i2 = solve_iters(2, 3);
  int i3 = solve_iters(3, 3);
  CAPTURE(i1);
  CAPTURE(i2);
  CAPTURE(i3);
  int lo = std::min({i1, i2, i3}), hi = std::max({i1, i2, i3});
  CHECK(hi <= 30);
  CHECK(hi - lo <= 2);

  int deep = solve_iters(2, 4);
  CAPTURE(deep);
  CHECK(std::abs(deep - i2) <= 2);
}
