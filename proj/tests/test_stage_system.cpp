#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "gmres.hpp"
#include "stage_system.hpp"

using namespace stagemg;

namespace {

AssembledForms heat_forms(int n, int degree) {
  auto space = std::make_shared<FunctionSpace>(unit_square_mesh(n), degree);
  return apply_dirichlet(assemble(space));
}

SparseMatrix scalar_matrix(double v) {
  SparseBuilder b(1, 1);
  b.add(0, 0, v);
  return b.finalize();
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// One implicit RK step of M u' + K u = 0 via the materialized stage system.
std::vector<double> rk_step(const StageSystem& sys,
                            std::span<const double> u) {
  int s = sys.stages(), n = sys.space_dim();
  std::vector<double> ku(n), rhs(static_cast<size_t>(s) * n);
  spmv<double>(sys.K, u, std::span<double>(ku));
  for (int i = 0; i < s; ++i)
    for (int p = 0; p < n; ++p)
      rhs[static_cast<size_t>(i) * n + p] = -ku[p];
  auto k = lu_solve(lu_factor(densify(materialize(sys))), rhs);
  return rk_update(u, k, sys.tableau, sys.dt);
}

}  // namespace

TEST_CASE("single stage operator collapses to M + a dt K") {
  auto forms = heat_forms(2, 1);
  auto tab = make_radau_iia(1);
  StageSystem sys = make_stage_system(forms.M, forms.K, tab, 0.3);
  int n = sys.space_dim();

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n), mx(n), kx(n);
  for (auto& v : x) v = dist(rng);
  auto y = apply_stage_operator(sys, x);
  spmv<double>(forms.M, x, std::span<double>(mx));
  spmv<double>(forms.K, x, std::span<double>(kx));
  for (int i = 0; i < n; ++i)
    CHECK(y[i] == doctest::Approx(mx[i] + 0.3 * tab.A(0, 0) * kx[i])
                      .epsilon(1e-14));
}

TEST_CASE("matrix-free application matches the materialized operator") {
  auto forms = heat_forms(2, 1);
  for (int s : {1, 2, 3}) {
    StageSystem sys =
        make_stage_system(forms.M, forms.K, make_radau_iia(s), 0.25);
    auto bmat = materialize(sys);
    std::mt19937 rng(500 + s);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(sys.total_dim()), bx(sys.total_dim());
    for (auto& v : x) v = dist(rng);
    auto y = apply_stage_operator(sys, x);
    spmv<double>(bmat, x, std::span<double>(bx));
    double scale = 0.0;
    for (double v : bx) scale = std::max(scale, std::abs(v));
    CHECK(max_abs_diff(y, bx) <= 1e-13 * scale);
  }
}

TEST_CASE("stage operator on zero input is zero") {
  auto forms = heat_forms(2, 1);
  StageSystem sys =
      make_stage_system(forms.M, forms.K, make_gauss_legendre(2), 0.1);
  std::vector<double> zero(sys.total_dim(), 0.0);
  for (double v : apply_stage_operator(sys, zero)) CHECK(v == 0.0);
}

TEST_CASE("stage operator is linear") {
  auto forms = heat_forms(2, 2);
  StageSystem sys =
      make_stage_system(forms.M, forms.K, make_radau_iia(2), 0.5);
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(sys.total_dim()), y(sys.total_dim()),
      z(sys.total_dim());
  for (auto& v : x) v = dist(rng);
  for (auto& v : y) v = dist(rng);
  double alpha = 1.7, beta = -0.4;
  for (int i = 0; i < sys.total_dim(); ++i) z[i] = alpha * x[i] + beta * y[i];
  auto fz = apply_stage_operator(sys, z);
  auto fx = apply_stage_operator(sys, x);
  auto fy = apply_stage_operator(sys, y);
  double scale = 0.0;
  for (double v : fz) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < sys.total_dim(); ++i)
    CHECK(std::abs(fz[i] - alpha * fx[i] - beta * fy[i]) <= 1e-13 * scale);
}

TEST_CASE("stage application is independent of the thread count") {
  auto forms = heat_forms(3, 2);
  StageSystem sys =
      make_stage_system(forms.M, forms.K, make_radau_iia(3), 0.25);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(sys.total_dim());
  for (auto& v : x) v = dist(rng);
  auto serial = apply_stage_operator(sys, x, 1);
  auto threaded = apply_stage_operator(sys, x, 3);
  for (int i = 0; i < sys.total_dim(); ++i) CHECK(serial[i] == threaded[i]);
}

TEST_CASE("materialized blocks are delta_ij M + dt A_ij K") {
  auto forms = heat_forms(2, 1);
  double dt = 0.25;
  StageSystem sys = make_stage_system(forms.M, forms.K, make_radau_iia(2), dt);
  auto bmat = materialize(sys);
  int n = sys.space_dim();
  REQUIRE(bmat.rows() == 2 * n);
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double expect = (bi == bj ? forms.M.at(i, j) : 0.0) +
                          dt * sys.tableau.A(bi, bj) * forms.K.at(i, j);
          CHECK(bmat.at(bi * n + i, bj * n + j) ==
                doctest::Approx(expect).epsilon(1e-15));
        }
}

TEST_CASE("single stage materialization is M + dt a K") {
  auto forms = heat_forms(2, 1);
  auto tab = make_radau_iia(1);
  StageSystem sys = make_stage_system(forms.M, forms.K, tab, 0.7);
  auto direct = sparse_add(1.0, forms.M, 0.7 * tab.A(0, 0), forms.K);
  auto bmat = materialize(sys);
  REQUIRE(bmat.nnz() == direct.nnz());
  for (int k = 0; k < bmat.nnz(); ++k)
    CHECK(bmat.val()[k] == direct.val()[k]);
}

TEST_CASE("materialization cap rejects large systems") {
  auto forms = heat_forms(2, 1);
  StageSystem sys =
      make_stage_system(forms.M, forms.K, make_radau_iia(3), 0.25);
  CHECK_THROWS_AS(materialize(sys, sys.total_dim() - 1), Error);
  CHECK(materialize(sys, sys.total_dim()).rows() == sys.total_dim());
}

TEST_CASE("invalid stage system parameters are rejected") {
  auto forms = heat_forms(2, 1);
  auto tab = make_radau_iia(1);
  CHECK_THROWS_AS(make_stage_system(forms.M, forms.K, tab, 0.0), Error);
  CHECK_THROWS_AS(make_stage_system(forms.M, forms.K, tab, -1.0), Error);
  StageSystem sys = make_stage_system(forms.M, forms.K, tab, 0.5);
  std::vector<double> bad(sys.total_dim() + 1, 0.0);
  CHECK_THROWS_AS(apply_stage_operator(sys, bad), Error);
}

TEST_CASE("stage loads stack the forcing at shifted times") {
  auto space = std::make_shared<FunctionSpace>(unit_square_mesh(4), 1);
  int n = space->ndof();
  auto tab = make_radau_iia(2);
  double t_n = 0.3, dt = 0.1;

  ForcingSpec zero{[](double, double, double) { return 0.0; }, space};
  for (double v : stage_rhs(zero, t_n, tab, dt)) CHECK(v == 0.0);

  ForcingSpec steady{[](double x, double y, double) { return x + 2 * y; },
                     space};
  auto r = stage_rhs(steady, t_n, tab, dt);
  for (int p = 0; p < n; ++p) CHECK(r[p] == r[n + p]);

  // f = t: block i equals the interior load of the constant t_n + c_i dt.
  ForcingSpec ramp{[](double, double, double t) { return t; }, space};
  auto rr = stage_rhs(ramp, t_n, tab, dt);
  auto unit = assemble_load(*space, [](double, double, double) {
    return 1.0;
  }, 0.0);
  for (int i = 0; i < tab.s; ++i) {
    double ti = t_n + tab.c[i] * dt;
    double sum = 0.0, expect_sum = 0.0;
    for (int p = 0; p < n; ++p) {
      double expect = space->is_boundary_dof(p) ? 0.0 : ti * unit[p];
      CHECK(rr[static_cast<size_t>(i) * n + p] ==
            doctest::Approx(expect).epsilon(1e-12));
      sum += rr[static_cast<size_t>(i) * n + p];
      expect_sum += expect;
    }
    CHECK(sum == doctest::Approx(expect_sum).epsilon(1e-10));
  }
}

TEST_CASE("update with zero stages returns the input state") {
  std::vector<double> u = {1.0, -2.0, 0.5};
  std::vector<double> k(6, 0.0);
  auto u1 = rk_update(u, k, make_radau_iia(2), 0.1);
  for (int i = 0; i < 3; ++i) CHECK(u1[i] == u[i]);
}

TEST_CASE("backward Euler on the scalar decay problem") {
  auto m = scalar_matrix(1.0);
  StageSystem sys = make_stage_system(m, m, make_radau_iia(1), 0.1);
  std::vector<double> u0 = {1.0};
  auto u1 = rk_step(sys, u0);
  // 1.1 k = -1, u1 = 1 + 0.1 k = 1/1.1.
  CHECK(u1[0] == doctest::Approx(1.0 / 1.1).epsilon(1e-15));
}

TEST_CASE("two-stage step reproduces the rational stability function") {
  auto m = scalar_matrix(1.0);
  double dt = 0.1;
  StageSystem sys = make_stage_system(m, m, make_radau_iia(2), dt);
  std::vector<double> u0 = {1.0};
  auto u1 = rk_step(sys, u0);
  // The two-stage method applied to u' = -u advances by the (1,2) Pade
  // approximant of exp evaluated at z = -dt.
  double z = -dt;
  double expect = (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
  CHECK(u1[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("temporal convergence orders on the scalar decay problem") {
  auto m = scalar_matrix(1.0);
  auto march_error = [&](int s, int steps) {
    double dt = 1.0 / steps;
    StageSystem sys = make_stage_system(m, m, make_radau_iia(s), dt);
    std::vector<double> u = {1.0};
    for (int i = 0; i < steps; ++i) u = rk_step(sys, u);
    return std::abs(u[0] - std::exp(-1.0));
  };
  for (int s : {1, 2}) {
    double e1 = march_error(s, 8), e2 = march_error(s, 16);
    double order = std::log2(e1 / e2);
    CHECK(order > (2 * s - 1) - 0.25);
    CHECK(order < (2 * s - 1) + 0.35);
  }
}

TEST_CASE("transformed single-stage operator divides by the coefficient") {
  auto forms = heat_forms(2, 1);
  auto tab = make_radau_iia(1);
  StageSystem sys = make_stage_system(forms.M, forms.K, tab, 0.25);
  int n = sys.space_dim();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> rhs(n), x(n), mx(n), kx(n);
  for (auto& v : rhs) v = dist(rng);
  for (auto& v : x) v = dist(rng);

  auto tr = butcher_transform(sys, rhs);
  auto y = tr.apply(x);
  spmv<double>(forms.M, x, std::span<double>(mx));
  spmv<double>(forms.K, x, std::span<double>(kx));
  for (int i = 0; i < n; ++i) {
    CHECK(y[i] == doctest::Approx(mx[i] / tab.A(0, 0) + 0.25 * kx[i])
                      .epsilon(1e-13));
    CHECK(tr.rhs[i] == doctest::Approx(rhs[i] / tab.A(0, 0)).epsilon(1e-14));
  }
}

TEST_CASE("transform inverts the coefficient matrix") {
  for (int s : {1, 2, 3}) {
    auto tab = make_radau_iia(s);
    auto forms = heat_forms(2, 1);
    StageSystem sys = make_stage_system(forms.M, forms.K, tab, 0.25);
    std::vector<double> rhs(sys.total_dim(), 0.0);
    auto tr = butcher_transform(sys, rhs);
    auto prod = matmul(tr.a_inv, tab.A);
    auto diff = mat_add(prod, DenseMatrix<double>::identity(s), 1.0, -1.0);
    CHECK(max_abs(diff) <= 1e-12);
  }
}

TEST_CASE("transformed and original systems have the same solution") {
  auto forms = heat_forms(2, 1);
  StageSystem sys =
      make_stage_system(forms.M, forms.K, make_radau_iia(2), 0.25);
  int total = sys.total_dim();
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> rhs(total);
  for (auto& v : rhs) v = dist(rng);

  auto direct = lu_solve(lu_factor(densify(materialize(sys))), rhs);

  auto tr = butcher_transform(sys, rhs);
  std::vector<double> x(total, 0.0);
  auto apply_op = [&tr](std::span<const double> in, std::span<double> out) {
    auto y = tr.apply(in);
    std::copy(y.begin(), y.end(), out.begin());
  };
  auto ident = [](std::span<const double> in, std::span<double> out) {
    std::copy(in.begin(), in.end(), out.begin());
  };
  auto stats = gmres<double>(total, apply_op, ident, tr.rhs, x, 1e-12, total);
  REQUIRE(stats.converged);
  CHECK(max_abs_diff(x, direct) <= 1e-9);
}

TEST_CASE("transform rejects a singular coefficient matrix") {
  auto forms = heat_forms(2, 1);
  ButcherTableau degenerate;
  degenerate.family = TableauFamily::RadauIIA;
  degenerate.s = 1;
  degenerate.A = DenseMatrix<double>(1, 1);
  degenerate.b = {1.0};
  degenerate.c = {1.0};
  StageSystem sys = make_stage_system(forms.M, forms.K, degenerate, 0.25);
  std::vector<double> rhs(sys.total_dim(), 1.0);
  CHECK_THROWS_AS(butcher_transform(sys, rhs), Error);
}

TEST_CASE("pencil with real shift keeps real data real") {
  auto forms = heat_forms(2, 2);
  auto pencil =
      characteristic_pencil(forms.M, forms.K, cdouble(0.8, 0.0), 0.25);
  int n = forms.M.rows();
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<cdouble> x(n);
  for (auto& v : x) v = dist(rng);
  for (const auto& v : apply_pencil(pencil, x)) CHECK(v.imag() == 0.0);
}

TEST_CASE("pencil with zero shift is the mass matrix") {
  auto forms = heat_forms(2, 1);
  auto pencil = characteristic_pencil(forms.M, forms.K, cdouble(0, 0), 0.25);
  int n = forms.M.rows();
  std::vector<cdouble> x(n);
  for (int i = 0; i < n; ++i) x[i] = cdouble(i + 1, -i);
  auto y = apply_pencil(pencil, x);
  std::vector<cdouble> mx(n);
  spmv<cdouble>(forms.M, x, mx);
  for (int i = 0; i < n; ++i) CHECK(y[i] == mx[i]);
}

TEST_CASE("backward Euler pencil equals the materialized operator") {
  auto forms = heat_forms(2, 1);
  auto tab = make_radau_iia(1);
  StageSystem sys = make_stage_system(forms.M, forms.K, tab, 0.25);
  // The single-stage coefficient matrix is [[1]], so lambda = 1.
  auto pencil = characteristic_pencil(forms.M, forms.K, cdouble(1, 0), 0.25);
  auto pd = densify_pencil(pencil);
  auto bd = densify(materialize(sys));
  for (int i = 0; i < bd.rows(); ++i)
    for (int j = 0; j < bd.cols(); ++j) {
      CHECK(pd(i, j).real() == bd(i, j));
      CHECK(pd(i, j).imag() == 0.0);
    }
}
