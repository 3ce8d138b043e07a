#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "experiments.hpp"

using namespace stagemg;

namespace {

double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("manufactured data satisfies the boundary and the equation") {
  CHECK(heat_exact(0.0, 0.37, 1.0) == 0.0);
  CHECK(heat_exact(0.42, 0.0, 0.3) == 0.0);
  CHECK(std::abs(heat_exact(1.0, 0.5, 0.0)) <= 1e-15);
  CHECK(std::abs(heat_exact(0.5, 1.0, 0.2)) <= 1e-15);
  CHECK(heat_exact(0.5, 0.5, 0.0) == 1.0);

  // u_t - laplace u = f, checked by centered finite differences.
  double x = 0.3, y = 0.6, t = 0.4, d = 1e-5;
  double ut = (heat_exact(x, y, t + d) - heat_exact(x, y, t - d)) / (2 * d);
  double uxx = (heat_exact(x + d, y, t) - 2 * heat_exact(x, y, t) +
                heat_exact(x - d, y, t)) /
               (d * d);
  double uyy = (heat_exact(x, y + d, t) - 2 * heat_exact(x, y, t) +
                heat_exact(x, y - d, t)) /
               (d * d);
  CHECK(std::abs(ut - uxx - uyy - heat_forcing(x, y, t)) <= 1e-5);
}

TEST_CASE("zero forcing and zero start stay exactly zero") {
  HeatOptions opts;
  opts.stages = 2;
  opts.base_n = 2;
  opts.levels = 2;
  opts.steps = 3;
  opts.forcing = [](double, double, double) { return 0.0; };
  opts.initial = [](double, double) { return 0.0; };
  opts.exact = [](double, double, double) { return 0.0; };
  HeatRunResult res = run_heat(opts);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.converged);
  for (const HeatStepRow& row : res.rows) CHECK(row.l2_error == 0.0);
  for (double v : res.final_u) CHECK(v == 0.0);
}

TEST_CASE("step geometry and metadata are reported faithfully") {
  HeatOptions opts;
  opts.stages = 1;
  opts.base_n = 4;
  opts.levels = 2;
  opts.kappa = 2.0;
  opts.steps = 2;
  HeatRunResult res = run_heat(opts);
  CHECK(res.s == 1);
  CHECK(res.degree == 1);
  CHECK(res.levels == 2);
  CHECK(res.dofs == 81);  // 9 x 9 vertices on the refined grid
  CHECK(res.dt == 2.0 / 8.0);
  REQUIRE(res.rows.size() == 2);
  CHECK(res.rows[0].time == res.dt);
  CHECK(res.rows[1].time == 2 * res.dt);
  CHECK(res.final_l2_error == res.rows.back().l2_error);
  CHECK(static_cast<int>(res.final_u.size()) == res.dofs);
  for (const HeatStepRow& row : res.rows) {
    CHECK(row.converged);
    CHECK(row.final_residual <= opts.tol);
    CHECK(row.iterations >= 1);
  }
}

TEST_CASE("bad controls are rejected") {
  HeatOptions opts;
  opts.steps = 0;
  CHECK_THROWS_AS(run_heat(opts), Error);
  opts = HeatOptions{};
  opts.kappa = 0.0;
  CHECK_THROWS_AS(run_heat(opts), Error);
  opts = HeatOptions{};
  opts.tol = -1.0;
  CHECK_THROWS_AS(run_heat(opts), Error);
}

TEST_CASE("one step tracks the manufactured solution") {
  HeatOptions opts;
  opts.stages = 2;
  opts.base_n = 4;
  opts.levels = 3;  // fine grid 16 x 16
  opts.kappa = 4.0;
  HeatRunResult res = run_heat(opts);
  CHECK(res.converged);
  CHECK(res.final_l2_error > 0.0);
  CHECK(res.final_l2_error <= 0.01);

  // One more refinement level roughly quarters the (spatially dominated)
  // error; the time step shrinks along with h.
  opts.levels = 4;
  HeatRunResult finer = run_heat(opts);
  double ratio = res.final_l2_error / finer.final_l2_error;
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 6.0);
}

TEST_CASE("iteration counts are stage- and depth-robust") {
  auto iters = [](int s, int levels) {
    HeatOptions opts;
    opts.stages = s;
    opts.levels = levels;
    HeatRunResult res = run_heat(opts);
    REQUIRE(res.converged);
    return res.rows[0].iterations;
  };
  int i1 = iters(1, 3), i2 = iters(2, 3), i3 = iters(3, 3);
  CAPTURE(i1);
  CAPTURE(i2);
  CAPTURE(i3);
  int hi = std::max({i1, i2, i3}), lo = std::min({i1, i2, i3});
  CHECK(hi <= 30);
  CHECK(hi - lo <= 2);
  int deep = iters(2, 4);
  CHECK(std::abs(deep - i2) <= 2);
}

TEST_CASE("quadratic elements do not cost extra iterations") {
  HeatOptions opts;
  opts.stages = 2;
  opts.base_n = 4;
  opts.levels = 3;
  HeatRunResult p1 = run_heat(opts);
  opts.degree = 2;
  HeatRunResult p2 = run_heat(opts);
  REQUIRE(p1.converged);
  REQUIRE(p2.converged);
  CHECK(p2.rows[0].iterations <= p1.rows[0].iterations + 2);
  // Quadratic elements resolve the smooth field far better.
  CHECK(p2.final_l2_error < p1.final_l2_error);
}

TEST_CASE("time marching converges at the expected temporal order") {
  // Single-level hierarchy: every step solved exactly, so differences
  // between runs isolate the time discretization on a fixed mesh.
  auto march = [](int s, double kappa, int steps) {
    HeatOptions opts;
    opts.stages = s;
    opts.base_n = 4;
    opts.levels = 1;
    opts.kappa = kappa;
    opts.steps = steps;
    HeatRunResult res = run_heat(opts);
    REQUIRE(res.converged);
    return res.final_u;
  };

  // Final time 0.4 on the n = 4 grid: dt = kappa / 4.
  std::vector<double> ref = march(2, 0.05, 32);
  std::vector<double> be_coarse = march(1, 0.4, 4);
  std::vector<double> be_fine = march(1, 0.2, 8);
  double d1 = diff_norm(be_coarse, ref);
  double d2 = diff_norm(be_fine, ref);
  double ratio = d1 / d2;
  CAPTURE(ratio);
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.4);

  // Two RadauIIA stages at the coarse step beat backward Euler by far.
  std::vector<double> r2_coarse = march(2, 0.4, 4);
  double d_r2 = diff_norm(r2_coarse, ref);
  CHECK(d1 > 10.0 * d_r2);
}
