#pragma once

#include <functional>
#include <vector>

#include "multigrid.hpp"

namespace stagemg {

/** Reference field sin(pi x) sin(pi y) e^{-t}, zero on the square's edge. */
double heat_exact(double x, double y, double t);

/** Forcing (2 pi^2 - 1) u that makes heat_exact solve u_t = laplace u + f. */
double heat_forcing(double x, double y, double t);

struct HeatOptions {
  TableauFamily family = TableauFamily::RadauIIA;
  int stages = 2;
  int degree = 1;
  int base_n = 4;
  int levels = 3;
  double kappa = 4.0;  // time step dt = kappa * h on the finest mesh
  SmootherKind smoother = SmootherKind::StageBlockJacobi;
  int nu_pre = 2;
  int nu_post = 2;
  int gamma = 1;
  double omega = 0.0;  // <= 0 selects the damping 2/3
  double tol = 1e-8;
  int max_iter = 500;
  int threads = 1;
  int steps = 1;

  // Overridable problem data; unset uses the manufactured solution above.
  std::function<double(double, double, double)> forcing;  // f(x, y, t)
  std::function<double(double, double)> initial;          // u(x, y, 0)
  std::function<double(double, double, double)> exact;    // error reference
};

struct HeatStepRow {
  double time = 0.0;  // t_{n+1} after this step
  int iterations = 0;
  double final_residual = 0.0;
  double l2_error = 0.0;
  double solve_seconds = 0.0;
  bool converged = false;
};

struct HeatRunResult {
  int s = 0;
  int degree = 0;
  int levels = 0;
  int dofs = 0;  // spatial unknowns on the finest level
  double dt = 0.0;
  std::vector<HeatStepRow> rows;  // one per time step
  std::vector<double> final_u;    // coefficient vector after the last step
  double final_l2_error = 0.0;
  bool converged = false;
};

/**
 * Time-marches the heat problem with the manufactured solution as data:
 * u(0) interpolated, each step solves the coupled stage system by
 * multigrid-preconditioned GMRES and applies the Runge-Kutta update.
 */
HeatRunResult run_heat(const HeatOptions& opts);

}  // namespace stagemg
