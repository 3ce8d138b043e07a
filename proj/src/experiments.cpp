#include "experiments.hpp"

#include <chrono>
#include <cmath>

#include "fem.hpp"
#include "stage_system.hpp"

namespace stagemg {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double heat_exact(double x, double y, double t) {
  return std::sin(kPi * x) * std::sin(kPi * y) * std::exp(-t);
}

double heat_forcing(double x, double y, double t) {
  return (2.0 * kPi * kPi - 1.0) * heat_exact(x, y, t);
}

HeatRunResult run_heat(const HeatOptions& opts) {
  require(opts.steps >= 1, ErrorCode::InvalidArgument,
          "run_heat: at least one time step required");
  require(opts.kappa > 0.0, ErrorCode::InvalidArgument,
          "run_heat: kappa must be positive");
  require(opts.tol > 0.0 && opts.max_iter >= 1, ErrorCode::InvalidArgument,
          "run_heat: bad solver controls");

  ButcherTableau tab = make_tableau(opts.family, opts.stages);
  int fine_n = opts.base_n << (opts.levels - 1);
  double dt = opts.kappa / fine_n;  // kappa * h with h = 1 / fine_n

  MgHierarchy h = build_hierarchy(opts.base_n, opts.levels, opts.degree, tab,
                                  dt, opts.smoother, opts.threads);
  MgConfig cfg;
  cfg.nu_pre = opts.nu_pre;
  cfg.nu_post = opts.nu_post;
  cfg.gamma = opts.gamma;
  cfg.omega = opts.omega > 0.0 ? opts.omega : 2.0 / 3.0;
  validate(cfg);

  const MgLevel& top = h.finest();
  const FunctionSpace& space = *top.space;
  auto forcing = opts.forcing
                     ? opts.forcing
                     : std::function<double(double, double, double)>(
                           heat_forcing);
  auto initial = opts.initial
                     ? opts.initial
                     : std::function<double(double, double)>(
                           [](double x, double y) {
                             return heat_exact(x, y, 0.0);
                           });
  auto exact = opts.exact ? opts.exact
                          : std::function<double(double, double, double)>(
                                heat_exact);
  ForcingSpec fs{forcing, top.space};

  HeatRunResult res;
  res.s = tab.s;
  res.degree = opts.degree;
  res.levels = opts.levels;
  res.dofs = space.ndof();
  res.dt = dt;
  res.converged = true;

  std::vector<double> u = interpolate(space, initial);

  for (int step = 0; step < opts.steps; ++step) {
    double t_n = step * dt;
    std::vector<double> rhs = stage_rhs(fs, t_n, tab, dt);
    std::vector<double> ku(space.ndof());
    spmv(top.sys.K, std::span<const double>(u), std::span<double>(ku));
    for (int i = 0; i < tab.s; ++i)
      for (int p = 0; p < space.ndof(); ++p)
        rhs[static_cast<size_t>(i) * space.ndof() + p] -= ku[p];

    auto t0 = std::chrono::steady_clock::now();
    MgSolveResult sol =
        mg_preconditioned_gmres(h, cfg, rhs, opts.tol, opts.max_iter);
    auto t1 = std::chrono::steady_clock::now();

    u = rk_update(u, sol.x, tab, dt);
    double t_next = (step + 1) * dt;

    HeatStepRow row;
    row.time = t_next;
    row.iterations = sol.stats.iterations;
    row.final_residual = sol.true_rel_residual;
    row.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
    row.converged = sol.stats.converged && sol.true_rel_residual <= opts.tol;
    row.l2_error = l2_error(space, u, [&exact, t_next](double x, double y) {
      return exact(x, y, t_next);
    });
    res.converged = res.converged && row.converged;
    res.rows.push_back(row);
  }
  res.final_l2_error = res.rows.back().l2_error;
  res.final_u = std::move(u);
  return res;
}

}  // namespace stagemg
