#include "stagemg.h"

#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "analysis.hpp"
#include "experiments.hpp"
#include "tableau.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(int code, const char* what) {
  g_last_error = what != nullptr ? what : "";
  return code;
}

/* Runs fn, translating exceptions to status codes. */
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return STAGEMG_OK;
  } catch (const stagemg::Error& e) {
    return set_error(static_cast<int>(e.code()), e.what());
  } catch (const std::exception& e) {
    return set_error(STAGEMG_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(STAGEMG_ERR_INTERNAL, "unknown failure");
  }
}

int require_arg(bool ok, const char* what) {
  return ok ? STAGEMG_OK : set_error(STAGEMG_ERR_INVALID_ARGUMENT, what);
}

std::string or_default(const char* s) { return s != nullptr ? s : ""; }

}  // namespace

struct stagemg_tableau {
  stagemg::ButcherTableau tab;
};

struct stagemg_verify {
  std::vector<stagemg::VerifyResult> results;
};

struct stagemg_heat {
  stagemg::HeatRunResult res;
};

extern "C" {

const char* stagemg_last_error(void) { return g_last_error.c_str(); }

const char* stagemg_version(void) { return "1.0.0"; }

/* ---------------------------------------------------------------------- */

int stagemg_tableau_create(const char* family, int stages,
                           stagemg_tableau** out) {
  if (int rc = require_arg(out != nullptr && family != nullptr,
                           "tableau_create: null argument"))
    return rc;
  *out = nullptr;
  return guarded([&] {
    stagemg::TableauFamily f = stagemg::family_from_name(family);
    auto* t = new stagemg_tableau{stagemg::make_tableau(f, stages)};
    *out = t;
  });
}

void stagemg_tableau_destroy(stagemg_tableau* t) { delete t; }

int stagemg_tableau_stages(const stagemg_tableau* t) {
  return t != nullptr ? t->tab.s : 0;
}

int stagemg_tableau_coefficients(const stagemg_tableau* t, double* a,
                                 double* b, double* c) {
  if (int rc = require_arg(t != nullptr, "tableau_coefficients: null handle"))
    return rc;
  int s = t->tab.s;
  if (a != nullptr)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) a[i * s + j] = t->tab.A(i, j);
  if (b != nullptr)
    for (int i = 0; i < s; ++i) b[i] = t->tab.b[i];
  if (c != nullptr)
    for (int i = 0; i < s; ++i) c[i] = t->tab.c[i];
  return STAGEMG_OK;
}

int stagemg_tableau_spectrum(const stagemg_tableau* t, double* re, double* im,
                             double* cond2) {
  if (int rc = require_arg(t != nullptr, "tableau_spectrum: null handle"))
    return rc;
  return guarded([&] {
    stagemg::SpectralDecomposition dec = stagemg::eig_decompose(t->tab);
    for (int i = 0; i < t->tab.s; ++i) {
      if (re != nullptr) re[i] = dec.eigenvalues[i].real();
      if (im != nullptr) im[i] = dec.eigenvalues[i].imag();
    }
    if (cond2 != nullptr) *cond2 = dec.cond2;
  });
}

/* ---------------------------------------------------------------------- */

void stagemg_verify_options_init(stagemg_verify_options* opts) {
  if (opts == nullptr) return;
  std::memset(opts, 0, sizeof *opts);
  opts->family = "";
  opts->smoother = "";
}

int stagemg_verify_run(const stagemg_verify_options* opts,
                       stagemg_verify** out) {
  if (int rc = require_arg(out != nullptr, "verify_run: null output"))
    return rc;
  *out = nullptr;
  return guarded([&] {
    stagemg_verify_options defaults;
    stagemg_verify_options_init(&defaults);
    const stagemg_verify_options& o = opts != nullptr ? *opts : defaults;

    stagemg::VerifySettings vs;
    if (o.base_n != 0) vs.base_n = o.base_n;
    if (o.dt != 0.0) vs.dt = o.dt;
    if (o.nu != 0) vs.nu = o.nu;
    if (o.omega != 0.0) vs.omega = o.omega;
    if (o.rho_tol != 0.0) vs.rho_tol = o.rho_tol;
    if (o.mono_tol != 0.0) vs.mono_tol = o.mono_tol;
    if (o.threads != 0) vs.threads = o.threads;

    std::vector<stagemg::VerifyCase> cases = stagemg::default_verify_cases();

    std::string family = or_default(o.family);
    if (!family.empty()) {
      stagemg::TableauFamily f = stagemg::family_from_name(family);
      std::erase_if(cases, [&](const stagemg::VerifyCase& c) {
        return c.family != f;
      });
    }
    std::string smoother = or_default(o.smoother);
    if (!smoother.empty()) {
      stagemg::SmootherKind k = stagemg::smoother_from_name(smoother);
      // The default grid spans the two monolithic smoothers; a filter keeps
      // one grid's worth of cases and retargets them, so selecting the
      // pointwise control yields a full-size sweep of it.
      std::erase_if(cases, [](const stagemg::VerifyCase& c) {
        return c.smoother != stagemg::SmootherKind::StageBlockJacobi;
      });
      for (stagemg::VerifyCase& c : cases) c.smoother = k;
    }
    if (o.stages != 0)
      std::erase_if(cases, [&](const stagemg::VerifyCase& c) {
        return c.s != o.stages;
      });
    if (o.degree != 0)
      std::erase_if(cases, [&](const stagemg::VerifyCase& c) {
        return c.degree != o.degree;
      });
    if (o.levels != 0)
      std::erase_if(cases, [&](const stagemg::VerifyCase& c) {
        return c.levels != o.levels;
      });
    stagemg::require(!cases.empty(), stagemg::ErrorCode::InvalidArgument,
                     "verify_run: the filters leave no cases");

    auto* v = new stagemg_verify{stagemg::run_verify_sweep(cases, vs)};
    *out = v;
  });
}

void stagemg_verify_destroy(stagemg_verify* v) { delete v; }

int stagemg_verify_case_count(const stagemg_verify* v) {
  return v != nullptr ? static_cast<int>(v->results.size()) : 0;
}

int stagemg_verify_all_passed(const stagemg_verify* v) {
  if (v == nullptr) return 0;
  for (const stagemg::VerifyResult& r : v->results)
    if (!r.pass) return 0;
  return 1;
}

int stagemg_verify_case(const stagemg_verify* v, int index, char* name,
                        size_t name_cap, double* rho_coupled,
                        double* max_block_rho, double* discrepancy,
                        double* max_offdiag, int* passed) {
  if (int rc = require_arg(v != nullptr, "verify_case: null handle"))
    return rc;
  if (int rc = require_arg(
          index >= 0 && index < static_cast<int>(v->results.size()),
          "verify_case: index out of range"))
    return rc;
  if (int rc = require_arg(name == nullptr || name_cap >= 1,
                           "verify_case: zero-size name buffer"))
    return rc;
  const stagemg::VerifyResult& r = v->results[static_cast<size_t>(index)];
  if (name != nullptr) std::snprintf(name, name_cap, "%s", r.c.name().c_str());
  if (rho_coupled != nullptr) *rho_coupled = r.report.rho_coupled;
  if (max_block_rho != nullptr) *max_block_rho = r.report.max_block_rho;
  if (discrepancy != nullptr) *discrepancy = r.report.discrepancy;
  if (max_offdiag != nullptr) *max_offdiag = r.max_offdiag;
  if (passed != nullptr) *passed = r.pass ? 1 : 0;
  return STAGEMG_OK;
}

int stagemg_verify_write_csv(const stagemg_verify* v, const char* path) {
  if (int rc = require_arg(v != nullptr && path != nullptr,
                           "verify_write_csv: null argument"))
    return rc;
  return guarded([&] { stagemg::write_verify_csv(v->results, path); });
}

/* ---------------------------------------------------------------------- */

void stagemg_heat_options_init(stagemg_heat_options* opts) {
  if (opts == nullptr) return;
  std::memset(opts, 0, sizeof *opts);
  opts->family = "";
  opts->smoother = "";
  opts->nu_pre = -1;
  opts->nu_post = -1;
}

int stagemg_heat_run(const stagemg_heat_options* opts, stagemg_heat** out) {
  if (int rc = require_arg(out != nullptr, "heat_run: null output")) return rc;
  *out = nullptr;
  return guarded([&] {
    stagemg_heat_options defaults;
    stagemg_heat_options_init(&defaults);
    const stagemg_heat_options& o = opts != nullptr ? *opts : defaults;

    stagemg::HeatOptions ho;
    std::string family = or_default(o.family);
    if (!family.empty()) ho.family = stagemg::family_from_name(family);
    if (o.stages != 0) ho.stages = o.stages;
    if (o.degree != 0) ho.degree = o.degree;
    if (o.base_n != 0) ho.base_n = o.base_n;
    if (o.levels != 0) ho.levels = o.levels;
    if (o.kappa != 0.0) ho.kappa = o.kappa;
    std::string smoother = or_default(o.smoother);
    if (!smoother.empty()) ho.smoother = stagemg::smoother_from_name(smoother);
    if (o.nu_pre >= 0) ho.nu_pre = o.nu_pre;
    if (o.nu_post >= 0) ho.nu_post = o.nu_post;
    if (o.gamma != 0) ho.gamma = o.gamma;
    if (o.omega != 0.0) ho.omega = o.omega;
    if (o.tol != 0.0) ho.tol = o.tol;
    if (o.max_iter != 0) ho.max_iter = o.max_iter;
    if (o.threads != 0) ho.threads = o.threads;
    if (o.steps != 0) ho.steps = o.steps;

    auto* h = new stagemg_heat{stagemg::run_heat(ho)};
    *out = h;
  });
}

void stagemg_heat_destroy(stagemg_heat* h) { delete h; }

int stagemg_heat_step_count(const stagemg_heat* h) {
  return h != nullptr ? static_cast<int>(h->res.rows.size()) : 0;
}

int stagemg_heat_converged(const stagemg_heat* h) {
  return h != nullptr && h->res.converged ? 1 : 0;
}

int stagemg_heat_dofs(const stagemg_heat* h) {
  return h != nullptr ? h->res.dofs : 0;
}

double stagemg_heat_dt(const stagemg_heat* h) {
  return h != nullptr ? h->res.dt : 0.0;
}

double stagemg_heat_final_error(const stagemg_heat* h) {
  return h != nullptr ? h->res.final_l2_error : 0.0;
}

int stagemg_heat_step(const stagemg_heat* h, int index, double* time,
                      int* iterations, double* final_residual,
                      double* l2_error, double* solve_seconds,
                      int* converged) {
  if (int rc = require_arg(h != nullptr, "heat_step: null handle")) return rc;
  if (int rc = require_arg(
          index >= 0 && index < static_cast<int>(h->res.rows.size()),
          "heat_step: index out of range"))
    return rc;
  const stagemg::HeatStepRow& row = h->res.rows[static_cast<size_t>(index)];
  if (time != nullptr) *time = row.time;
  if (iterations != nullptr) *iterations = row.iterations;
  if (final_residual != nullptr) *final_residual = row.final_residual;
  if (l2_error != nullptr) *l2_error = row.l2_error;
  if (solve_seconds != nullptr) *solve_seconds = row.solve_seconds;
  if (converged != nullptr) *converged = row.converged ? 1 : 0;
  return STAGEMG_OK;
}

}  // extern "C"
