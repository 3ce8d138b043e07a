/*
 * C interface to the stagemg solver library.
 *
 * Every fallible call returns a status code (STAGEMG_OK on success) and
 * leaves a human-readable message readable via stagemg_last_error() on
 * failure. Objects returned through stagemg_*_create / _run out-parameters
 * are owned by the caller and released with the matching _destroy; passing
 * NULL to a destroy function is a no-op. Handles are not thread-safe;
 * confine each handle to one thread or synchronize externally.
 */
#ifndef STAGEMG_H
#define STAGEMG_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  STAGEMG_OK = 0,
  STAGEMG_ERR_INVALID_ARGUMENT = 1,
  STAGEMG_ERR_DIMENSION_MISMATCH = 2,
  STAGEMG_ERR_SINGULAR_MATRIX = 3,
  STAGEMG_ERR_NO_CONVERGENCE = 4,
  STAGEMG_ERR_IO = 5,
  STAGEMG_ERR_INTERNAL = 6
};

/* Message for the most recent failure on the calling thread. Never NULL;
 * empty until the first failure. The pointer stays valid until the next
 * failing stagemg call on the same thread. */
const char* stagemg_last_error(void);

/* Library version as "major.minor.patch". */
const char* stagemg_version(void);

/* ---------------------------------------------------------------------- */
/* Runge-Kutta tableaus                                                    */
/* ---------------------------------------------------------------------- */

typedef struct stagemg_tableau stagemg_tableau;

/* family is "radau-iia" or "gauss-legendre" (case-insensitive, common
 * aliases accepted); stages must lie in 1..6. */
int stagemg_tableau_create(const char* family, int stages,
                           stagemg_tableau** out);
void stagemg_tableau_destroy(stagemg_tableau* t);

int stagemg_tableau_stages(const stagemg_tableau* t);

/* Copies the coefficients: a receives the s*s stage matrix row-major, b the
 * update weights, c the nodes. Any output pointer may be NULL to skip. */
int stagemg_tableau_coefficients(const stagemg_tableau* t, double* a,
                                 double* b, double* c);

/* Eigenvalues of the stage matrix (re/im, s entries each, sorted by
 * imaginary then real part) and the 2-norm condition number of its
 * eigenvector matrix. Any output pointer may be NULL to skip. */
int stagemg_tableau_spectrum(const stagemg_tableau* t, double* re, double* im,
                             double* cond2);

/* ---------------------------------------------------------------------- */
/* Convergence-theory verification sweep                                   */
/* ---------------------------------------------------------------------- */

/* Zero-initialize via stagemg_verify_options_init, then override fields.
 * Numeric fields left at 0 (and empty filter strings) select defaults. */
typedef struct {
  int base_n;      /* coarsest grid subdivisions; default 2 */
  double dt;       /* time step; default 0.25 */
  int nu;          /* pre- and post-smoothing sweeps; default 2 */
  double omega;    /* smoother damping; default 2/3 */
  double rho_tol;  /* spectral-radius agreement tolerance; default 1e-8 */
  double mono_tol; /* off-diagonal leakage tolerance; default 1e-8 */
  int threads;     /* worker cap across cases; default 1 */

  /* Case filters. Defaults cover RadauIIA s=1..3 and Gauss-Legendre s=1..2,
   * the two stage-coupled smoothers, two-grid and three-level cycles, and
   * element degrees 1..2. A nonzero / nonempty filter restricts the grid to
   * the given value; smoother also accepts "point-jacobi", which swaps in
   * the non-monolithic control smoother across the whole grid. */
  const char* family;   /* "" = both families */
  const char* smoother; /* "" = block-jacobi and asm-star */
  int stages;           /* 0 = all stage counts */
  int degree;           /* 0 = degrees 1 and 2 */
  int levels;           /* 0 = 2 and 3 levels */
} stagemg_verify_options;

void stagemg_verify_options_init(stagemg_verify_options* opts);

typedef struct stagemg_verify stagemg_verify;

/* Runs the sweep; fails with STAGEMG_ERR_INVALID_ARGUMENT if the filters
 * leave no cases. A completed run may still contain failing cases; inspect
 * stagemg_verify_all_passed. */
int stagemg_verify_run(const stagemg_verify_options* opts,
                       stagemg_verify** out);
void stagemg_verify_destroy(stagemg_verify* v);

int stagemg_verify_case_count(const stagemg_verify* v);
int stagemg_verify_all_passed(const stagemg_verify* v); /* 1 or 0 */

/* Copies one case's results. name receives a NUL-terminated label truncated
 * to name_cap bytes (name_cap >= 1); any pointer may be NULL to skip. */
int stagemg_verify_case(const stagemg_verify* v, int index, char* name,
                        size_t name_cap, double* rho_coupled,
                        double* max_block_rho, double* discrepancy,
                        double* max_offdiag, int* passed);

/* Writes the sweep as CSV (header plus one row per case). */
int stagemg_verify_write_csv(const stagemg_verify* v, const char* path);

/* ---------------------------------------------------------------------- */
/* Heat-equation solves                                                    */
/* ---------------------------------------------------------------------- */

/* Zero-initialize via stagemg_heat_options_init, then override fields.
 * nu_pre / nu_post use -1 as "default" because 0 sweeps is a legal
 * setting; all other numeric fields treat 0 as "default". */
typedef struct {
  const char* family; /* "" = "radau-iia" */
  int stages;         /* 0 = 2 */
  int degree;         /* 0 = 1 */
  int base_n;         /* coarsest subdivisions; 0 = 4 */
  int levels;         /* 0 = 3 */
  double kappa;       /* time step is kappa * h on the finest grid; 0 = 4 */
  const char* smoother; /* "" = "block-jacobi"; also "asm-star" */
  int nu_pre;         /* -1 = 2 */
  int nu_post;        /* -1 = 2 */
  int gamma;          /* coarse recursions per level, 1 or 2; 0 = 1 */
  double omega;       /* 0 = smoother default damping */
  double tol;         /* relative residual target; 0 = 1e-8 */
  int max_iter;       /* Krylov iteration cap; 0 = 500 */
  int threads;        /* 0 = 1 */
  int steps;          /* time steps to march; 0 = 1 */
} stagemg_heat_options;

void stagemg_heat_options_init(stagemg_heat_options* opts);

typedef struct stagemg_heat stagemg_heat;

/* Marches `steps` implicit RK steps of the manufactured heat problem,
 * solving each stage system by multigrid-preconditioned GMRES. The run
 * completes even if some step misses the tolerance; inspect
 * stagemg_heat_converged. */
int stagemg_heat_run(const stagemg_heat_options* opts, stagemg_heat** out);
void stagemg_heat_destroy(stagemg_heat* h);

int stagemg_heat_step_count(const stagemg_heat* h);
int stagemg_heat_converged(const stagemg_heat* h); /* every step hit tol */
int stagemg_heat_dofs(const stagemg_heat* h); /* spatial unknowns, finest */
double stagemg_heat_dt(const stagemg_heat* h);
double stagemg_heat_final_error(const stagemg_heat* h); /* L2 at end time */

/* Copies one step's record; any output pointer may be NULL to skip. */
int stagemg_heat_step(const stagemg_heat* h, int index, double* time,
                      int* iterations, double* final_residual,
                      double* l2_error, double* solve_seconds,
                      int* converged);

#ifdef __cplusplus
}
#endif

#endif /* STAGEMG_H */
