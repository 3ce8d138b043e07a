// Command-line driver for the stagemg library. Talks to the solver core
// exclusively through the C interface in stagemg.h; everything here is
// argument handling, CSV serialization, and exit-status policy.
//
// Exit codes: 0 all checks of the invoked command passed, 1 a diagnostic
// or solve failed, 2 usage/configuration/library errors.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stagemg.h"

namespace {

[[noreturn]] void die(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(2);
}

void check(int rc) {
  if (rc != STAGEMG_OK) die(stagemg_last_error());
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int to_int(const std::string& s) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    die("'" + s + "' is not an integer");
  }
  if (pos != s.size()) die("'" + s + "' is not an integer");
  return v;
}

double to_double(const std::string& s) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    die("'" + s + "' is not a number");
  }
  if (pos != s.size()) die("'" + s + "' is not a number");
  return v;
}

/* "2" -> {2}; "1..3" -> {1,2,3}. */
std::vector<int> parse_range(const std::string& s) {
  size_t dots = s.find("..");
  if (dots == std::string::npos) return {to_int(s)};
  int lo = to_int(s.substr(0, dots));
  int hi = to_int(s.substr(dots + 2));
  if (lo > hi) die("empty range '" + s + "'");
  std::vector<int> out;
  for (int v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/* One settable key of a subcommand's plain-text configuration file. */
struct ConfigKey {
  std::string key;
  std::function<void(const std::string&)> put;
};

/* Applies `key=value` lines to any option not already set on the command
 * line; '#' starts a comment, unknown keys are fatal. */
void apply_config(const CLI::App& sub, const std::string& path,
                  const std::vector<ConfigKey>& keys) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in.good()) die("cannot read config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string text = line.substr(0, line.find('#'));
    text = trim(text);
    if (text.empty()) continue;
    size_t eq = text.find('=');
    if (eq == std::string::npos)
      die(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
      die(path + ":" + std::to_string(lineno) + ": expected key=value");
    const ConfigKey* match = nullptr;
    for (const ConfigKey& k : keys)
      if (k.key == key) match = &k;
    if (match == nullptr)
      die(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (sub.count("--" + key) > 0) continue;  // the flag wins
    match->put(value);
  }
}

std::FILE* open_out(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) die("cannot open '" + path + "' for writing");
  return f;
}

/* ---------------------------------------------------------------------- */

struct SpectrumArgs {
  std::string family;  // empty = both
  std::string stages = "1..6";
  std::string out = "spectrum.csv";
  std::string config;
  int seed = 0;
};

int cmd_spectrum(const CLI::App& sub, SpectrumArgs& a) {
  apply_config(sub, a.config,
               {{"family", [&](const std::string& v) { a.family = v; }},
                {"stages", [&](const std::string& v) { a.stages = v; }},
                {"out", [&](const std::string& v) { a.out = v; }},
                {"seed", [&](const std::string& v) { a.seed = to_int(v); }}});

  std::vector<std::string> families;
  if (a.family.empty())
    families = {"radau-iia", "gauss-legendre"};
  else
    families = {a.family};

  std::FILE* f = open_out(a.out);
  std::fprintf(f, "family,s,re,im,cond2\n");
  int rows = 0;
  for (const std::string& fam : families)
    for (int s : parse_range(a.stages)) {
      stagemg_tableau* t = nullptr;
      check(stagemg_tableau_create(fam.c_str(), s, &t));
      std::vector<double> re(s), im(s);
      double cond2 = 0.0;
      check(stagemg_tableau_spectrum(t, re.data(), im.data(), &cond2));
      for (int i = 0; i < s; ++i) {
        std::fprintf(f, "%s,%d,%s,%s,%s\n", fam.c_str(), s,
                     fmt_g(re[i]).c_str(), fmt_g(im[i]).c_str(),
                     fmt_g(cond2).c_str());
        ++rows;
      }
      stagemg_tableau_destroy(t);
    }
  std::fclose(f);
  std::printf("wrote %d eigenvalue rows to %s\n", rows, a.out.c_str());
  return 0;
}

/* ---------------------------------------------------------------------- */

struct VerifyArgs {
  std::string family;
  std::string smoother;
  int stages = 0;
  int degree = 0;
  int levels = 0;
  int base_n = 0;
  double dt = 0.0;
  int nu_pre = -1;
  int nu_post = -1;
  double omega = 0.0;
  double tol = 0.0;
  int threads = 0;
  std::string out = "verify.csv";
  std::string config;
  int seed = 0;
};

int cmd_verify(const CLI::App& sub, VerifyArgs& a) {
  apply_config(
      sub, a.config,
      {{"family", [&](const std::string& v) { a.family = v; }},
       {"smoother", [&](const std::string& v) { a.smoother = v; }},
       {"stages", [&](const std::string& v) { a.stages = to_int(v); }},
       {"degree", [&](const std::string& v) { a.degree = to_int(v); }},
       {"levels", [&](const std::string& v) { a.levels = to_int(v); }},
       {"base-n", [&](const std::string& v) { a.base_n = to_int(v); }},
       {"dt", [&](const std::string& v) { a.dt = to_double(v); }},
       {"nu-pre", [&](const std::string& v) { a.nu_pre = to_int(v); }},
       {"nu-post", [&](const std::string& v) { a.nu_post = to_int(v); }},
       {"omega", [&](const std::string& v) { a.omega = to_double(v); }},
       {"tol", [&](const std::string& v) { a.tol = to_double(v); }},
       {"threads", [&](const std::string& v) { a.threads = to_int(v); }},
       {"out", [&](const std::string& v) { a.out = v; }},
       {"seed", [&](const std::string& v) { a.seed = to_int(v); }}});

  if (a.nu_pre >= 0 && a.nu_post >= 0 && a.nu_pre != a.nu_post)
    die("the verification sweep smooths equally before and after "
        "coarse correction; give matching --nu-pre/--nu-post");
  int nu = a.nu_pre >= 0 ? a.nu_pre : (a.nu_post >= 0 ? a.nu_post : 0);

  stagemg_verify_options vo;
  stagemg_verify_options_init(&vo);
  vo.family = a.family.c_str();
  vo.smoother = a.smoother.c_str();
  vo.stages = a.stages;
  vo.degree = a.degree;
  vo.levels = a.levels;
  vo.base_n = a.base_n;
  vo.dt = a.dt;
  vo.nu = nu;
  vo.omega = a.omega;
  vo.rho_tol = a.tol;
  vo.mono_tol = a.tol;
  vo.threads = a.threads;

  stagemg_verify* v = nullptr;
  check(stagemg_verify_run(&vo, &v));
  check(stagemg_verify_write_csv(v, a.out.c_str()));

  int n = stagemg_verify_case_count(v);
  int failures = 0;
  for (int i = 0; i < n; ++i) {
    char name[96];
    double rho, blk, disc, off;
    int passed;
    check(stagemg_verify_case(v, i, name, sizeof name, &rho, &blk, &disc,
                              &off, &passed));
    if (!passed) {
      ++failures;
      std::printf("FAIL %s rho=%.3g max_block_rho=%.3g discrepancy=%.3g "
                  "max_offdiag=%.3g\n",
                  name, rho, blk, disc, off);
    }
  }
  std::printf("%d/%d cases passed; wrote %s\n", n - failures, n,
              a.out.c_str());
  int all = stagemg_verify_all_passed(v);
  stagemg_verify_destroy(v);
  return all ? 0 : 1;
}

/* ---------------------------------------------------------------------- */

struct HeatArgs {
  std::string family;
  std::string stages = "";  // range for solve-heat, single for step-heat
  int degree = 0;
  int base_n = 0;
  int levels = 0;
  double kappa = 0.0;
  std::string smoother;
  int nu_pre = -1;
  int nu_post = -1;
  int gamma = 0;
  double omega = 0.0;
  double tol = 0.0;
  int threads = 0;
  int steps = 0;
  std::string out;
  std::string config;
  int seed = 0;
};

std::vector<ConfigKey> heat_keys(HeatArgs& a, bool with_steps) {
  std::vector<ConfigKey> keys = {
      {"family", [&](const std::string& v) { a.family = v; }},
      {"stages", [&](const std::string& v) { a.stages = v; }},
      {"degree", [&](const std::string& v) { a.degree = to_int(v); }},
      {"base-n", [&](const std::string& v) { a.base_n = to_int(v); }},
      {"levels", [&](const std::string& v) { a.levels = to_int(v); }},
      {"kappa", [&](const std::string& v) { a.kappa = to_double(v); }},
      {"smoother", [&](const std::string& v) { a.smoother = v; }},
      {"nu-pre", [&](const std::string& v) { a.nu_pre = to_int(v); }},
      {"nu-post", [&](const std::string& v) { a.nu_post = to_int(v); }},
      {"gamma", [&](const std::string& v) { a.gamma = to_int(v); }},
      {"omega", [&](const std::string& v) { a.omega = to_double(v); }},
      {"tol", [&](const std::string& v) { a.tol = to_double(v); }},
      {"threads", [&](const std::string& v) { a.threads = to_int(v); }},
      {"out", [&](const std::string& v) { a.out = v; }},
      {"seed", [&](const std::string& v) { a.seed = to_int(v); }}};
  if (with_steps)
    keys.push_back(
        {"steps", [&](const std::string& v) { a.steps = to_int(v); }});
  return keys;
}

stagemg_heat_options heat_options(const HeatArgs& a, int stages) {
  stagemg_heat_options ho;
  stagemg_heat_options_init(&ho);
  ho.family = a.family.c_str();
  ho.stages = stages;
  ho.degree = a.degree;
  ho.base_n = a.base_n;
  ho.levels = a.levels;
  ho.kappa = a.kappa;
  ho.smoother = a.smoother.c_str();
  ho.nu_pre = a.nu_pre;
  ho.nu_post = a.nu_post;
  ho.gamma = a.gamma;
  ho.omega = a.omega;
  ho.tol = a.tol;
  ho.threads = a.threads;
  ho.steps = a.steps;
  return ho;
}

int cmd_solve_heat(const CLI::App& sub, HeatArgs& a) {
  apply_config(sub, a.config, heat_keys(a, false));
  if (a.out.empty()) a.out = "solve_heat.csv";
  std::vector<int> stage_list =
      parse_range(a.stages.empty() ? "1..3" : a.stages);

  std::FILE* f = open_out(a.out);
  std::fprintf(f, "s,degree,levels,dofs,iterations,final_residual,"
                  "solve_seconds\n");
  bool all_converged = true;
  for (int s : stage_list) {
    stagemg_heat_options ho = heat_options(a, s);
    ho.steps = 1;
    stagemg_heat* h = nullptr;
    check(stagemg_heat_run(&ho, &h));
    int iters = 0, conv = 0;
    double resid = 0.0, secs = 0.0;
    check(stagemg_heat_step(h, 0, nullptr, &iters, &resid, nullptr, &secs,
                            &conv));
    std::fprintf(f, "%d,%d,%d,%d,%d,%s,%s\n", s,
                 a.degree > 0 ? a.degree : 1, a.levels > 0 ? a.levels : 3,
                 stagemg_heat_dofs(h), iters, fmt_g(resid).c_str(),
                 fmt_g(secs).c_str());
    std::printf("s=%d dofs=%d iterations=%d residual=%.3g%s\n", s,
                stagemg_heat_dofs(h), iters, resid,
                conv ? "" : "  [NOT CONVERGED]");
    if (!conv) all_converged = false;
    stagemg_heat_destroy(h);
  }
  std::fclose(f);
  std::printf("wrote %s\n", a.out.c_str());
  return all_converged ? 0 : 1;
}

int cmd_step_heat(const CLI::App& sub, HeatArgs& a) {
  apply_config(sub, a.config, heat_keys(a, true));
  if (a.out.empty()) a.out = "step_heat.csv";
  std::vector<int> stage_list = parse_range(a.stages.empty() ? "2" : a.stages);
  if (stage_list.size() != 1) die("step-heat takes a single stage count");

  stagemg_heat_options ho = heat_options(a, stage_list[0]);
  stagemg_heat* h = nullptr;
  check(stagemg_heat_run(&ho, &h));

  std::FILE* f = open_out(a.out);
  std::fprintf(f, "step,time,iterations,final_residual,l2_error\n");
  int n = stagemg_heat_step_count(h);
  for (int i = 0; i < n; ++i) {
    double time, resid, err;
    int iters;
    check(stagemg_heat_step(h, i, &time, &iters, &resid, &err, nullptr,
                            nullptr));
    std::fprintf(f, "%d,%s,%d,%s,%s\n", i + 1, fmt_g(time).c_str(), iters,
                 fmt_g(resid).c_str(), fmt_g(err).c_str());
  }
  std::fclose(f);
  int conv = stagemg_heat_converged(h);
  std::printf("%d steps of dt=%s, final L2 error %.6g%s; wrote %s\n", n,
              fmt_g(stagemg_heat_dt(h)).c_str(), stagemg_heat_final_error(h),
              conv ? "" : "  [NOT CONVERGED]", a.out.c_str());
  stagemg_heat_destroy(h);
  return conv ? 0 : 1;
}

/* ---------------------------------------------------------------------- */

void add_common_heat_flags(CLI::App* sub, HeatArgs& a) {
  sub->add_option("--family", a.family,
                  "Runge-Kutta family: radau-iia or gauss-legendre");
  sub->add_option("--degree", a.degree, "element degree, 1 or 2")
      ->check(CLI::Range(1, 2));
  sub->add_option("--base-n", a.base_n, "coarsest-grid subdivisions")
      ->check(CLI::PositiveNumber);
  sub->add_option("--levels", a.levels, "grid levels in the hierarchy")
      ->check(CLI::PositiveNumber);
  sub->add_option("--kappa", a.kappa,
                  "time step is kappa times the finest grid spacing")
      ->check(CLI::PositiveNumber);
  sub->add_option("--smoother", a.smoother,
                  "point-jacobi, block-jacobi, or asm-star");
  sub->add_option("--nu-pre", a.nu_pre, "pre-smoothing sweeps")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--nu-post", a.nu_post, "post-smoothing sweeps")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--gamma", a.gamma, "coarse recursions per level, 1 or 2")
      ->check(CLI::Range(1, 2));
  sub->add_option("--omega", a.omega, "smoother damping factor")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tol", a.tol, "relative residual target")
      ->check(CLI::PositiveNumber);
  sub->add_option("--threads", a.threads, "worker thread cap")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", a.seed,
                  "reserved for randomized probes; all commands run "
                  "deterministically");
  sub->add_option("--out", a.out, "output CSV path");
  sub->add_option("--config", a.config,
                  "key=value file; explicit flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monolithic multigrid for stage-coupled implicit "
               "Runge-Kutta systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", stagemg_version());

  SpectrumArgs sa;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "tabulate stage-matrix eigenvalues and eigenvector "
                  "conditioning");
  spectrum->add_option("--family", sa.family,
                       "radau-iia or gauss-legendre; default both");
  spectrum->add_option("--stages", sa.stages, "stage count or range (1..6)");
  spectrum->add_option("--seed", sa.seed,
                       "reserved for randomized probes; all commands run "
                       "deterministically");
  spectrum->add_option("--out", sa.out, "output CSV path");
  spectrum->add_option("--config", sa.config,
                       "key=value file; explicit flags take precedence");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand(
      "verify", "check multigrid convergence theory across a sweep of "
                "discretizations");
  verify->add_option("--family", va.family,
                     "restrict the sweep to one family");
  verify->add_option("--smoother", va.smoother,
                     "restrict to one smoother (point-jacobi swaps in the "
                     "non-monolithic control)");
  verify->add_option("--stages", va.stages, "restrict to one stage count")
      ->check(CLI::PositiveNumber);
  verify->add_option("--degree", va.degree, "restrict to one element degree")
      ->check(CLI::Range(1, 2));
  verify->add_option("--levels", va.levels,
                     "restrict to two-grid (2) or three-level (3) cycles")
      ->check(CLI::Range(2, 3));
  verify->add_option("--base-n", va.base_n, "coarsest-grid subdivisions")
      ->check(CLI::PositiveNumber);
  verify->add_option("--dt", va.dt, "time step for every case")
      ->check(CLI::PositiveNumber);
  verify->add_option("--nu-pre", va.nu_pre, "smoothing sweeps (equal pre/post)")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--nu-post", va.nu_post,
                     "smoothing sweeps (equal pre/post)")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--omega", va.omega, "smoother damping factor")
      ->check(CLI::PositiveNumber);
  verify->add_option("--tol", va.tol,
                     "tolerance for spectral agreement and block leakage")
      ->check(CLI::PositiveNumber);
  verify->add_option("--threads", va.threads, "worker thread cap")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", va.seed,
                     "reserved for randomized probes; all commands run "
                     "deterministically");
  verify->add_option("--out", va.out, "output CSV path");
  verify->add_option("--config", va.config,
                     "key=value file; explicit flags take precedence");

  HeatArgs ha;
  CLI::App* solve = app.add_subcommand(
      "solve-heat", "time one preconditioned stage-system solve per stage "
                    "count");
  solve->add_option("--stages", ha.stages,
                    "stage count or range; default 1..3");
  add_common_heat_flags(solve, ha);

  HeatArgs ta;
  CLI::App* step = app.add_subcommand(
      "step-heat", "march the manufactured heat problem and report "
                   "accuracy");
  step->add_option("--stages", ta.stages, "stage count");
  step->add_option("--steps", ta.steps, "number of time steps")
      ->check(CLI::PositiveNumber);
  add_common_heat_flags(step, ta);

  CLI11_PARSE(app, argc, argv);

  if (spectrum->parsed()) return cmd_spectrum(*spectrum, sa);
  if (verify->parsed()) return cmd_verify(*verify, va);
  if (solve->parsed()) return cmd_solve_heat(*solve, ha);
  return cmd_step_heat(*step, ta);
}
