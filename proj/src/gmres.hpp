#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "dense.hpp"

namespace stagemg {

struct GmresStats {
  int iterations = 0;
  std::vector<double> residual_history;  // preconditioned relative residuals
  bool converged = false;
};

namespace detail {

inline double gmres_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline cdouble gmres_dot(std::span<const cdouble> a,
                         std::span<const cdouble> b) {
  cdouble s(0);
  for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

template <class S>
double gmres_norm(std::span<const S> v) {
  double s = 0.0;
  for (const S& x : v) s += std::norm(cdouble(x));
  return std::sqrt(s);
}

inline double gmres_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

/**
 * Left-preconditioned restarted GMRES with modified Gram-Schmidt Arnoldi and
 * Givens-rotation least squares. Solves M^{-1} A x = M^{-1} b, starting from
 * the provided x. Convergence is declared when the preconditioned relative
 * residual drops to tol; residual_history records that quantity per step and
 * is nonincreasing within each restart cycle. An Arnoldi breakdown below
 * 1e-14 signals exact convergence and terminates the sweep. Callers that
 * need a bound on the true residual must verify it on return.
 */
template <class S>
GmresStats gmres(int n,
                 const std::function<void(std::span<const S>, std::span<S>)>& apply_a,
                 const std::function<void(std::span<const S>, std::span<S>)>& apply_m,
                 std::span<const S> b, std::span<S> x, double tol,
                 int max_iter, int restart = 200) {
  using detail::gmres_dot;
  using detail::gmres_norm;
  require(static_cast<int>(b.size()) == n && static_cast<int>(x.size()) == n,
          ErrorCode::DimensionMismatch, "gmres: size mismatch");
  require(tol > 0.0 && max_iter >= 0 && restart >= 1,
          ErrorCode::InvalidArgument, "gmres: bad control parameters");

  GmresStats stats;
  std::vector<S> tmp(n), z(n);

  apply_m(b, std::span<S>(z));
  double bnorm = gmres_norm(std::span<const S>(z));
  if (bnorm == 0.0) {
    for (int i = 0; i < n; ++i) x[i] = S(0);
    stats.converged = true;
    stats.residual_history.push_back(0.0);
    return stats;
  }

  int total = 0;
  while (true) {
    // Preconditioned residual of the current iterate.
    apply_a(std::span<const S>(x), std::span<S>(tmp));
    for (int i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
    apply_m(std::span<const S>(tmp), std::span<S>(z));
    double beta = gmres_norm(std::span<const S>(z));
    double rel = beta / bnorm;
    stats.residual_history.push_back(rel);
    if (rel <= tol) {
      stats.converged = true;
      return stats;
    }
    if (total >= max_iter) return stats;

    int m = std::min(restart, max_iter - total);
    std::vector<std::vector<S>> v;
    v.reserve(m + 1);
    std::vector<S> first(z);
    for (int i = 0; i < n; ++i) first[i] /= beta;
    v.push_back(std::move(first));

    // Hessenberg columns, Givens rotations and the rotated rhs.
    std::vector<std::vector<S>> hcol;
    std::vector<S> cs(m), sn(m);
    std::vector<S> g(m + 1, S(0));
    g[0] = S(beta);

    int k = 0;
    bool breakdown = false;
    for (; k < m; ++k) {
      apply_a(std::span<const S>(v[k]), std::span<S>(tmp));
      apply_m(std::span<const S>(tmp), std::span<S>(z));
      std::vector<S> h(k + 2, S(0));
      for (int j = 0; j <= k; ++j) {
        S hj = gmres_dot(std::span<const S>(v[j]), std::span<const S>(z));
        h[j] = hj;
        for (int i = 0; i < n; ++i) z[i] -= hj * v[j][i];
      }
      double hnorm = gmres_norm(std::span<const S>(z));
      h[k + 1] = S(hnorm);
      // Apply accumulated rotations to the new column.
      for (int j = 0; j < k; ++j) {
        S t0 = cs[j] * h[j] + sn[j] * h[j + 1];
        S t1 = -conj_of(sn[j]) * h[j] + conj_of(cs[j]) * h[j + 1];
        h[j] = t0;
        h[j + 1] = t1;
      }
      // New rotation annihilating h[k+1].
      double denom =
          std::sqrt(std::norm(cdouble(h[k])) + std::norm(cdouble(h[k + 1])));
      if (denom == 0.0) {
        cs[k] = S(1);
        sn[k] = S(0);
      } else {
        cs[k] = conj_of(h[k]) / S(denom);
        sn[k] = conj_of(h[k + 1]) / S(denom);
      }
      S t0 = cs[k] * h[k] + sn[k] * h[k + 1];
      h[k] = t0;
      h[k + 1] = S(0);
      S g1 = -conj_of(sn[k]) * g[k] + conj_of(cs[k]) * g[k + 1];
      g[k + 1] = g1;
      g[k] = cs[k] * g[k] /* + sn[k] * 0 */;
      hcol.push_back(std::move(h));
      ++total;
      double rk = abs_of(g[k + 1]) / bnorm;
      stats.residual_history.push_back(rk);
      stats.iterations = total;
      if (hnorm < 1e-14) {
        breakdown = true;
        ++k;
        break;
      }
      if (rk <= tol || total >= max_iter) {
        ++k;
        break;
      }
      std::vector<S> vk(z);
      for (int i = 0; i < n; ++i) vk[i] /= hnorm;
      v.push_back(std::move(vk));
    }

    // Back substitution for the least-squares coefficients.
    std::vector<S> y(k, S(0));
    for (int i = k - 1; i >= 0; --i) {
      S acc = g[i];
      for (int j = i + 1; j < k; ++j) acc -= hcol[j][i] * y[j];
      y[i] = acc / hcol[i][i];
    }
    for (int i = 0; i < n; ++i) {
      S acc(0);
      for (int j = 0; j < k; ++j) acc += v[j][i] * y[j];
      x[i] += acc;
    }

    double rel_now = (k > 0) ? abs_of(g[k]) / bnorm
                             : stats.residual_history.back();
    if (breakdown || rel_now <= tol) {
      stats.converged = true;
      return stats;
    }
    if (total >= max_iter) return stats;
  }
}

}  // namespace stagemg
