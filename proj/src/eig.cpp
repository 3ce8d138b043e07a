#include "eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stagemg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/** In-place Householder reduction of a real square matrix to upper
 *  Hessenberg form. The similarity transform is not accumulated. */
void hessenberg_real(DenseMatrix<double>& h) {
  int n = h.rows();
  std::vector<double> v(n);
  for (int k = 0; k + 2 < n; ++k) {
    double norm2 = 0.0;
    for (int i = k + 1; i < n; ++i) norm2 += h(i, k) * h(i, k);
    double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    double x0 = h(k + 1, k);
    double sigma = (x0 >= 0.0) ? norm : -norm;
    // v = x + sigma * e1; reflector P = I - 2 v v^T / (v^T v)
    double beta = norm2 + sigma * x0;  // = (v^T v) / 2
    if (beta == 0.0) continue;
    v[k + 1] = x0 + sigma;
    for (int i = k + 2; i < n; ++i) v[i] = h(i, k);
    for (int j = k; j < n; ++j) {
      double s = 0.0;
      for (int i = k + 1; i < n; ++i) s += v[i] * h(i, j);
      s /= beta;
      for (int i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      s /= beta;
      for (int j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
    }
    h(k + 1, k) = -sigma;
    for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

/** Complex Householder reduction to upper Hessenberg form. */
void hessenberg_complex(DenseMatrix<cdouble>& h) {
  int n = h.rows();
  std::vector<cdouble> v(n);
  for (int k = 0; k + 2 < n; ++k) {
    double norm2 = 0.0;
    for (int i = k + 1; i < n; ++i) norm2 += std::norm(h(i, k));
    double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    cdouble x0 = h(k + 1, k);
    cdouble phase = (x0 == cdouble(0)) ? cdouble(1) : x0 / std::abs(x0);
    cdouble alpha = -phase * norm;
    v[k + 1] = x0 - alpha;
    for (int i = k + 2; i < n; ++i) v[i] = h(i, k);
    double vnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
    if (vnorm2 == 0.0) continue;
    double tau = 2.0 / vnorm2;
    for (int j = k; j < n; ++j) {
      cdouble s(0);
      for (int i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
      s *= tau;
      for (int i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    for (int i = 0; i < n; ++i) {
      cdouble s(0);
      for (int j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      s *= tau;
      for (int j = k + 1; j < n; ++j) h(i, j) -= s * std::conj(v[j]);
    }
    h(k + 1, k) = alpha;
    for (int i = k + 2; i < n; ++i) h(i, k) = cdouble(0);
  }
}

/** Francis double-shift QR on a real upper Hessenberg matrix; returns the
 *  eigenvalues in deflation order. Classic EISPACK-style sweep with
 *  exceptional shifts at iterations 10 and 20 per eigenvalue. */
std::vector<cdouble> hqr_eigenvalues(DenseMatrix<double>& h, int max_sweeps) {
  int n = h.rows();
  std::vector<cdouble> eig;
  eig.reserve(n);
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 1); j < n; ++j) anorm += std::abs(h(i, j));
  if (anorm == 0.0) anorm = 1.0;

  int itn = max_sweeps;
  double t = 0.0;
  int en = n - 1;
  while (en >= 0) {
    int its = 0;
    for (;;) {
      // Look for a single small subdiagonal element.
      int l = en;
      while (l > 0) {
        double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(h(l, l - 1)) <= kEps * s) break;
        --l;
      }
      double x = h(en, en);
      if (l == en) {
        eig.emplace_back(x + t, 0.0);
        --en;
        break;
      }
      int na = en - 1;
      double y = h(na, na);
      double w = h(en, na) * h(na, en);
      if (l == na) {
        double p = (y - x) / 2.0;
        double q = p * p + w;
        double zz = std::sqrt(std::abs(q));
        x += t;
        if (q >= 0.0) {
          zz = p + std::copysign(zz, p);
          double e1 = x + zz;
          double e2 = (zz != 0.0) ? x - w / zz : e1;
          eig.emplace_back(e1, 0.0);
          eig.emplace_back(e2, 0.0);
        } else {
          eig.emplace_back(x + p, zz);
          eig.emplace_back(x + p, -zz);
        }
        en -= 2;
        break;
      }
      require(itn > 0, ErrorCode::NoConvergence,
              "dense_eigenvalues: QR sweep limit exceeded");
      if (its == 10 || its == 20) {
        // Exceptional shift.
        t += x;
        for (int i = 0; i <= en; ++i) h(i, i) -= x;
        double s = std::abs(h(en, na)) + std::abs(h(na, en - 2));
        x = 0.75 * s;
        y = x;
        w = -0.4375 * s * s;
      }
      ++its;
      --itn;
      // Look for two consecutive small subdiagonal elements.
      int m = en - 2;
      double p = 0.0, q = 0.0, r = 0.0;
      while (true) {
        double zz = h(m, m);
        double rr = x - zz;
        double ss = y - zz;
        p = (rr * ss - w) / h(m + 1, m) + h(m, m + 1);
        q = h(m + 1, m + 1) - zz - rr - ss;
        r = h(m + 2, m + 1);
        double sc = std::abs(p) + std::abs(q) + std::abs(r);
        p /= sc;
        q /= sc;
        r /= sc;
        if (m == l) break;
        double tst1 =
            std::abs(p) *
            (std::abs(h(m - 1, m - 1)) + std::abs(zz) + std::abs(h(m + 1, m + 1)));
        double tst2 = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
        if (tst2 <= kEps * tst1) break;
        --m;
      }
      for (int i = m + 2; i <= en; ++i) h(i, i - 2) = 0.0;
      for (int i = m + 3; i <= en; ++i) h(i, i - 3) = 0.0;
      // Double QR step on rows l..en and columns m..en.
      for (int k = m; k <= na; ++k) {
        bool notlast = (k != na);
        if (k != m) {
          p = h(k, k - 1);
          q = h(k + 1, k - 1);
          r = notlast ? h(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
        if (k != m) {
          h(k, k - 1) = -s * x;
        } else if (l != m) {
          h(k, k - 1) = -h(k, k - 1);
        }
        p += s;
        x = p / s;
        y = q / s;
        double zz = r / s;
        q /= p;
        r /= p;
        if (!notlast) {
          for (int j = k; j <= en; ++j) {
            double pp = h(k, j) + q * h(k + 1, j);
            h(k, j) -= pp * x;
            h(k + 1, j) -= pp * y;
          }
          int upper = std::min(en, k + 3);
          for (int i = l; i <= upper; ++i) {
            double pp = x * h(i, k) + y * h(i, k + 1);
            h(i, k) -= pp;
            h(i, k + 1) -= pp * q;
          }
        } else {
          for (int j = k; j <= en; ++j) {
            double pp = h(k, j) + q * h(k + 1, j) + r * h(k + 2, j);
            h(k, j) -= pp * x;
            h(k + 1, j) -= pp * y;
            h(k + 2, j) -= pp * zz;
          }
          int upper = std::min(en, k + 3);
          for (int i = l; i <= upper; ++i) {
            double pp = x * h(i, k) + y * h(i, k + 1) + zz * h(i, k + 2);
            h(i, k) -= pp;
            h(i, k + 1) -= pp * q;
            h(i, k + 2) -= pp * r;
          }
        }
      }
    }
  }
  return eig;
}

/** Wilkinson-shift QR on a complex upper Hessenberg matrix via explicit
 *  Givens factorizations of the shifted window. */
std::vector<cdouble> comqr_eigenvalues(DenseMatrix<cdouble>& h,
                                       int max_sweeps) {
  int n = h.rows();
  std::vector<cdouble> eig;
  eig.reserve(n);
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 1); j < n; ++j) anorm += std::abs(h(i, j));
  if (anorm == 0.0) anorm = 1.0;

  struct Rot {
    cdouble g11, g12, g21, g22;  // unitary 2x2 applied from the left
  };
  std::vector<Rot> rots(std::max(0, n - 1));

  int itn = max_sweeps;
  cdouble t(0.0, 0.0);
  int en = n - 1;
  while (en >= 0) {
    int its = 0;
    for (;;) {
      int l = en;
      while (l > 0) {
        double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(h(l, l - 1)) <= kEps * s) {
          h(l, l - 1) = cdouble(0);
          break;
        }
        --l;
      }
      if (l == en) {
        eig.push_back(h(en, en) + t);
        --en;
        break;
      }
      require(itn > 0, ErrorCode::NoConvergence,
              "dense_eigenvalues: QR sweep limit exceeded");
      cdouble shift;
      if (its == 10 || its == 20) {
        shift = cdouble(std::abs(h(en, en - 1)) +
                            (en >= 2 ? std::abs(h(en - 1, en - 2)) : 0.0),
                        0.0);
      } else {
        // Wilkinson shift: trailing 2x2 eigenvalue closest to h(en, en).
        cdouble s = h(en, en);
        cdouble x = h(en - 1, en) * h(en, en - 1);
        if (x != cdouble(0)) {
          cdouble y = (h(en - 1, en - 1) - s) / 2.0;
          cdouble z = std::sqrt(y * y + x);
          if (y.real() * z.real() + y.imag() * z.imag() < 0.0) z = -z;
          s -= x / (y + z);
        }
        shift = s;
      }
      ++its;
      --itn;
      for (int i = l; i <= en; ++i) h(i, i) -= shift;
      // QR factorization of the window by Givens rotations.
      for (int i = l; i < en; ++i) {
        cdouble a = h(i, i);
        cdouble b = h(i + 1, i);
        double r = std::sqrt(std::norm(a) + std::norm(b));
        Rot g;
        if (r == 0.0) {
          g = {cdouble(1), cdouble(0), cdouble(0), cdouble(1)};
        } else {
          g.g11 = std::conj(a) / r;
          g.g12 = std::conj(b) / r;
          g.g21 = -b / r;
          g.g22 = a / r;
        }
        rots[i] = g;
        for (int j = i; j <= en; ++j) {
          cdouble hi = h(i, j);
          cdouble hj = h(i + 1, j);
          h(i, j) = g.g11 * hi + g.g12 * hj;
          h(i + 1, j) = g.g21 * hi + g.g22 * hj;
        }
        h(i + 1, i) = cdouble(0);  // exact zero for the triangular factor
      }
      // Multiply R by the adjoint rotations from the right.
      for (int i = l; i < en; ++i) {
        const Rot& g = rots[i];
        // adjoint entries: [conj(g11) conj(g21); conj(g12) conj(g22)]
        for (int j = l; j <= std::min(en, i + 1); ++j) {
          cdouble ci = h(j, i);
          cdouble cj = h(j, i + 1);
          h(j, i) = ci * std::conj(g.g11) + cj * std::conj(g.g12);
          h(j, i + 1) = ci * std::conj(g.g21) + cj * std::conj(g.g22);
        }
      }
      for (int i = l; i <= en; ++i) h(i, i) += shift;
    }
  }
  return eig;
}

void sort_eigenvalues(std::vector<cdouble>& eig) {
  std::sort(eig.begin(), eig.end(), [](const cdouble& a, const cdouble& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

}  // namespace

std::vector<cdouble> dense_eigenvalues(DenseMatrix<double> a, int max_sweeps) {
  require(a.rows() == a.cols(), ErrorCode::InvalidArgument,
          "dense_eigenvalues: matrix must be square");
  int n = a.rows();
  if (max_sweeps < 0) max_sweeps = 30 * std::max(1, n);
  if (n == 0) return {};
  if (n == 1) return {cdouble(a(0, 0), 0.0)};
  hessenberg_real(a);
  std::vector<cdouble> eig = hqr_eigenvalues(a, max_sweeps);
  sort_eigenvalues(eig);
  return eig;
}

std::vector<cdouble> dense_eigenvalues(DenseMatrix<cdouble> a, int max_sweeps) {
  require(a.rows() == a.cols(), ErrorCode::InvalidArgument,
          "dense_eigenvalues: matrix must be square");
  int n = a.rows();
  if (max_sweeps < 0) max_sweeps = 30 * std::max(1, n);
  if (n == 0) return {};
  if (n == 1) return {a(0, 0)};
  hessenberg_complex(a);
  std::vector<cdouble> eig = comqr_eigenvalues(a, max_sweeps);
  sort_eigenvalues(eig);
  return eig;
}

double spectral_radius(const DenseMatrix<double>& a) {
  double rho = 0.0;
  for (const cdouble& ev : dense_eigenvalues(a)) rho = std::max(rho, std::abs(ev));
  return rho;
}

double spectral_radius(const DenseMatrix<cdouble>& a) {
  double rho = 0.0;
  for (const cdouble& ev : dense_eigenvalues(a)) rho = std::max(rho, std::abs(ev));
  return rho;
}

}  // namespace stagemg
