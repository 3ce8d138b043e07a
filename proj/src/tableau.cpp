#include "tableau.hpp"

#include <algorithm>
#include <cmath>

#include "eig.hpp"

namespace stagemg {

namespace {

constexpr int kMaxStages = 6;

/** Monomial coefficients of the Legendre polynomial P_n on [-1, 1],
 *  ascending powers, via the three-term recurrence. */
std::vector<double> legendre_coeffs(int n) {
  std::vector<double> pm1 = {1.0};       // P_0
  if (n == 0) return pm1;
  std::vector<double> p = {0.0, 1.0};    // P_1
  for (int k = 1; k < n; ++k) {
    // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
    std::vector<double> next(k + 2, 0.0);
    for (size_t i = 0; i < p.size(); ++i)
      next[i + 1] += (2.0 * k + 1.0) * p[i];
    for (size_t i = 0; i < pm1.size(); ++i) next[i] -= double(k) * pm1[i];
    for (double& v : next) v /= double(k + 1);
    pm1 = std::move(p);
    p = std::move(next);
  }
  return p;
}

double poly_eval(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
  return v;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
  if (coeffs.size() <= 1) return {0.0};
  std::vector<double> d(coeffs.size() - 1);
  for (size_t i = 1; i < coeffs.size(); ++i) d[i - 1] = double(i) * coeffs[i];
  return d;
}

/**
 * Real roots of a polynomial with real coefficients (ascending powers) via
 * the companion-matrix eigenvalues, polished by three Newton steps. The
 * input polynomials here have simple real roots, so the imaginary parts of
 * the companion eigenvalues are discarded after a sanity check.
 */
std::vector<double> poly_roots(const std::vector<double>& coeffs) {
  int deg = static_cast<int>(coeffs.size()) - 1;
  while (deg > 0 && coeffs[deg] == 0.0) --deg;
  require(deg >= 1, ErrorCode::InvalidArgument,
          "poly_roots: degree must be at least 1");
  DenseMatrix<double> comp(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
  std::vector<cdouble> eig = dense_eigenvalues(comp);
  std::vector<double> dp = poly_derivative(coeffs);
  std::vector<double> roots;
  roots.reserve(deg);
  for (const cdouble& ev : eig) {
    require(std::abs(ev.imag()) < 1e-6, ErrorCode::Internal,
            "poly_roots: unexpected complex root");
    double x = ev.real();
    for (int it = 0; it < 3; ++it) {
      double f = poly_eval(coeffs, x);
      double df = poly_eval(dp, x);
      if (df == 0.0) break;
      x -= f / df;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/** Coefficients of the numerator of the j-th Lagrange basis polynomial on
 *  nodes c, ascending powers, and the scalar denominator. */
std::pair<std::vector<double>, double> lagrange_numerator(
    const std::vector<double>& c, int j) {
  std::vector<double> num = {1.0};
  double den = 1.0;
  for (size_t k = 0; k < c.size(); ++k) {
    if (static_cast<int>(k) == j) continue;
    // num *= (x - c_k)
    std::vector<double> next(num.size() + 1, 0.0);
    for (size_t i = 0; i < num.size(); ++i) {
      next[i + 1] += num[i];
      next[i] -= c[k] * num[i];
    }
    num = std::move(next);
    den *= (c[j] - c[k]);
  }
  return {num, den};
}

void check_stage_count(int s) {
  require(s >= 1 && s <= kMaxStages, ErrorCode::InvalidArgument,
          "stage count must be between 1 and " + std::to_string(kMaxStages));
}

}  // namespace

std::string family_name(TableauFamily family) {
  switch (family) {
    case TableauFamily::RadauIIA:
      return "radau-iia";
    case TableauFamily::GaussLegendre:
      return "gauss-legendre";
  }
  fail(ErrorCode::InvalidArgument, "unknown tableau family");
}

TableauFamily family_from_name(const std::string& name) {
  if (name == "radau-iia" || name == "radauiia" || name == "radau")
    return TableauFamily::RadauIIA;
  if (name == "gauss-legendre" || name == "gauss" || name == "gl")
    return TableauFamily::GaussLegendre;
  fail(ErrorCode::InvalidArgument, "unknown tableau family: " + name);
}

DenseMatrix<double> collocation_matrix(const std::vector<double>& c) {
  int s = static_cast<int>(c.size());
  require(s >= 1, ErrorCode::InvalidArgument,
          "collocation_matrix: empty node set");
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j)
      require(std::abs(c[i] - c[j]) > 1e-12, ErrorCode::InvalidArgument,
              "collocation_matrix: duplicate nodes");
  DenseMatrix<double> A(s, s);
  for (int j = 0; j < s; ++j) {
    auto [num, den] = lagrange_numerator(c, j);
    for (int i = 0; i < s; ++i) {
      // integral of ell_j over [0, c_i]
      double acc = 0.0;
      double power = c[i];
      for (size_t m = 0; m < num.size(); ++m) {
        acc += num[m] * power / double(m + 1);
        power *= c[i];
      }
      A(i, j) = acc / den;
    }
  }
  return A;
}

ButcherTableau make_radau_iia(int s) {
  check_stage_count(s);
  ButcherTableau tab;
  tab.family = TableauFamily::RadauIIA;
  tab.s = s;
  if (s == 1) {
    tab.c = {1.0};
  } else {
    // Nodes on [0, 1] from the roots of P_{s-1} - P_s on [-1, 1]; the
    // right endpoint is a root and is pinned to exactly 1.
    std::vector<double> pm1 = legendre_coeffs(s - 1);
    std::vector<double> ps = legendre_coeffs(s);
    std::vector<double> diff(ps.size(), 0.0);
    for (size_t i = 0; i < pm1.size(); ++i) diff[i] += pm1[i];
    for (size_t i = 0; i < ps.size(); ++i) diff[i] -= ps[i];
    std::vector<double> roots = poly_roots(diff);
    tab.c.resize(s);
    for (int i = 0; i < s; ++i) tab.c[i] = (roots[i] + 1.0) / 2.0;
    tab.c[s - 1] = 1.0;
  }
  tab.A = collocation_matrix(tab.c);
  tab.b.resize(s);
  for (int j = 0; j < s; ++j) tab.b[j] = tab.A(s - 1, j);
  return tab;
}

ButcherTableau make_gauss_legendre(int s) {
  check_stage_count(s);
  ButcherTableau tab;
  tab.family = TableauFamily::GaussLegendre;
  tab.s = s;
  std::vector<double> roots = poly_roots(legendre_coeffs(s));
  tab.c.resize(s);
  for (int i = 0; i < s; ++i) tab.c[i] = (roots[i] + 1.0) / 2.0;
  tab.A = collocation_matrix(tab.c);
  // Quadrature weights are the integrals of the Lagrange basis over [0, 1].
  tab.b.resize(s);
  for (int j = 0; j < s; ++j) {
    auto [num, den] = lagrange_numerator(tab.c, j);
    double acc = 0.0;
    for (size_t m = 0; m < num.size(); ++m) acc += num[m] / double(m + 1);
    tab.b[j] = acc / den;
  }
  return tab;
}

ButcherTableau make_tableau(TableauFamily family, int s) {
  return (family == TableauFamily::RadauIIA) ? make_radau_iia(s)
                                             : make_gauss_legendre(s);
}

SpectralDecomposition eig_decompose(const ButcherTableau& tab) {
  int s = tab.s;
  SpectralDecomposition dec;
  dec.eigenvalues = dense_eigenvalues(tab.A);
  std::sort(dec.eigenvalues.begin(), dec.eigenvalues.end(),
            [](const cdouble& a, const cdouble& b) {
              if (a.imag() != b.imag()) return a.imag() < b.imag();
              return a.real() < b.real();
            });

  DenseMatrix<cdouble> Ac = to_complex(tab.A);
  dec.X = DenseMatrix<cdouble>(s, s);
  for (int j = 0; j < s; ++j) {
    // Inverse iteration on (A - lambda I); a nearly singular factorization
    // is exactly what makes this converge in a few sweeps.
    cdouble lambda = dec.eigenvalues[j];
    DenseMatrix<cdouble> shifted = Ac;
    for (int i = 0; i < s; ++i) shifted(i, i) -= lambda;
    DenseLu<cdouble> f;
    bool factored = false;
    double bump = 0.0;
    while (!factored) {
      try {
        f = lu_factor(shifted);
        factored = true;
      } catch (const Error&) {
        bump = (bump == 0.0) ? 1e-13 : bump * 10.0;
        require(bump < 1e-6, ErrorCode::Internal,
                "eig_decompose: cannot factor shifted matrix");
        for (int i = 0; i < s; ++i) shifted(i, i) -= cdouble(bump, 0.0);
      }
    }
    std::vector<cdouble> v(s);
    for (int i = 0; i < s; ++i) v[i] = cdouble(1.0 / (1.0 + i), 0.0);
    for (int it = 0; it < 4; ++it) {
      v = lu_solve(f, std::move(v));
      double norm = 0.0;
      for (const cdouble& x : v) norm += std::norm(x);
      norm = std::sqrt(norm);
      require(norm > 0.0, ErrorCode::Internal,
              "eig_decompose: inverse iteration collapsed");
      for (cdouble& x : v) x /= norm;
    }
    // Deterministic phase: largest-magnitude component made real positive.
    int imax = 0;
    for (int i = 1; i < s; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    cdouble phase = v[imax] / std::abs(v[imax]);
    for (int i = 0; i < s; ++i) dec.X(i, j) = v[i] / phase;
  }

  DenseLu<cdouble> xf;
  try {
    xf = lu_factor(dec.X);
  } catch (const Error&) {
    fail(ErrorCode::SingularMatrix,
         "eig_decompose: defective coefficient matrix (singular eigenvector "
         "matrix)");
  }
  dec.Xinv = lu_inverse(xf);

  // cond2 from the eigenvalues of X^H X.
  DenseMatrix<cdouble> gram = matmul(conj_transpose(dec.X), dec.X);
  std::vector<cdouble> sv = dense_eigenvalues(gram);
  double smin = 0.0, smax = 0.0;
  for (size_t i = 0; i < sv.size(); ++i) {
    double v = std::max(0.0, sv[i].real());
    if (i == 0) {
      smin = smax = v;
    } else {
      smin = std::min(smin, v);
      smax = std::max(smax, v);
    }
  }
  require(smin > 0.0, ErrorCode::SingularMatrix,
          "eig_decompose: defective coefficient matrix");
  dec.cond2 = std::sqrt(smax / smin);
  require(dec.cond2 < 1e12, ErrorCode::SingularMatrix,
          "eig_decompose: eigenvector matrix condition exceeds 1e12");
  return dec;
}

std::vector<SpectrumRow> spectrum_report(
    const std::vector<TableauFamily>& families, int s_min, int s_max) {
  require(s_min >= 1 && s_max <= kMaxStages && s_min <= s_max,
          ErrorCode::InvalidArgument, "spectrum_report: bad stage range");
  std::vector<SpectrumRow> rows;
  for (TableauFamily family : families) {
    for (int s = s_min; s <= s_max; ++s) {
      ButcherTableau tab = make_tableau(family, s);
      SpectralDecomposition dec = eig_decompose(tab);
      for (const cdouble& ev : dec.eigenvalues)
        rows.push_back(
            {family_name(family), s, ev.real(), ev.imag(), dec.cond2});
    }
  }
  return rows;
}

}  // namespace stagemg
