// Dense Hermitian eigensolver: Householder reduction to complex tridiagonal
// form, a diagonal phase change to a real symmetric tridiagonal, implicit QL,
// and back-transformation of the eigenvectors.
#include <algorithm>
#include <cmath>
#include <numeric>

#include "semidirac/eigensolve.hpp"
#include "semidirac/errors.hpp"

namespace semidirac {

void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                    std::size_t n) {
  if (d.size() != n || e.size() < n) throw DimensionError("tridiagonal_ql: size mismatch");
  const bool vectors = !z.empty();
  if (vectors && z.size() != n * n) throw DimensionError("tridiagonal_ql: z must be n x n");
  if (n == 0) return;
  e[n - 1] = 0.0;
  constexpr double eps = 2.220446049250313e-16;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw ConvergenceError("tridiagonal QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (vectors) {
            double* zi = &z[i * n];
            double* zi1 = &z[(i + 1) * n];
            for (std::size_t k = 0; k < n; ++k) {
              f = zi1[k];
              zi1[k] = s * zi[k] + c * f;
              zi[k] = c * zi[k] - s * f;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

DenseEigen hermitian_eigen(std::vector<cplx> a, std::size_t n, bool want_vectors) {
  if (a.size() != n * n) throw DimensionError("hermitian_eigen: matrix must be n x n");
  DenseEigen out;
  if (n == 0) return out;

  // Householder reduction. Step k annihilates column k below the subdiagonal
  // with H_k = I - 2 v v^H acting on indices k+1..n-1; the trailing block is
  // updated as B <- H B H.
  std::vector<double> d(n, 0.0);
  std::vector<cplx> sub(n, 0.0);  // sub[k] = T(k+1, k)
  std::vector<std::vector<cplx>> reflectors(n > 2 ? n - 2 : 0);
  std::vector<cplx> p(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    // Column k below the diagonal equals conj of row k right of the diagonal.
    std::vector<cplx> v(m);
    double xnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = std::conj(a[k * n + k + 1 + i]);
      xnorm += std::norm(v[i]);
    }
    xnorm = std::sqrt(xnorm);
    double tail = 0.0;
    for (std::size_t i = 1; i < m; ++i) tail += std::norm(v[i]);
    if (tail == 0.0) {
      sub[k] = v[0];
      continue;  // already tridiagonal in this column; H_k = I
    }
    const cplx phase = std::abs(v[0]) > 0.0 ? v[0] / std::abs(v[0]) : cplx{1.0};
    const cplx alpha = -phase * xnorm;
    v[0] -= alpha;
    double vnorm = 0.0;
    for (const auto& x : v) vnorm += std::norm(x);
    vnorm = std::sqrt(vnorm);
    for (auto& x : v) x /= vnorm;
    sub[k] = alpha;

    // p = B v, K = v^H p, w = p - K v, B -= 2 (v w^H + w v^H).
    cplx kk = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const cplx* row = &a[(k + 1 + i) * n + k + 1];
      cplx s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += row[j] * v[j];
      p[i] = s;
      kk += std::conj(v[i]) * s;
    }
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - kk.real() * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      cplx* row = &a[(k + 1 + i) * n + k + 1];
      const cplx vi = v[i], wi = w[i];
      for (std::size_t j = 0; j < m; ++j)
        row[j] -= 2.0 * (vi * std::conj(w[j]) + wi * std::conj(v[j]));
    }
    reflectors[k] = std::move(v);
  }
  for (std::size_t k = 0; k < n; ++k) d[k] = a[k * n + k].real();
  if (n >= 2) sub[n - 2] = a[(n - 1) * n + n - 2];

  // Phase change D^H T D with real nonnegative subdiagonal.
  std::vector<cplx> phi(n, 1.0);
  std::vector<double> e(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double mag = std::abs(sub[k]);
    e[k] = mag;
    phi[k + 1] = mag > 0.0 ? phi[k] * (sub[k] / mag) : phi[k];
  }

  std::vector<double> z;
  if (want_vectors) {
    z.assign(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) z[k * n + k] = 1.0;
  }
  tridiagonal_ql(d, e, z, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.values[j] = d[order[j]];
  if (!want_vectors) return out;

  // Eigenvector of A: Q D z with Q = H_0 H_1 ... H_{n-3}.
  out.vectors.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cplx* y = &out.vectors[j * n];
    const double* zj = &z[order[j] * n];
    for (std::size_t i = 0; i < n; ++i) y[i] = phi[i] * zj[i];
    for (std::size_t k = reflectors.size(); k-- > 0;) {
      const auto& v = reflectors[k];
      if (v.empty()) continue;
      cplx s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += std::conj(v[i]) * y[k + 1 + i];
      s *= 2.0;
      for (std::size_t i = 0; i < v.size(); ++i) y[k + 1 + i] -= s * v[i];
    }
  }
  return out;
}

}  // namespace semidirac
