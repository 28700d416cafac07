// Banded block LDL^H factorization with fixed 1x1 / 2x2 pivot blocks. The
// kernels are templated on the scalar so real matrices (the square form) are
// factored in real arithmetic.
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <type_traits>

#include "semidirac/errors.hpp"
#include "semidirac/sparse.hpp"

namespace semidirac {

namespace {

double conj_of(double v) { return v; }
cplx conj_of(cplx v) { return std::conj(v); }
double real_of(double v) { return v; }
double real_of(cplx v) { return v.real(); }
double norm_of(double v) { return v * v; }
double norm_of(cplx v) { return std::norm(v); }

template <class T>
struct Band {
  T* data;
  std::size_t bw;
  T& operator()(std::size_t r, std::size_t c) const { return data[c * (bw + 1) + (r - c)]; }
};

template <class T>
void factor(Band<T> band, std::size_t n, const std::vector<std::size_t>& blocks,
            const std::vector<std::size_t>& block_start, double tiny, Inertia& inertia) {
  const std::size_t bw = band.bw;
  std::vector<T> col0, col1, l0, l1;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t k = block_start[b];
    if (blocks[b] == 1) {
      const double d = real_of(band(k, k));
      if (std::abs(d) <= tiny)
        throw FactorizationError("singular 1x1 pivot at row " + std::to_string(k));
      (d < 0 ? inertia.negative : inertia.positive)++;
      const std::size_t last = std::min(n - 1, k + bw);
      const std::size_t m = last - k;
      col0.assign(m, T{});
      for (std::size_t t = 0; t < m; ++t) col0[t] = band(k + 1 + t, k);
      for (std::size_t tc = 0; tc < m; ++tc) {
        const T f = conj_of(col0[tc]) / d;
        if (f == T{}) continue;
        T* colc = &band.data[(k + 1 + tc) * (bw + 1)];
        for (std::size_t tr = tc; tr < m; ++tr) colc[tr - tc] -= col0[tr] * f;
      }
      for (std::size_t t = 0; t < m; ++t) band(k + 1 + t, k) = col0[t] / d;
      band(k, k) = T(1.0 / d);
    } else {
      const double d00 = real_of(band(k, k)), d11 = real_of(band(k + 1, k + 1));
      const T d10 = band(k + 1, k);
      const double det = d00 * d11 - norm_of(d10);
      const double mag = std::abs(d00) + std::abs(d11) + std::sqrt(norm_of(d10));
      if (std::abs(det) <= tiny * mag)
        throw FactorizationError("singular 2x2 pivot at row " + std::to_string(k));
      if (det < 0) {
        inertia.negative++;
        inertia.positive++;
      } else {
        (d00 + d11 < 0 ? inertia.negative : inertia.positive) += 2;
      }
      const T i00 = T(d11 / det), i11 = T(d00 / det);
      const T i10 = -d10 / det, i01 = conj_of(i10);
      const std::size_t last = std::min(n - 1, k + bw);
      const std::size_t m = last >= k + 2 ? last - k - 1 : 0;
      col0.assign(m, T{});
      col1.assign(m, T{});
      for (std::size_t t = 0; t < m; ++t) {
        const std::size_t r = k + 2 + t;
        col0[t] = (r - k <= bw) ? band(r, k) : T{};
        col1[t] = band(r, k + 1);
      }
      // l_r = a_r * D^{-1}; update A(r,c) -= l_r * a_c^H.
      l0.resize(m);
      l1.resize(m);
      for (std::size_t t = 0; t < m; ++t) {
        l0[t] = col0[t] * i00 + col1[t] * i10;
        l1[t] = col0[t] * i01 + col1[t] * i11;
      }
      for (std::size_t tc = 0; tc < m; ++tc) {
        const T f0 = conj_of(col0[tc]), f1 = conj_of(col1[tc]);
        if (f0 == T{} && f1 == T{}) continue;
        T* colc = &band.data[(k + 2 + tc) * (bw + 1)];
        for (std::size_t tr = tc; tr < m; ++tr) colc[tr - tc] -= l0[tr] * f0 + l1[tr] * f1;
      }
      for (std::size_t t = 0; t < m; ++t) {
        band(k + 2 + t, k) = l0[t];
        band(k + 2 + t, k + 1) = l1[t];
      }
      band(k, k) = i00;
      band(k + 1, k + 1) = i11;
      band(k + 1, k) = i10;
    }
  }
}

// Solves in place for nr right-hand sides stored row-major (y[k * nr + j]),
// already in the permuted ordering.
template <class T>
void solve_permuted(Band<T> band, std::size_t n, const std::vector<std::size_t>& blocks,
                    const std::vector<std::size_t>& block_start, std::vector<cplx>& y,
                    std::size_t nr) {
  const std::size_t bw = band.bw;
  const std::size_t nb = blocks.size();
  // Forward: L y = b.
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const std::size_t k = block_start[bi], s = blocks[bi];
    for (std::size_t t = 0; t < s; ++t) {
      const std::size_t c = k + t;
      const std::size_t last = std::min(n - 1, c + bw);
      const T* col = &band.data[c * (bw + 1)];
      const cplx* yc = &y[c * nr];
      for (std::size_t r = k + s; r <= last; ++r) {
        const T l = col[r - c];
        if (l == T{}) continue;
        cplx* yr = &y[r * nr];
        for (std::size_t j = 0; j < nr; ++j) yr[j] -= l * yc[j];
      }
    }
  }
  // Block diagonal.
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const std::size_t k = block_start[bi];
    cplx* y0 = &y[k * nr];
    if (blocks[bi] == 1) {
      const T d = band(k, k);
      for (std::size_t j = 0; j < nr; ++j) y0[j] *= d;
    } else {
      const T i00 = band(k, k), i11 = band(k + 1, k + 1), i10 = band(k + 1, k);
      cplx* y1 = &y[(k + 1) * nr];
      for (std::size_t j = 0; j < nr; ++j) {
        const cplx a = y0[j], c = y1[j];
        y0[j] = i00 * a + conj_of(i10) * c;
        y1[j] = i10 * a + i11 * c;
      }
    }
  }
  // Backward: L^H x = z.
  std::vector<cplx> acc(nr);
  for (std::size_t bi = nb; bi-- > 0;) {
    const std::size_t k = block_start[bi], s = blocks[bi];
    for (std::size_t t = 0; t < s; ++t) {
      const std::size_t c = k + t;
      const std::size_t last = std::min(n - 1, c + bw);
      const T* col = &band.data[c * (bw + 1)];
      std::fill(acc.begin(), acc.end(), cplx{});
      for (std::size_t r = k + s; r <= last; ++r) {
        const T l = conj_of(col[r - c]);
        if (l == T{}) continue;
        const cplx* yr = &y[r * nr];
        for (std::size_t j = 0; j < nr; ++j) acc[j] += l * yr[j];
      }
      cplx* yc = &y[c * nr];
      for (std::size_t j = 0; j < nr; ++j) yc[j] -= acc[j];
    }
  }
}

}  // namespace

BandLdl::BandLdl(const CsrMatrix& a, double shift, PivotPlan plan)
    : n_(a.size()), shift_(shift), plan_(std::move(plan)) {
  if (plan_.perm.size() != n_) throw DimensionError("pivot plan permutation has wrong size");
  if (std::accumulate(plan_.blocks.begin(), plan_.blocks.end(), std::size_t{0}) != n_)
    throw DimensionError("pivot plan blocks do not cover the matrix");
  inv_perm_.assign(n_, n_);
  for (std::size_t k = 0; k < n_; ++k) {
    if (plan_.perm[k] >= n_ || inv_perm_[plan_.perm[k]] != n_)
      throw DimensionError("pivot plan is not a permutation");
    inv_perm_[plan_.perm[k]] = k;
  }
  block_start_.reserve(plan_.blocks.size());
  std::size_t p = 0;
  for (std::size_t s : plan_.blocks) {
    if (s != 1 && s != 2) throw DimensionError("pivot blocks must have size 1 or 2");
    block_start_.push_back(p);
    p += s;
  }

  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  std::size_t bw = 0;
  real_ = true;
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
      const std::size_t pr = inv_perm_[r], pc = inv_perm_[cols[k]];
      bw = std::max(bw, pr > pc ? pr - pc : pc - pr);
      if (vals[k].imag() != 0.0) real_ = false;
    }
  // One extra sub-diagonal holds the L entries produced by 2x2 pivots.
  bw_ = bw + 1;

  double scale = std::abs(shift_);
  for (const auto& v : vals) scale = std::max(scale, std::abs(v));
  const double tiny = 1e-14 * std::max(scale, 1e-300);

  auto fill = [&](auto& store) {
    using T = typename std::decay_t<decltype(store)>::value_type;
    store.assign(n_ * (bw_ + 1), T{});
    Band<T> band{store.data(), bw_};
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
        const std::size_t pr = inv_perm_[r], pc = inv_perm_[cols[k]];
        if (pr < pc) continue;
        if constexpr (std::is_same_v<T, double>)
          band(pr, pc) += vals[k].real();
        else
          band(pr, pc) += vals[k];
      }
    for (std::size_t k = 0; k < n_; ++k) band(k, k) -= shift_;
    factor(band, n_, plan_.blocks, block_start_, tiny, inertia_);
  };
  if (real_)
    fill(rband_);
  else
    fill(band_);
}

void BandLdl::solve(std::span<const cplx> b, std::span<cplx> x) const {
  if (b.size() != n_ || x.size() != n_) throw DimensionError("band solve: dimension mismatch");
  std::vector<cplx> y(n_);
  for (std::size_t k = 0; k < n_; ++k) y[k] = b[plan_.perm[k]];
  if (real_)
    solve_permuted(Band<double>{const_cast<double*>(rband_.data()), bw_}, n_, plan_.blocks,
                   block_start_, y, 1);
  else
    solve_permuted(Band<cplx>{const_cast<cplx*>(band_.data()), bw_}, n_, plan_.blocks,
                   block_start_, y, 1);
  for (std::size_t k = 0; k < n_; ++k) x[plan_.perm[k]] = y[k];
}

void BandLdl::solve_many(const std::vector<std::vector<cplx>>& b,
                         std::vector<std::vector<cplx>>& x) const {
  const std::size_t nr = b.size();
  for (const auto& v : b)
    if (v.size() != n_) throw DimensionError("band solve: dimension mismatch");
  std::vector<cplx> y(n_ * nr);
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t j = 0; j < nr; ++j) y[k * nr + j] = b[j][plan_.perm[k]];
  if (nr > 0) {
    if (real_)
      solve_permuted(Band<double>{const_cast<double*>(rband_.data()), bw_}, n_, plan_.blocks,
                     block_start_, y, nr);
    else
      solve_permuted(Band<cplx>{const_cast<cplx*>(band_.data()), bw_}, n_, plan_.blocks,
                     block_start_, y, nr);
  }
  x.resize(nr);
  for (std::size_t j = 0; j < nr; ++j) {
    x[j].resize(n_);
    for (std::size_t k = 0; k < n_; ++k) x[j][plan_.perm[k]] = y[k * nr + j];
  }
}

}  // namespace semidirac
