#include "semidirac/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "semidirac/errors.hpp"

namespace semidirac {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> cols, std::vector<cplx> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (row_ptr_.size() != n_ + 1 || cols_.size() != values_.size() ||
      row_ptr_.back() != values_.size())
    throw DimensionError("inconsistent CSR arrays");
}

cplx CsrMatrix::at(std::size_t r, std::size_t c) const noexcept {
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

void CsrMatrix::multiply(std::span<const cplx> x, std::span<cplx> y) const {
  if (x.size() != n_ || y.size() != n_) throw DimensionError("matvec: dimension mismatch");
  for (std::size_t r = 0; r < n_; ++r) {
    cplx s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[r] = s;
  }
}

double CsrMatrix::hermitian_defect() const noexcept {
  double d = 0.0;
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      d = std::max(d, std::abs(values_[k] - std::conj(at(cols_[k], r))));
  return d;
}

CsrMatrix CsrMatrix::hermitian_part() const {
  // Union pattern, row by row.
  std::vector<std::set<std::size_t>> pattern(n_);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      pattern[r].insert(cols_[k]);
      pattern[cols_[k]].insert(r);
    }
  std::vector<std::size_t> rp(n_ + 1, 0), cols;
  std::vector<cplx> vals;
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c : pattern[r]) {
      // Compute the upper-triangle value once and mirror it so the result is
      // Hermitian bit for bit.
      cplx h;
      if (r <= c) {
        h = 0.5 * (at(r, c) + std::conj(at(c, r)));
        if (r == c) h = {h.real(), 0.0};
      } else {
        h = std::conj(0.5 * (at(c, r) + std::conj(at(r, c))));
      }
      cols.push_back(c);
      vals.push_back(h);
    }
    rp[r + 1] = cols.size();
  }
  return CsrMatrix(n_, std::move(rp), std::move(cols), std::move(vals));
}

double CsrMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::norm_inf() const noexcept {
  double m = 0.0;
  for (std::size_t r = 0; r < n_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(values_[k]);
    m = std::max(m, s);
  }
  return m;
}

CsrMatrix CsrMatrix::scaled(double c) const {
  std::vector<cplx> v(values_);
  for (auto& x : v) x *= c;
  return CsrMatrix(n_, row_ptr_, cols_, std::move(v));
}

void TripletBuilder::add(std::size_t r, std::size_t c, cplx v) {
  if (r >= n_ || c >= n_) throw DimensionError("triplet index out of range");
  entries_.push_back({r, c, v});
}

CsrMatrix TripletBuilder::build() const {
  std::vector<Entry> e(entries_);
  std::stable_sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  std::vector<std::size_t> rp(n_ + 1, 0), cols;
  std::vector<cplx> vals;
  cols.reserve(e.size());
  vals.reserve(e.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < n_; ++r) {
    while (k < e.size() && e[k].r == r) {
      const std::size_t c = e[k].c;
      cplx s = 0.0;
      while (k < e.size() && e[k].r == r && e[k].c == c) s += e[k++].v;
      cols.push_back(c);
      vals.push_back(s);
    }
    rp[r + 1] = cols.size();
  }
  return CsrMatrix(n_, std::move(rp), std::move(cols), std::move(vals));
}

}  // namespace semidirac
