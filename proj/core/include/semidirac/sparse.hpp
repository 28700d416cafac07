// semidirac/sparse.hpp
//
// Compressed sparse row storage for complex matrices, a triplet builder, and
// the banded block LDL^H factorization used for shift-invert solves and
// inertia counts.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace semidirac {

using cplx = std::complex<double>;

class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
            std::vector<cplx> values);

  std::size_t size() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> cols() const noexcept { return cols_; }
  std::span<const cplx> values() const noexcept { return values_; }

  /// Entry (r, c), zero when not stored.
  cplx at(std::size_t r, std::size_t c) const noexcept;

  /// y = A x. Reentrant: safe to call concurrently on one matrix.
  void multiply(std::span<const cplx> x, std::span<cplx> y) const;

  /// max over stored (r, c) of |A(r,c) - conj(A(c,r))|.
  double hermitian_defect() const noexcept;
  /// (A + A^H) / 2 on the union pattern.
  CsrMatrix hermitian_part() const;
  /// Largest absolute entry.
  double max_abs() const noexcept;
  /// Infinity norm (max absolute row sum).
  double norm_inf() const noexcept;

  CsrMatrix scaled(double c) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<cplx> values_;
};

/// Accumulates (row, col, value) triplets; duplicates are summed in insertion
/// order so assembly is deterministic.
class TripletBuilder {
 public:
  explicit TripletBuilder(std::size_t n) : n_(n) {}
  void add(std::size_t r, std::size_t c, cplx v);
  CsrMatrix build() const;

 private:
  struct Entry {
    std::size_t r, c;
    cplx v;
  };
  std::size_t n_;
  std::vector<Entry> entries_;
};

/// Symmetric permutation plus a partition into contiguous pivot blocks of
/// size 1 or 2 (in permuted order).
struct PivotPlan {
  std::vector<std::size_t> perm;    // perm[new] = old
  std::vector<std::size_t> blocks;  // block sizes, summing to n
};

struct Inertia {
  std::size_t negative = 0, zero = 0, positive = 0;
};

/// Banded LDL^H of (A - shift*I) with fixed 1x1 / 2x2 pivot blocks. No
/// pivoting: a (near-)singular pivot block raises FactorizationError.
class BandLdl {
 public:
  BandLdl(const CsrMatrix& a, double shift, PivotPlan plan);

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }
  double shift() const noexcept { return shift_; }
  /// Sylvester inertia of A - shift*I read off the pivot blocks.
  Inertia inertia() const noexcept { return inertia_; }

  /// Solves (A - shift*I) x = b in the caller's (unpermuted) ordering.
  void solve(std::span<const cplx> b, std::span<cplx> x) const;
  /// Several right-hand sides in one sweep over the factor (x may alias b).
  void solve_many(const std::vector<std::vector<cplx>>& b,
                  std::vector<std::vector<cplx>>& x) const;
  /// True when A had no imaginary parts and the factor is stored in real arithmetic.
  bool is_real() const noexcept { return real_; }

 private:
  std::size_t n_ = 0, bw_ = 0;
  double shift_ = 0;
  bool real_ = false;
  PivotPlan plan_;
  std::vector<std::size_t> inv_perm_;
  std::vector<std::size_t> block_start_;
  // Column-major lower band: entry (r, c), c <= r <= c + bw, at
  // [c * (bw + 1) + (r - c)]. After factorization the strictly-lower part
  // holds L and the pivot blocks hold D^{-1}. Exactly one of the two is used.
  std::vector<cplx> band_;
  std::vector<double> rband_;
  Inertia inertia_;
};

}  // namespace semidirac
