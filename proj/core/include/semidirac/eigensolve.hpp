// semidirac/eigensolve.hpp
//
// Eigenpairs of assembled operators.
//
//   dense_eigs        full spectrum (Householder tridiagonalization + implicit
//                     QL); the oracle path for small grids.
//   gap_eigs          eigenvalues in [lo, hi] by shift-invert Lanczos with full
//                     reorthogonalization, counted by an inertia certificate.
//   nearest_eigs      k eigenvalues closest to a shift (same machinery).
//   lowest_of_square  smallest eigenvalues of a SquareForm operator by LOBPCG.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semidirac/assembly.hpp"

namespace semidirac {

struct Eigenpair {
  double value = 0;
  double residual = 0;  // ||M v - lambda v|| / ||v||, re-verified by one matvec
  double participation_ratio = 0;
  double y_decay_rate = 0;
  std::vector<cplx> vector;  // unit 2-norm, first significant component real-positive
};

enum class CertificateKind { Certified, Uncertified };

struct SpectrumReport {
  std::vector<Eigenpair> pairs;  // ascending by value
  std::size_t iterations = 0;
  double shift = 0;
  double tolerance = 0;
  std::string method;
  CertificateKind certificate = CertificateKind::Uncertified;
  /// Number of eigenvalues in the requested interval (inertia count), when certified.
  std::optional<std::size_t> certified_count;

  std::vector<double> values() const;
};

struct SolverOptions {
  double tol = 1e-9;              // absolute residual bound
  std::size_t max_iter = 400;     // Krylov / LOBPCG iteration cap
  std::size_t dense_cap = 4000;   // dense_eigs dimension cap
  std::size_t block_size = 4;     // LOBPCG block
  bool use_factorization = true;  // false: MINRES inner solves, uncertified
  std::uint64_t seed = 0;         // start vectors
};

/// Dense Hermitian eigendecomposition of an explicit row-major n x n matrix.
/// Values ascending; eigenvector j occupies vectors[j*n, (j+1)*n).
struct DenseEigen {
  std::vector<double> values;
  std::vector<cplx> vectors;
};
DenseEigen hermitian_eigen(std::vector<cplx> a, std::size_t n, bool want_vectors = true);

/// Symmetric tridiagonal eigenproblem (implicit QL). d: diagonal, e[i]:
/// coupling of i and i+1 (e[n-1] unused). `z` holds n vectors of length n
/// (vector j at z[j*n...]) and is rotated in place when non-empty. Unsorted.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                    std::size_t n);

SpectrumReport dense_eigs(const HermitianOperator& op, const SolverOptions& opt = {});

SpectrumReport gap_eigs(const HermitianOperator& op, double lo, double hi, std::size_t k,
                        const SolverOptions& opt = {});

SpectrumReport nearest_eigs(const HermitianOperator& op, double shift, std::size_t k,
                            const SolverOptions& opt = {});

SpectrumReport lowest_of_square(const HermitianOperator& q, std::size_t k,
                                const SolverOptions& opt = {});

/// Number of eigenvalues of `op` below `x`, from the LDL^H inertia of op - x I.
std::size_t count_below(const HermitianOperator& op, double x);

struct Localization {
  double participation_ratio;
  double y_decay_rate;
};

/// participation_ratio = 1 / (N sum |v_i|^4) for the normalized vector;
/// y_decay_rate = least-squares slope of log(row mass) against y over the rows
/// with y >= y_max / 2. Throws InputError on a zero vector.
Localization localization_metrics(std::span<const cplx> v, const Grid2D& grid);

/// ||M v - lambda v|| / ||v|| by one matvec.
double residual_norm(const HermitianOperator& op, std::span<const cplx> v, double lambda);

}  // namespace semidirac
