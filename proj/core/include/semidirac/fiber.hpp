// semidirac/fiber.hpp
//
// Translation invariance in x: with V = 0 the Fourier variable xi reduces T
// to the half-line family [[-i d_y, xi^2 + delta], [xi^2 + delta, i d_y]]
// with u1(0) = u2(0). This module supplies the plane-wave dispersion and the
// discretized fibers as an independent oracle for the 2D spectrum edge.
// Potentials break the reduction, so no entry point accepts one.

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "semidirac/assembly.hpp"
#include "semidirac/eigensolve.hpp"
#include "semidirac/lattice.hpp"

namespace semidirac {

/// (lambda+, lambda-) = +-sqrt(kappa^2 + (xi^2 + delta)^2).
std::pair<double, double> dispersion(double xi, double kappa, const Params& params);

/// Analytic fiber edge xi^2 + delta.
double fiber_edge(double xi, const Params& params);

/// 1D half-line discretization on [0, y_max] (ny nodes, Dirichlet wall at
/// y_max, u1 = u2 identified at y = 0). Throws InputError for ny < 4.
HermitianOperator fiber_operator(double xi, const Params& params, int ny, double y_max);

struct FiberSpectrum {
  double xi = 0;
  double edge = 0;                  // xi^2 + delta
  std::vector<double> eigenvalues;  // ascending; the `samples` closest to 0
  double min_abs = 0;               // smallest |eigenvalue|
};

/// Eigenvalues of the discretized fiber nearest to 0 (`samples` of them).
FiberSpectrum fiber_spectrum(double xi, const Params& params, int ny, double y_max,
                             std::size_t samples = 8);

/// Uniform grid of `count` points on [-xi_max, xi_max]; odd counts contain 0.
std::vector<double> xi_grid(double xi_max, std::size_t count);

/// fiber_spectrum over a xi grid on a bounded worker pool (0 = hardware
/// count); results are in grid order regardless of scheduling.
std::vector<FiberSpectrum> fiber_scan(const std::vector<double>& xis, const Params& params,
                                      int ny, double y_max, std::size_t threads = 0,
                                      std::size_t samples = 8);

/// min over the grid of xi^2 + delta. The grid must be non-empty and contain
/// 0, so the result is delta exactly.
double union_edge(const std::vector<double>& xis, const Params& params);

}  // namespace semidirac
