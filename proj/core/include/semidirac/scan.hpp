// semidirac/scan.hpp
//
// Parameter sweeps that confront analytic predictions (bound-state window,
// A_eps sign) with eigensolver observations, plus grid-convergence studies
// and the delocalization probe.
//
// Assertion policy: the existence theorems are sufficient conditions, so only
// "predicted present => observed present" (and the V >= 0 absence result) is
// asserted; every other point is recorded as "unasserted".

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "semidirac/eigensolve.hpp"
#include "semidirac/lattice.hpp"

namespace semidirac {

/// Gap-detection window is (-gap_fraction delta, gap_fraction delta).
inline constexpr double gap_fraction = 0.95;
/// Localized: participation ratio below this and negative y decay rate.
inline constexpr double localized_participation = 0.2;
/// Delocalization probe noise band: PR may drop by at most this fraction.
inline constexpr double delocalization_band = 0.1;

struct ScanSolver {
  SolverOptions options;
  std::size_t k = 4;        // eigenpairs requested per point
  std::size_t threads = 0;  // worker pool size (0 = hardware concurrency)
};

struct ScanPoint {
  double axis_value = 0;
  std::string predicted = "none";  // "present" | "absent" | "none" | "nondecreasing"
  double prediction_value = 0;     // q(V), A_eps (derived) or 0
  bool asserted = false;
  std::size_t observed_count = 0;  // eigenvalues in the gap window
  double min_abs_lambda = 0;       // +inf when none observed
  double min_participation = 0;    // +inf when none observed
  bool localized = false;
  std::string agreement = "unasserted";  // "true" | "false" | "unasserted"
};

struct ScanResult {
  std::string axis;
  std::vector<ScanPoint> points;
  std::string note;  // domain / grid description

  /// No asserted point disagrees.
  bool all_agree() const;
};

/// Receives the predictions (observation fields at their defaults) before any solve.
using PredictionSink = std::function<void(const ScanResult&)>;

/// Box potential V on [a, b]^2 for each V in `v_grid`. The grid must contain
/// [a - 3w, b + 3w] in x and [0, b + 3w] in y, w = b - a; InputError otherwise.
ScanResult scan_potential(const Params& params, const Grid2D& grid, double a, double b,
                          const std::vector<double>& v_grid, const ScanSolver& solver,
                          const PredictionSink& sink = {});

/// H_eps = T + eps W for each eps. W must be self-adjoint and vanish on the
/// outer grid frame (compact support). The prediction is sign(a_eps_derived).
ScanResult scan_perturbation(const Params& params, const Grid2D& grid, const PerturbationW& w,
                             const std::vector<double>& eps_grid, const ScanSolver& solver,
                             const PredictionSink& sink = {});

/// Coincidence-case W: w12 = w21 = -1 on [-side/2, side/2] x [0, side], eps = 1.
PerturbationW coincidence_w(const Grid2D& grid, double side);

enum class Observable { GapEdge, BoundStateLambda, SquareFormMin };
std::string to_string(Observable o);
Observable observable_from_string(const std::string& name);

struct ConvergenceStudy {
  Observable observable = Observable::GapEdge;
  std::vector<int> ladder;  // nx per rung
  std::vector<double> h;
  std::vector<double> values;
  double fitted_order = 0;  // LS slope of log|v_{i+1} - v_i| against log h_i
};

/// Refines `domain` (its x/y extent; ny follows nx so that hy = hx) over the
/// nx ladder. GapEdge: min |lambda| of T (potential must be None).
/// BoundStateLambda: min |lambda| of H (potential must be BoxXY).
/// SquareFormMin: lowest eigenvalue of the square form (potential None).
/// Throws InputError for < 3 rungs or a ladder that is not strictly increasing.
ConvergenceStudy convergence_study(Observable observable, const std::vector<int>& ladder,
                                   const Params& params, const Grid2D& domain,
                                   const PotentialSpec& potential, const ScanSolver& solver);

/// Domains [-L, L] x [0, L] at fixed h for each L in the ladder; records the
/// participation ratio of the smallest-|lambda| eigenvector. With no potential
/// the non-decrease contract (within the noise band) is asserted; with a
/// BoxXY potential the points are recorded only.
ScanResult delocalization_probe(const Params& params, const std::vector<double>& domain_ladder,
                                double h, const PotentialSpec& potential,
                                const ScanSolver& solver);

}  // namespace semidirac
