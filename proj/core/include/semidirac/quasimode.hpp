// semidirac/quasimode.hpp
//
// The explicit trial functions of the spectral theorems, evaluated by
// quadrature of closed forms and never through an assembled matrix:
//
//   * Weyl sequences psi_n = (u_n, +-u_n), u_n = phi_n e^{ikx},
//     phi_n(x, y) = phi(x/n, y/n) / n.
//   * The box trial v = (psi, psi), psi = u1(x) u2(y) the Dirichlet ground
//     mode of [a, b]^2, and its energy trinomial and bound-state window.
//   * The logarithmic cutoff g_n and its derivative integrals.
//   * The perturbation criterion A_eps (printed and re-derived forms), the
//     threshold eps(delta), and the g_n trial energy.
//   * The square identity ||T u||^2 for closed-form BC-admissible trials.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semidirac/lattice.hpp"

namespace semidirac {

/// Value and the derivatives the constructions need.
struct Jet {
  double v = 0, x = 0, y = 0, xx = 0;
};

/// Least-squares slope of log(y) against log(x). Needs >= 2 points, all positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Weyl sequences

/// Reference bump: C exp(-1/(1 - rho^2)), rho = |(x, y) - (0, 3)| / 2, with C
/// chosen so that ||phi|| = 1/sqrt(2). Support: the closed disk of radius 2
/// about (0, 3), strictly inside the half-plane.
Jet reference_bump(double x, double y);
/// ||phi|| by quadrature (1/sqrt(2) by construction).
double reference_bump_norm();

/// n >= 1 and |mu| >= delta; branch = sign(mu), k = sqrt(|mu| - delta).
struct WeylTrial {
  int n = 1;
  double mu = 0;
};

struct WeylResult {
  int n = 0;
  double k = 0;
  double mu = 0;
  int branch = 1;         // +1: (u, u); -1: (u, -u)
  double residual = 0;    // ||T psi_n - mu psi_n||
  double bound_rhs = 0;   // 2(||d_y phi||^2 + 4k^2 ||d_x phi||^2)/n^2 + 2||d_xx phi||^2/n^4
  double norm = 0;        // ||psi_n|| (1 to quadrature accuracy)
};

/// Throws InputError for n < 1 or mu inside the gap.
WeylResult weyl_residual(const WeylTrial& trial, const Params& params);

// ---------------------------------------------------------------------------
// Box trial

/// q(V0) = 2V0^2 + 4(l1 + delta)V0 + 2 l1 + 4 delta l1 + 2 l1^2 with
/// l1 = pi^2/(b - a)^2. Throws InputError unless 0 < a < b.
double box_energy_analytic(double a, double b, double v0, const Params& params);

/// ||H v||^2 - delta^2 ||v||^2 for the box trial by Gauss quadrature on [a, b]^2
/// (quad_order points per panel) of the analytic sine-mode derivatives.
double box_energy_numeric(double a, double b, double v0, const Params& params, int quad_order);

/// (V1, V2) = -(l1 + delta) -+ sqrt(delta^2 - l1) when l1 < delta^2, else none.
std::optional<std::pair<double, double>> boundstate_window(const Params& params, double a,
                                                           double b);

// ---------------------------------------------------------------------------
// Cutoff sequence

/// Profile g on [0, 1]: 0 <= g <= 1, g = 0 on [0, 1/9], g = 1 on [1/2, 1].
struct CutoffProfile {
  std::string name;
  std::function<double(double)> g, dg, d2g;
};

/// Degree-7 smoothstep between 1/9 and 1/2 (the reference profile).
CutoffProfile smoothstep7_profile();
/// C-infinity transition 1 / (1 + exp(1/s - 1/(1 - s))), s the rescaled variable.
CutoffProfile exp_logistic_profile();
/// User profile; validated by validate_profile.
CutoffProfile custom_profile(std::string name, std::function<double(double)> g,
                             std::function<double(double)> dg,
                             std::function<double(double)> d2g);
/// Samples the plateaus and the range; throws InputError on a violation.
void validate_profile(const CutoffProfile& profile);

struct ProfileIntegrals {
  double g1 = 0;  // int_0^1 |g'|^2
  double g2 = 0;  // int_0^1 |g''|^2
};
ProfileIntegrals profile_integrals(const CutoffProfile& profile);

/// g_n and its derivatives at (x, y) (radial formula of the cutoff sequence).
Jet cutoff_jet(int n, const CutoffProfile& profile, double x, double y);

struct CutoffIntegrals {
  int n = 0;
  double Ix = 0, Iy = 0, Ixx = 0;  // polar quadrature over the half-plane annulus
  double closed_form = 0;          // (pi/2)(1/ln n) int |g'|^2
  double ixx_bound = 0;            // (3pi/4)/(n^2 ln^3 n) int|g''|^2 + pi/(n^2 ln n) int|g'|^2
  double first_deriv_identity_rel_err = 0;  // max(|Ix - cf|, |Iy - cf|) / cf
  double second_deriv_bound_slack = 0;      // ixx_bound - Ixx
};

/// Throws InputError for n < 2 or an invalid profile.
CutoffIntegrals cutoff_derivative_integrals(int n, const CutoffProfile& profile, int quad_order);

// ---------------------------------------------------------------------------
// Perturbation criterion. W is grid-sampled and taken as 0 off the grid;
// integrals use the trapezoid weights of `grid`.

/// Literal printed integrand: eps^2 w11^2 + eps^2 |w12|^2 + 4 delta eps Re w12
/// + eps^2 |w21|^2 + eps^2 w22 (w22 unsquared, as printed).
double a_eps_paper(const PerturbationW& w, const Grid2D& grid, double eps, const Params& params);

/// Re-derived limit: (delta + eps w11 + eps Re w12)^2 + eps^2 (Im w12)^2
/// + (delta + eps w22 + eps Re w21)^2 + eps^2 (Im w21)^2 - 2 delta^2.
double a_eps_derived(const PerturbationW& w, const Grid2D& grid, double eps,
                     const Params& params);

struct AepsReport {
  double paper = 0, derived = 0;
  bool divergent = false;  // |paper - derived| > 1e-9 max(|paper|, |derived|)
};
AepsReport a_eps_report(const PerturbationW& w, const Grid2D& grid, double eps,
                        const Params& params);

struct ThresholdReport {
  double epsilon = 0;         // eps(delta)
  double at_small_delta = 0;  // eps(1e-3)
  double at_large_delta = 0;  // eps(1e3)
  bool limits_hold = false;   // eps(1e-3) < 1e-2 eps(delta=1) and eps(1e3) > 1e2 eps(delta=1)
};

/// eps(delta) = -4 delta int Re w12 / (||w11||^2 + ||w22||^2 + ||w12||^2 + ||w21||^2).
/// Throws InputError unless int Re w12 < 0 and the denominator is > 0.
ThresholdReport eps_threshold(const PerturbationW& w, const Grid2D& grid, const Params& params);

/// ||H_eps psi_n||^2 - delta^2 ||psi_n||^2 for psi_n = (g_n, g_n): the W = 0
/// part 2 Iy + 2 Ixx + 4 delta Ix (polar quadrature) plus the W-dependent part
/// summed over the grid nodes with g_n evaluated in closed form.
double gn_trial_energy(const PerturbationW& w, const Grid2D& grid, double eps,
                       const Params& params, int n, const CutoffProfile& profile,
                       int quad_order);

// ---------------------------------------------------------------------------
// Square identity

struct ComplexJet {
  cplx v, x, y, xx;
};

/// Closed-form trial (u1, u2) on the half-plane with u1 = u2 on y = 0.
struct SquareTrial {
  std::string name;
  std::function<ComplexJet(double, double)> u1, u2;

  /// max |u1 - u2| over sample points of y = 0.
  double bc_defect() const;
};

/// Three Gaussian-type BC-admissible trials (one complex-valued).
std::vector<SquareTrial> square_identity_trials();

struct SquareIdentity {
  double lhs = 0;            // ||T u||^2
  double paper_rhs = 0;      // ||grad u||^2 + ||d_xx u||^2 + 2 delta ||d_x u||^2 + delta^2 ||u||^2
  double corrected_rhs = 0;  // ||d_y u||^2 + ||d_xx u||^2 + 2 delta ||d_x u||^2 + delta^2 ||u||^2
  double dx_norm2 = 0;       // ||d_x u||^2 = paper_rhs - corrected_rhs
  double paper_rel_err = 0;
  double corrected_rel_err = 0;
};

/// Both sides by tensor Gauss quadrature on [-10, 10] x [0, 10].
SquareIdentity square_identity(const SquareTrial& trial, const Params& params);

}  // namespace semidirac
