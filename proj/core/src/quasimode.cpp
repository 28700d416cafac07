// Trial-function constructions of the spectral theorems, evaluated by
// quadrature of closed-form integrands.
#include "semidirac/quasimode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semidirac/errors.hpp"

namespace semidirac {

namespace {

constexpr double pi = std::numbers::pi;

// Bump geometry: disk of radius 2 about (0, 3).
constexpr double bump_radius = 2.0;
constexpr double bump_cy = 3.0;

// Unnormalized bump exp(-1/(1 - rho^2)) and its derivatives.
Jet raw_bump(double x, double y) {
  const double r2 = bump_radius * bump_radius;
  const double dy = y - bump_cy;
  const double q = 1.0 - (x * x + dy * dy) / r2;
  if (q <= 0.0) return {};
  const double e = std::exp(-1.0 / q);
  const double qx = -2.0 * x / r2, qy = -2.0 * dy / r2, qxx = -2.0 / r2;
  // f = -1/q: f_x = q_x / q^2, f_xx = q_xx / q^2 - 2 q_x^2 / q^3.
  const double fx = qx / (q * q), fy = qy / (q * q);
  const double fxx = qxx / (q * q) - 2.0 * qx * qx / (q * q * q);
  return {e, e * fx, e * fy, e * (fx * fx + fxx)};
}

// Integrates f over the disk of radius R about (cx, cy): composite Gauss in
// the radius, periodic trapezoid in the angle.
template <class F>
double integrate_disk(double cx, double cy, double radius, const F& f) {
  static const GaussRule rr = composite_gauss(0.0, 1.0, 48, 8);
  constexpr int nth = 96;
  double s = 0.0;
  for (std::size_t a = 0; a < rr.nodes.size(); ++a) {
    const double r = radius * rr.nodes[a];
    double ring = 0.0;
    for (int t = 0; t < nth; ++t) {
      const double th = 2.0 * pi * t / nth;
      ring += f(cx + r * std::cos(th), cy + r * std::sin(th));
    }
    s += rr.weights[a] * radius * r * ring * (2.0 * pi / nth);
  }
  return s;
}

double bump_scale() {
  static const double c = [] {
    const double i2 = integrate_disk(0.0, bump_cy, bump_radius, [](double x, double y) {
      const double v = raw_bump(x, y).v;
      return v * v;
    });
    return std::sqrt(0.5 / i2);
  }();
  return c;
}

struct BumpNorms {
  double dx2, dy2, dxx2;
};

const BumpNorms& bump_norms() {
  static const BumpNorms n = [] {
    BumpNorms b{};
    b.dx2 = integrate_disk(0.0, bump_cy, bump_radius, [](double x, double y) {
      const double v = reference_bump(x, y).x;
      return v * v;
    });
    b.dy2 = integrate_disk(0.0, bump_cy, bump_radius, [](double x, double y) {
      const double v = reference_bump(x, y).y;
      return v * v;
    });
    b.dxx2 = integrate_disk(0.0, bump_cy, bump_radius, [](double x, double y) {
      const double v = reference_bump(x, y).xx;
      return v * v;
    });
    return b;
  }();
  return n;
}

void check_box(double a, double b) {
  if (!(a > 0.0) || !(b > a) || !std::isfinite(b))
    throw InputError("box trial requires 0 < a < b");
}

double box_lambda1(double a, double b) { return pi * pi / ((b - a) * (b - a)); }

constexpr double plateau_lo = 1.0 / 9.0;
constexpr double plateau_hi = 0.5;
constexpr double transition = plateau_hi - plateau_lo;

double node_weight_sum(const Grid2D& grid, const std::function<double(std::size_t)>& f) {
  double s = 0.0;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) s += grid.weight(i, j) * f(grid.node(i, j));
  return s;
}

void check_w(const PerturbationW& w, const Grid2D& grid) {
  const std::size_t n = grid.node_count();
  if (w.w11.size() != n || w.w22.size() != n || w.w12.size() != n || w.w21.size() != n)
    throw DimensionError("perturbation W does not match the grid");
}

}  // namespace

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("loglog_slope: size mismatch");
  if (x.size() < 2) throw InputError("loglog_slope needs at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw InputError("loglog_slope needs positive data");
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = m * sxx - sx * sx;
  if (den == 0.0) throw InputError("loglog_slope: abscissae must differ");
  return (m * sxy - sx * sy) / den;
}

// ---------------------------------------------------------------------------
// Weyl sequences

Jet reference_bump(double x, double y) {
  const Jet j = raw_bump(x, y);
  const double c = bump_scale();
  return {c * j.v, c * j.x, c * j.y, c * j.xx};
}

double reference_bump_norm() {
  return std::sqrt(integrate_disk(0.0, bump_cy, bump_radius, [](double x, double y) {
    const double v = reference_bump(x, y).v;
    return v * v;
  }));
}

WeylResult weyl_residual(const WeylTrial& trial, const Params& params) {
  params.validate();
  if (trial.n < 1) throw InputError("Weyl trial needs n >= 1");
  const double delta = params.delta;
  if (!std::isfinite(trial.mu) || std::abs(trial.mu) < delta)
    throw InputError("Weyl trial: mu lies inside the gap (-delta, delta)");
  WeylResult out;
  out.n = trial.n;
  out.mu = trial.mu;
  out.branch = trial.mu > 0 ? 1 : -1;
  out.k = std::sqrt(std::abs(trial.mu) - delta);
  const double n = trial.n, k = out.k, mu = trial.mu, s = out.branch;
  const cplx I{0.0, 1.0};

  // In base coordinates X = x/n: phi_n = phi/n, d phi_n = d phi / n^2,
  // d_xx phi_n = phi_XX / n^3. The common factor e^{ikx} drops out of |r|^2.
  double res2 = 0.0, norm2 = 0.0;
  res2 = integrate_disk(0.0, bump_cy, bump_radius, [&](double x, double y) {
    const Jet p = reference_bump(x, y);
    const cplx u = p.v / n;
    const cplx uy = p.y / (n * n);
    const cplx uxx = p.xx / (n * n * n) + 2.0 * I * k * p.x / (n * n) - k * k * u;
    const cplx lu = -uxx + delta * u;
    const cplx r1 = -I * uy + s * lu - mu * u;
    const cplx r2 = lu + I * s * uy - mu * s * u;
    return std::norm(r1) + std::norm(r2);
  });
  norm2 = integrate_disk(0.0, bump_cy, bump_radius, [&](double x, double y) {
    const double u = reference_bump(x, y).v / n;
    return 2.0 * u * u;
  });
  // dx dy = n^2 dX dY.
  out.residual = std::sqrt(n * n * res2);
  out.norm = std::sqrt(n * n * norm2);
  const BumpNorms& b = bump_norms();
  out.bound_rhs = 2.0 * (b.dy2 + 4.0 * k * k * b.dx2) / (n * n) + 2.0 * b.dxx2 / (n * n * n * n);
  return out;
}

// ---------------------------------------------------------------------------
// Box trial

double box_energy_analytic(double a, double b, double v0, const Params& params) {
  params.validate();
  check_box(a, b);
  const double l1 = box_lambda1(a, b), d = params.delta;
  return 2.0 * v0 * v0 + 4.0 * (l1 + d) * v0 + 2.0 * l1 + 4.0 * d * l1 + 2.0 * l1 * l1;
}

double box_energy_numeric(double a, double b, double v0, const Params& params, int quad_order) {
  params.validate();
  check_box(a, b);
  const double len = b - a, amp = std::sqrt(2.0 / len), w = pi / len;
  const GaussRule rule = composite_gauss(a, b, 8, quad_order);
  const std::size_t m = rule.nodes.size();
  std::vector<double> u(m), du(m), ddu(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double ph = w * (rule.nodes[k] - a);
    u[k] = amp * std::sin(ph);
    du[k] = amp * w * std::cos(ph);
    ddu[k] = -w * w * u[k];
  }
  const double d = params.delta;
  const cplx I{0.0, 1.0};
  double hv2 = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double psi = u[i] * u[j];
      const double psi_y = u[i] * du[j];
      const double psi_xx = ddu[i] * u[j];
      const double l = -psi_xx + (d + v0) * psi;
      const cplx c1 = -I * psi_y + l;
      const cplx c2 = l + I * psi_y;
      const double wt = rule.weights[i] * rule.weights[j];
      hv2 += wt * (std::norm(c1) + std::norm(c2));
      v2 += wt * 2.0 * psi * psi;
    }
  return hv2 - d * d * v2;
}

std::optional<std::pair<double, double>> boundstate_window(const Params& params, double a,
                                                           double b) {
  params.validate();
  check_box(a, b);
  const double l1 = box_lambda1(a, b), d = params.delta;
  if (!(l1 < d * d)) return std::nullopt;
  const double root = std::sqrt(d * d - l1);
  return std::make_pair(-(l1 + d) - root, -(l1 + d) + root);
}

// ---------------------------------------------------------------------------
// Cutoff sequence

CutoffProfile smoothstep7_profile() {
  CutoffProfile p;
  p.name = "smoothstep7";
  p.g = [](double t) {
    const double s = (t - plateau_lo) / transition;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * s * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
  };
  p.dg = [](double t) {
    const double s = (t - plateau_lo) / transition;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double q = s * (1.0 - s);
    return 140.0 * q * q * q / transition;
  };
  p.d2g = [](double t) {
    const double s = (t - plateau_lo) / transition;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double q = s * (1.0 - s);
    return 420.0 * q * q * (1.0 - 2.0 * s) / (transition * transition);
  };
  return p;
}

CutoffProfile exp_logistic_profile() {
  // g(s) = 1 / (1 + exp(1/s - 1/(1-s))); g' = g(1-g) p, p = 1/s^2 + 1/(1-s)^2;
  // g'' = g'(1 - 2g) p + g(1-g) p', p' = -2/s^3 + 2/(1-s)^3.
  auto base = [](double s) {
    const double e = 1.0 / s - 1.0 / (1.0 - s);
    if (e > 700.0) return 0.0;
    if (e < -700.0) return 1.0;
    return 1.0 / (1.0 + std::exp(e));
  };
  CutoffProfile p;
  p.name = "exp_logistic";
  p.g = [base](double t) {
    const double s = (t - plateau_lo) / transition;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return base(s);
  };
  p.dg = [base](double t) {
    const double s = (t - plateau_lo) / transition;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double g = base(s);
    const double pp = 1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s));
    return g * (1.0 - g) * pp / transition;
  };
  p.d2g = [base](double t) {
    const double s = (t - plateau_lo) / transition;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double g = base(s);
    const double pp = 1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s));
    const double dp = -2.0 / (s * s * s) + 2.0 / ((1.0 - s) * (1.0 - s) * (1.0 - s));
    const double g1 = g * (1.0 - g) * pp;
    return (g1 * (1.0 - 2.0 * g) * pp + g * (1.0 - g) * dp) / (transition * transition);
  };
  return p;
}

CutoffProfile custom_profile(std::string name, std::function<double(double)> g,
                             std::function<double(double)> dg,
                             std::function<double(double)> d2g) {
  CutoffProfile p{std::move(name), std::move(g), std::move(dg), std::move(d2g)};
  validate_profile(p);
  return p;
}

void validate_profile(const CutoffProfile& profile) {
  if (!profile.g || !profile.dg || !profile.d2g)
    throw InputError("cutoff profile '" + profile.name + "' is missing a derivative");
  constexpr int samples = 400;
  constexpr double tol = 1e-12;
  for (int k = 0; k <= samples; ++k) {
    const double t = static_cast<double>(k) / samples;
    const double g = profile.g(t);
    if (!std::isfinite(g) || !std::isfinite(profile.dg(t)) || !std::isfinite(profile.d2g(t)))
      throw InputError("cutoff profile '" + profile.name + "' is not finite on [0, 1]");
    if (g < -tol || g > 1.0 + tol)
      throw InputError("cutoff profile '" + profile.name + "' leaves [0, 1]");
    if (t <= plateau_lo && std::abs(g) > tol)
      throw InputError("cutoff profile '" + profile.name + "' is not 0 on [0, 1/9]");
    if (t >= plateau_hi && std::abs(g - 1.0) > tol)
      throw InputError("cutoff profile '" + profile.name + "' is not 1 on [1/2, 1]");
  }
}

ProfileIntegrals profile_integrals(const CutoffProfile& profile) {
  ProfileIntegrals out;
  for (auto [a, b] : {std::pair{0.0, plateau_lo}, std::pair{plateau_lo, plateau_hi},
                      std::pair{plateau_hi, 1.0}}) {
    const GaussRule r = composite_gauss(a, b, 32, 10);
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      const double d1 = profile.dg(r.nodes[k]), d2 = profile.d2g(r.nodes[k]);
      out.g1 += r.weights[k] * d1 * d1;
      out.g2 += r.weights[k] * d2 * d2;
    }
  }
  return out;
}

Jet cutoff_jet(int n, const CutoffProfile& profile, double x, double y) {
  const double r = std::hypot(x, y);
  const double nn = n;
  if (r <= nn) return {1.0, 0.0, 0.0, 0.0};
  if (r >= nn * nn) return {};
  const double L = std::log(nn);
  const double t = (2.0 * L - std::log(r)) / L;
  const double g = profile.g(t), g1 = profile.dg(t), g2 = profile.d2g(t);
  const double r2 = r * r, r4 = r2 * r2;
  Jet j;
  j.v = g;
  j.x = -x / (r2 * L) * g1;
  j.y = -y / (r2 * L) * g1;
  j.xx = g2 * x * x / (r4 * L * L) + g1 * (x * x - y * y) / (r4 * L);
  return j;
}

CutoffIntegrals cutoff_derivative_integrals(int n, const CutoffProfile& profile,
                                            int quad_order) {
  if (n < 2) throw InputError("cutoff integrals need n >= 2");
  validate_profile(profile);
  const double L = std::log(static_cast<double>(n));
  // Polar coordinates over the upper half-plane annulus n < r < n^2, with
  // u = ln r and panel breaks where the profile switches (t = 1/2, t = 1/9).
  const GaussRule ang = composite_gauss(0.0, pi, 16, quad_order);
  CutoffIntegrals out;
  out.n = n;
  const double breaks[] = {L, (2.0 - plateau_hi) * L, (2.0 - plateau_lo) * L, 2.0 * L};
  for (int seg = 0; seg < 3; ++seg) {
    const GaussRule rad = composite_gauss(breaks[seg], breaks[seg + 1], 24, quad_order);
    for (std::size_t a = 0; a < rad.nodes.size(); ++a) {
      const double r = std::exp(rad.nodes[a]);
      const double jac = rad.weights[a] * r * r;  // r dr = r^2 du
      for (std::size_t b = 0; b < ang.nodes.size(); ++b) {
        const double x = r * std::cos(ang.nodes[b]), y = r * std::sin(ang.nodes[b]);
        const Jet j = cutoff_jet(n, profile, x, y);
        const double w = jac * ang.weights[b];
        out.Ix += w * j.x * j.x;
        out.Iy += w * j.y * j.y;
        out.Ixx += w * j.xx * j.xx;
      }
    }
  }
  const ProfileIntegrals pi1 = profile_integrals(profile);
  const double nn = n;
  out.closed_form = (pi / 2.0) / L * pi1.g1;
  out.ixx_bound = (3.0 * pi / 4.0) / (nn * nn * L * L * L) * pi1.g2 + pi / (nn * nn * L) * pi1.g1;
  out.first_deriv_identity_rel_err =
      std::max(std::abs(out.Ix - out.closed_form), std::abs(out.Iy - out.closed_form)) /
      out.closed_form;
  out.second_deriv_bound_slack = out.ixx_bound - out.Ixx;
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation criterion

double a_eps_paper(const PerturbationW& w, const Grid2D& grid, double eps, const Params& params) {
  params.validate();
  check_w(w, grid);
  const double d = params.delta, e2 = eps * eps;
  return node_weight_sum(grid, [&](std::size_t k) {
    return e2 * w.w11[k] * w.w11[k] + e2 * std::norm(w.w12[k]) + 4.0 * d * eps * w.w12[k].real() +
           e2 * std::norm(w.w21[k]) + e2 * w.w22[k];
  });
}

double a_eps_derived(const PerturbationW& w, const Grid2D& grid, double eps,
                     const Params& params) {
  params.validate();
  check_w(w, grid);
  const double d = params.delta;
  return node_weight_sum(grid, [&](std::size_t k) {
    const double a1 = d + eps * w.w11[k] + eps * w.w12[k].real();
    const double b1 = eps * w.w12[k].imag();
    const double a2 = d + eps * w.w22[k] + eps * w.w21[k].real();
    const double b2 = eps * w.w21[k].imag();
    // Expanded so that W = 0 gives exactly 0.
    return (a1 - d) * (a1 + d) + b1 * b1 + (a2 - d) * (a2 + d) + b2 * b2;
  });
}

AepsReport a_eps_report(const PerturbationW& w, const Grid2D& grid, double eps,
                        const Params& params) {
  AepsReport r;
  r.paper = a_eps_paper(w, grid, eps, params);
  r.derived = a_eps_derived(w, grid, eps, params);
  r.divergent = std::abs(r.paper - r.derived) > 1e-9 * std::max(std::abs(r.paper), std::abs(r.derived));
  return r;
}

ThresholdReport eps_threshold(const PerturbationW& w, const Grid2D& grid, const Params& params) {
  params.validate();
  check_w(w, grid);
  const double re12 = node_weight_sum(grid, [&](std::size_t k) { return w.w12[k].real(); });
  const double den = node_weight_sum(grid, [&](std::size_t k) {
    return w.w11[k] * w.w11[k] + w.w22[k] * w.w22[k] + std::norm(w.w12[k]) + std::norm(w.w21[k]);
  });
  if (!(re12 < 0.0)) throw InputError("eps_threshold requires int Re w12 < 0");
  if (!(den > 0.0)) throw InputError("eps_threshold requires a nonzero W");
  auto eps_of = [&](double delta) { return -4.0 * delta * re12 / den; };
  ThresholdReport r;
  r.epsilon = eps_of(params.delta);
  r.at_small_delta = eps_of(1e-3);
  r.at_large_delta = eps_of(1e3);
  const double unit = eps_of(1.0);
  r.limits_hold = r.at_small_delta < 1e-2 * unit && r.at_large_delta > 1e2 * unit;
  return r;
}

double gn_trial_energy(const PerturbationW& w, const Grid2D& grid, double eps,
                       const Params& params, int n, const CutoffProfile& profile,
                       int quad_order) {
  params.validate();
  check_w(w, grid);
  const CutoffIntegrals c = cutoff_derivative_integrals(n, profile, quad_order);
  const double d = params.delta;
  // W = 0: int 2 g_y^2 + 2 g_xx^2 - 4 delta g g_xx = 2 Iy + 2 Ixx + 4 delta Ix.
  const double free_part = 2.0 * c.Iy + 2.0 * c.Ixx + 4.0 * d * c.Ix;
  double w_part = 0.0;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const std::size_t k = grid.node(i, j);
      const Jet g = cutoff_jet(n, profile, grid.x(i), grid.y(j));
      const cplx c1 = d + eps * (w.w11[k] + w.w12[k]);
      const cplx c2 = d + eps * (w.w21[k] + w.w22[k]);
      const double dc = (std::norm(c1) - d * d) + (std::norm(c2) - d * d);
      const double integrand = g.v * g.v * dc -
                               2.0 * g.v * g.xx * (c1.real() + c2.real() - 2.0 * d) -
                               2.0 * g.v * g.y * (c1.imag() - c2.imag());
      w_part += grid.weight(i, j) * integrand;
    }
  return free_part + w_part;
}

// ---------------------------------------------------------------------------
// Square identity

double SquareTrial::bc_defect() const {
  double m = 0.0;
  for (int k = -40; k <= 40; ++k) {
    const double x = 0.25 * k;
    m = std::max(m, std::abs(u1(x, 0.0).v - u2(x, 0.0).v));
  }
  return m;
}

namespace {

struct YJet {
  cplx v, d;
};

// exp(-a x^2) * Y(y).
std::function<ComplexJet(double, double)> separable(double a, std::function<YJet(double)> yf) {
  return [a, yf = std::move(yf)](double x, double y) {
    const double g = std::exp(-a * x * x);
    const double g1 = -2.0 * a * x * g, g2 = (4.0 * a * a * x * x - 2.0 * a) * g;
    const YJet yy = yf(y);
    return ComplexJet{g * yy.v, g1 * yy.v, g * yy.d, g2 * yy.v};
  };
}

}  // namespace

std::vector<SquareTrial> square_identity_trials() {
  const cplx I{0.0, 1.0};
  std::vector<SquareTrial> t;
  auto a = separable(1.0, [](double y) {
    const double e = std::exp(-(y - 1.0) * (y - 1.0));
    return YJet{y * e, e * (1.0 - 2.0 * y * (y - 1.0))};
  });
  t.push_back({"y_gauss_shifted", a, a});
  auto b = separable(0.5, [](double y) {
    const double e = std::exp(-y * y);
    return YJet{e, -2.0 * y * e};
  });
  t.push_back({"gauss_boundary", b, b});
  auto c1 = separable(1.0, [](double y) {
    const double e = std::exp(-y * y);
    return YJet{(1.0 + y) * e, e * (1.0 - 2.0 * y * (1.0 + y))};
  });
  auto c2 = separable(1.0, [I](double y) {
    const double e = std::exp(-y * y);
    return YJet{(1.0 + I * y) * e, e * (I - 2.0 * y * (1.0 + I * y))};
  });
  t.push_back({"complex_pair", c1, c2});
  return t;
}

SquareIdentity square_identity(const SquareTrial& trial, const Params& params) {
  params.validate();
  const double d = params.delta;
  const cplx I{0.0, 1.0};
  static const GaussRule rx = composite_gauss(-10.0, 10.0, 80, 10);
  static const GaussRule ry = composite_gauss(0.0, 10.0, 40, 10);
  double lhs = 0, grad = 0, dy = 0, dxx = 0, dx = 0, u2n = 0;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i)
    for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
      const double w = rx.weights[i] * ry.weights[j];
      const ComplexJet a = trial.u1(rx.nodes[i], ry.nodes[j]);
      const ComplexJet b = trial.u2(rx.nodes[i], ry.nodes[j]);
      const cplx t1 = -I * a.y + (-b.xx + d * b.v);
      const cplx t2 = (-a.xx + d * a.v) + I * b.y;
      lhs += w * (std::norm(t1) + std::norm(t2));
      dx += w * (std::norm(a.x) + std::norm(b.x));
      dy += w * (std::norm(a.y) + std::norm(b.y));
      dxx += w * (std::norm(a.xx) + std::norm(b.xx));
      u2n += w * (std::norm(a.v) + std::norm(b.v));
    }
  grad = dx + dy;
  SquareIdentity s;
  s.lhs = lhs;
  s.paper_rhs = grad + dxx + 2.0 * d * dx + d * d * u2n;
  s.corrected_rhs = dy + dxx + 2.0 * d * dx + d * d * u2n;
  s.dx_norm2 = dx;
  s.paper_rel_err = std::abs(s.lhs - s.paper_rhs) / s.lhs;
  s.corrected_rel_err = std::abs(s.lhs - s.corrected_rhs) / s.lhs;
  return s;
}

}  // namespace semidirac
