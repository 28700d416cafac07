// semidirac/lattice.hpp
//
// Value layer: physical parameters, the truncated half-space grid, spinor and
// scalar fields sampled on it, potentials, and the quadrature rules used to
// pair fields. Everything here is immutable after construction.
//
// Layout conventions
//   * Node (i, j) sits at (x_min + i*hx, j*hy), 0 <= i < nx, 0 <= j < ny.
//   * Spinor fields are stored component-major then row-major: all u1 values
//     (j outer, i inner) followed by all u2 values.
//   * Walls at x = x_min, x = x_max and y = y_max are hard (field is 0 there).
//     The y = 0 row is the physical boundary where u1 = u2 is imposed.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace semidirac {

using cplx = std::complex<double>;

struct Params {
  double delta = 1.0;

  /// Throws InputError unless delta is finite and > 0.
  void validate() const;
};

class Grid2D {
 public:
  Grid2D(double x_min, double x_max, double y_max, int nx, int ny);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double y_max() const noexcept { return y_max_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }
  double x(int i) const noexcept { return x_min_ + i * hx_; }
  double y(int j) const noexcept { return j * hy_; }
  std::size_t node_count() const noexcept {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }
  std::size_t node(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * nx_ + i;
  }
  /// Trapezoidal weight of node (i, j), halved on each boundary line.
  double weight(int i, int j) const noexcept;

  bool operator==(const Grid2D&) const = default;

 private:
  double x_min_, x_max_, y_max_;
  int nx_, ny_;
  double hx_, hy_;
};

/// Index map of the unknowns that survive wall elimination and the u1 = u2
/// identification on y = 0. Active nodes are i in [1, nx-2], j in [0, ny-2];
/// `ai`, `aj` below are active coordinates (ai = i - 1, aj = j).
///
/// Canonical order: component 1 over all active rows (aj outer, ai inner),
/// then component 2 over rows aj >= 1. The u1 slot of row 0 holds the merged
/// boundary unknown. dimension = 2*nxa*nya - nxa.
struct ActiveLayout {
  int nxa = 0;
  int nya = 0;

  std::size_t dimension() const noexcept {
    return 2 * static_cast<std::size_t>(nxa) * nya - nxa;
  }
  /// Canonical index of component c (0 or 1) at active node (ai, aj); for
  /// aj == 0 both components map to the merged unknown.
  std::size_t index(int c, int ai, int aj) const noexcept {
    const std::size_t n1 = static_cast<std::size_t>(nxa) * nya;
    if (c == 0 || aj == 0) return static_cast<std::size_t>(aj) * nxa + ai;
    return n1 + static_cast<std::size_t>(aj - 1) * nxa + ai;
  }
  struct Slot {
    int c, ai, aj;
  };
  Slot slot(std::size_t k) const noexcept;

  static ActiveLayout for_grid(const Grid2D& g) { return {g.nx() - 2, g.ny() - 1}; }
  bool operator==(const ActiveLayout&) const = default;
};

class SpinorField {
 public:
  explicit SpinorField(Grid2D grid);
  SpinorField(Grid2D grid, std::vector<cplx> values);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }

  cplx u1(int i, int j) const noexcept { return values_[grid_.node(i, j)]; }
  cplx u2(int i, int j) const noexcept {
    return values_[grid_.node_count() + grid_.node(i, j)];
  }
  cplx& u1(int i, int j) noexcept { return values_[grid_.node(i, j)]; }
  cplx& u2(int i, int j) noexcept { return values_[grid_.node_count() + grid_.node(i, j)]; }

  /// u1 == u2 on every y = 0 node, up to `tol` relative to the field max.
  bool bc_admissible(double tol = 0.0) const;

  /// Build a field from closed-form components.
  static SpinorField from_functions(const Grid2D& grid,
                                    const std::function<cplx(double, double)>& f1,
                                    const std::function<cplx(double, double)>& f2);

 private:
  Grid2D grid_;
  std::vector<cplx> values_;
};

struct ScalarField {
  Grid2D grid;
  std::vector<double> values;  // row-major, j outer

  double at(int i, int j) const noexcept { return values[grid.node(i, j)]; }
};

// ---------------------------------------------------------------------------
// Potentials

struct NoPotential {};

/// V = value on [a, b] x [a, b], 0 elsewhere; enters H off-diagonally.
struct BoxXY {
  double a = 0, b = 0, value = 0;
};

/// V depending on x only; one real sample per grid column (size nx).
struct XOnly {
  std::vector<double> samples;
};

/// eps * [[w11, w12], [w21, w22]] sampled on the grid (row-major, size nx*ny).
struct PerturbationW {
  std::vector<double> w11, w22;
  std::vector<cplx> w12, w21;
  double epsilon = 0;

  /// w12 == conj(w21) at every node.
  bool self_adjoint() const;
};

using PotentialSpec = std::variant<NoPotential, BoxXY, XOnly, PerturbationW>;

/// Checks the variant invariants against `grid`; throws InputError/DimensionError.
void validate_potential(const PotentialSpec& spec, const Grid2D& grid);

/// Value of a scalar potential (None, BoxXY, XOnly) at node (i, j).
double potential_at(const PotentialSpec& spec, const Grid2D& grid, int i, int j);

/// Coincidence-case W: w11 = w22 = 0, w12 = w21 = value on the closed rectangle
/// [x0, x1] x [y0, y1] (node-sampled).
PerturbationW rectangle_perturbation(const Grid2D& grid, double x0, double x1, double y0,
                                     double y1, cplx w12, double w11, double w22,
                                     double epsilon);

// ---------------------------------------------------------------------------
// Operations

/// Trapezoid-weighted L2(R^2_+; C^2) pairing, conjugate-linear in `u`.
cplx inner_product(const SpinorField& u, const SpinorField& v);

/// Pointwise evaluation; throws InputError on a non-finite value.
ScalarField sample(const Grid2D& grid, const std::function<double(double, double)>& f);

/// Composite rule on uniformly spaced samples over [0, 1]. order 2 is the
/// trapezoid rule, order 4 composite Simpson (needs an even interval count).
double quadrature_1d(std::span<const double> f, int order);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes, weights;
};
GaussRule gauss_legendre(int n);

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels of `order` points.
GaussRule composite_gauss(double a, double b, int panels, int order);

}  // namespace semidirac
