#include "semidirac/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "semidirac/errors.hpp"

namespace semidirac {

void Params::validate() const {
  if (!std::isfinite(delta) || delta <= 0.0)
    throw InputError("delta must be finite and > 0, got " + std::to_string(delta));
}

Grid2D::Grid2D(double x_min, double x_max, double y_max, int nx, int ny)
    : x_min_(x_min), x_max_(x_max), y_max_(y_max), nx_(nx), ny_(ny) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
    throw InputError("grid requires finite x_min < x_max");
  if (!std::isfinite(y_max) || !(y_max > 0.0)) throw InputError("grid requires y_max > 0");
  if (nx < 4 || ny < 4)
    throw InputError("grid requires nx, ny >= 4 (got " + std::to_string(nx) + ", " +
                     std::to_string(ny) + ")");
  hx_ = (x_max - x_min) / (nx - 1);
  hy_ = y_max / (ny - 1);
}

double Grid2D::weight(int i, int j) const noexcept {
  double wx = hx_, wy = hy_;
  if (i == 0 || i == nx_ - 1) wx *= 0.5;
  if (j == 0 || j == ny_ - 1) wy *= 0.5;
  return wx * wy;
}

ActiveLayout::Slot ActiveLayout::slot(std::size_t k) const noexcept {
  const std::size_t n1 = static_cast<std::size_t>(nxa) * nya;
  if (k < n1) return {0, static_cast<int>(k % nxa), static_cast<int>(k / nxa)};
  k -= n1;
  return {1, static_cast<int>(k % nxa), static_cast<int>(k / nxa) + 1};
}

SpinorField::SpinorField(Grid2D grid) : grid_(grid), values_(2 * grid.node_count()) {}

SpinorField::SpinorField(Grid2D grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != 2 * grid_.node_count())
    throw DimensionError("spinor field needs 2*nx*ny values, got " +
                         std::to_string(values_.size()));
}

bool SpinorField::bc_admissible(double tol) const {
  double scale = 0.0;
  for (const auto& v : values_) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < grid_.nx(); ++i)
    if (std::abs(u1(i, 0) - u2(i, 0)) > tol * scale) return false;
  return true;
}

SpinorField SpinorField::from_functions(const Grid2D& grid,
                                        const std::function<cplx(double, double)>& f1,
                                        const std::function<cplx(double, double)>& f2) {
  SpinorField u(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      u.u1(i, j) = f1(grid.x(i), grid.y(j));
      u.u2(i, j) = f2(grid.x(i), grid.y(j));
    }
  return u;
}

bool PerturbationW::self_adjoint() const {
  if (w12.size() != w21.size()) return false;
  for (std::size_t k = 0; k < w12.size(); ++k)
    if (w12[k] != std::conj(w21[k])) return false;
  return true;
}

void validate_potential(const PotentialSpec& spec, const Grid2D& grid) {
  const std::size_t n = grid.node_count();
  if (const auto* box = std::get_if<BoxXY>(&spec)) {
    if (!(box->a > 0.0 && box->a < box->b))
      throw InputError("box potential requires 0 < a < b");
    if (box->a < grid.x_min() || box->b > grid.x_max() || box->b > grid.y_max())
      throw InputError("box [a,b]^2 must lie inside the grid");
    if (!std::isfinite(box->value)) throw InputError("box potential value must be finite");
  } else if (const auto* xo = std::get_if<XOnly>(&spec)) {
    if (xo->samples.size() != static_cast<std::size_t>(grid.nx()))
      throw DimensionError("x-only potential needs nx samples");
    for (double v : xo->samples)
      if (!std::isfinite(v)) throw InputError("x-only potential sample is not finite");
  } else if (const auto* w = std::get_if<PerturbationW>(&spec)) {
    if (w->w11.size() != n || w->w22.size() != n || w->w12.size() != n || w->w21.size() != n)
      throw DimensionError("perturbation fields need nx*ny samples each");
    if (!std::isfinite(w->epsilon)) throw InputError("epsilon must be finite");
  }
}

double potential_at(const PotentialSpec& spec, const Grid2D& grid, int i, int j) {
  if (const auto* box = std::get_if<BoxXY>(&spec)) {
    // Same edge convention as rectangle_perturbation: nodes on the edges count.
    const double x = grid.x(i), y = grid.y(j);
    const double sx = 1e-9 * grid.hx(), sy = 1e-9 * grid.hy();
    return (x >= box->a - sx && x <= box->b + sx && y >= box->a - sy && y <= box->b + sy)
               ? box->value
               : 0.0;
  }
  if (const auto* xo = std::get_if<XOnly>(&spec)) return xo->samples[i];
  if (std::holds_alternative<PerturbationW>(spec))
    throw UnsupportedError("perturbation W is not a scalar potential");
  return 0.0;
}

PerturbationW rectangle_perturbation(const Grid2D& grid, double x0, double x1, double y0,
                                     double y1, cplx w12, double w11, double w22,
                                     double epsilon) {
  const std::size_t n = grid.node_count();
  PerturbationW w{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  std::vector<cplx>(n, 0.0), std::vector<cplx>(n, 0.0), epsilon};
  // Nodes sitting on the rectangle edges are included.
  const double sx = 1e-9 * grid.hx(), sy = 1e-9 * grid.hy();
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i), y = grid.y(j);
      if (x < x0 - sx || x > x1 + sx || y < y0 - sy || y > y1 + sy) continue;
      const std::size_t k = grid.node(i, j);
      w.w11[k] = w11;
      w.w22[k] = w22;
      w.w12[k] = w12;
      w.w21[k] = std::conj(w12);
    }
  return w;
}

cplx inner_product(const SpinorField& u, const SpinorField& v) {
  if (!(u.grid() == v.grid())) throw DimensionError("inner_product: grid mismatch");
  const Grid2D& g = u.grid();
  cplx s = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double w = g.weight(i, j);
      s += w * (std::conj(u.u1(i, j)) * v.u1(i, j) + std::conj(u.u2(i, j)) * v.u2(i, j));
    }
  return s;
}

ScalarField sample(const Grid2D& grid, const std::function<double(double, double)>& f) {
  ScalarField out{grid, std::vector<double>(grid.node_count())};
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double v = f(grid.x(i), grid.y(j));
      if (!std::isfinite(v))
        throw InputError("sample: non-finite value at node (" + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
      out.values[grid.node(i, j)] = v;
    }
  return out;
}

double quadrature_1d(std::span<const double> f, int order) {
  const std::size_t n = f.size();
  if (n < 4) throw InputError("quadrature_1d needs at least 4 samples");
  const double h = 1.0 / static_cast<double>(n - 1);
  if (order == 2) {
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < n; ++k) s += f[k];
    return s * h;
  }
  if (order == 4) {
    if ((n - 1) % 2 != 0) throw InputError("Simpson rule needs an even number of intervals");
    double s = f.front() + f.back();
    for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f[k];
    return s * h / 3.0;
  }
  throw InputError("quadrature_1d supports order 2 or 4");
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InputError("gauss_legendre needs n >= 1");
  GaussRule r{std::vector<double>(n), std::vector<double>(n)};
  for (int k = 0; k < (n + 1) / 2; ++k) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[k] = -x;
    r.nodes[n - 1 - k] = x;
    r.weights[k] = w;
    r.weights[n - 1 - k] = w;
  }
  return r;
}

GaussRule composite_gauss(double a, double b, int panels, int order) {
  if (panels < 1) throw InputError("composite_gauss needs panels >= 1");
  const GaussRule base = gauss_legendre(order);
  GaussRule r;
  r.nodes.reserve(static_cast<std::size_t>(panels) * order);
  r.weights.reserve(r.nodes.capacity());
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    for (int k = 0; k < order; ++k) {
      r.nodes.push_back(lo + 0.5 * w * (base.nodes[k] + 1.0));
      r.weights.push_back(0.5 * w * base.weights[k]);
    }
  }
  return r;
}

}  // namespace semidirac
