// Fiber oracle: dispersion relation, half-line fiber operators and the union
// of fiber edges.
#include "semidirac/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semidirac/errors.hpp"
#include "semidirac/parallel.hpp"

namespace semidirac {

std::pair<double, double> dispersion(double xi, double kappa, const Params& params) {
  const double lam = std::hypot(kappa, xi * xi + params.delta);
  return {lam, -lam};
}

double fiber_edge(double xi, const Params& params) { return xi * xi + params.delta; }

HermitianOperator fiber_operator(double xi, const Params& params, int ny, double y_max) {
  params.validate();
  if (!std::isfinite(xi)) throw InputError("fiber momentum must be finite");
  return assemble_half_line(fiber_edge(xi, params), ny, y_max);
}

FiberSpectrum fiber_spectrum(double xi, const Params& params, int ny, double y_max,
                             std::size_t samples) {
  const auto op = fiber_operator(xi, params, ny, y_max);
  FiberSpectrum fs;
  fs.xi = xi;
  fs.edge = fiber_edge(xi, params);
  const std::size_t k = std::min(std::max<std::size_t>(samples, 1), op.dimension());
  const auto rep = nearest_eigs(op, 0.0, k);
  fs.eigenvalues = rep.values();
  fs.min_abs = std::numeric_limits<double>::infinity();
  for (double v : fs.eigenvalues) fs.min_abs = std::min(fs.min_abs, std::abs(v));
  return fs;
}

std::vector<double> xi_grid(double xi_max, std::size_t count) {
  if (!(xi_max > 0.0) || !std::isfinite(xi_max)) throw InputError("xi_max must be positive");
  if (count < 2) throw InputError("xi grid needs at least 2 points");
  std::vector<double> g(count);
  const double step = 2.0 * xi_max / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = -xi_max + step * static_cast<double>(i);
  g.back() = xi_max;
  // Snap the midpoint of odd grids to an exact zero.
  if (count % 2 == 1) g[count / 2] = 0.0;
  return g;
}

std::vector<FiberSpectrum> fiber_scan(const std::vector<double>& xis, const Params& params,
                                      int ny, double y_max, std::size_t threads,
                                      std::size_t samples) {
  params.validate();
  return parallel_map<FiberSpectrum>(xis.size(), threads, [&](std::size_t i) {
    return fiber_spectrum(xis[i], params, ny, y_max, samples);
  });
}

double union_edge(const std::vector<double>& xis, const Params& params) {
  params.validate();
  if (xis.empty()) throw InputError("union_edge: empty xi grid");
  if (std::find(xis.begin(), xis.end(), 0.0) == xis.end())
    throw InputError("union_edge: xi grid must contain 0");
  double edge = std::numeric_limits<double>::infinity();
  for (double xi : xis) edge = std::min(edge, fiber_edge(xi, params));
  return edge;
}

}  // namespace semidirac
