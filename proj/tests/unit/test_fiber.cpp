// Unit tests for the fiber oracle: plane-wave dispersion, the half-line fiber
// operators, the union edge and 2D/1D consistency.
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "semidirac/assembly.hpp"
#include "semidirac/eigensolve.hpp"
#include "semidirac/errors.hpp"
#include "semidirac/fiber.hpp"

using namespace semidirac;

TEST_CASE("dispersion") {
  auto [p, m] = dispersion(0.0, 0.0, Params{1.0});
  CHECK(p == 1.0);
  CHECK(m == -1.0);

  std::tie(p, m) = dispersion(1.0, 0.0, Params{1.0});
  CHECK(p == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m == doctest::Approx(-2.0).epsilon(1e-15));
  // Cross-check against the eigenvalues of the 2x2 symbol [[k, m], [m, -k]].
  const double xi = 0.7, kappa = 1.3, delta = 0.4;
  const double mass = xi * xi + delta;
  const auto sym = hermitian_eigen({kappa, mass, mass, -kappa}, 2, false);
  std::tie(p, m) = dispersion(xi, kappa, Params{delta});
  CHECK(p == doctest::Approx(sym.values[1]).epsilon(1e-14));
  CHECK(m == doctest::Approx(sym.values[0]).epsilon(1e-14));

  // Asymptotics |lambda| ~ |kappa|.
  for (double k : {1e3, 1e5, 1e7}) {
    std::tie(p, m) = dispersion(0.5, k, Params{1.0});
    CHECK(p / k == doctest::Approx(1.0).epsilon(2.0 / (k * k) + 1e-15));
    CHECK(m == -p);
  }
  CHECK(fiber_edge(0.0, Params{1.0}) == 1.0);
  CHECK(fiber_edge(2.0, Params{1.0}) == 5.0);
}

TEST_CASE("fiber_operator: structure and validation") {
  const auto op = fiber_operator(0.5, Params{1.0}, 40, 10.0);
  CHECK(op.dimension() == 2 * 39 - 1);
  CHECK(op.kind() == OperatorKind::FirstOrder);
  CHECK_FALSE(op.grid().has_value());
  CHECK(op.matrix().hermitian_defect() == 0.0);
  CHECK_THROWS_AS(fiber_operator(0.0, Params{1.0}, 3, 10.0), InputError);
  CHECK_THROWS_AS(fiber_operator(0.0, Params{-1.0}, 40, 10.0), InputError);
}

TEST_CASE("fiber edge at xi = 0 within 5% of delta (ny = 400, y_max = 40)") {
  const auto fs = fiber_spectrum(0.0, Params{1.0}, 400, 40.0);
  CHECK(fs.edge == 1.0);
  CHECK(fs.min_abs == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fs.min_abs >= 1.0 - 1e-9);
  CHECK_FALSE(fs.eigenvalues.empty());
}

TEST_CASE("fiber eigenvalues respect |lambda| >= xi^2 + delta") {
  for (double xi : {0.0, 0.5, 1.0, 2.0}) {
    const auto fs = fiber_spectrum(xi, Params{1.0}, 200, 20.0);
    CHECK(fs.edge == doctest::Approx(xi * xi + 1.0).epsilon(1e-15));
    for (double lam : fs.eigenvalues) CHECK(std::abs(lam) >= fs.edge - 1e-9);
    // Edge grows like xi^2: the discrete edge tracks the analytic one.
    CHECK(fs.min_abs == doctest::Approx(fs.edge).epsilon(0.05));
  }
}

TEST_CASE("fiber spectrum symmetry is recorded, not asserted") {
  const auto op = fiber_operator(0.3, Params{1.0}, 60, 10.0);
  const auto all = dense_eigs(op);
  const auto v = all.values();
  double asym = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) asym = std::max(asym, std::abs(v[i] + v[v.size() - 1 - i]));
  MESSAGE("fiber spectrum max |lambda_i + lambda_{n-1-i}| = " << asym);
  CHECK(std::isfinite(asym));
}

TEST_CASE("union_edge") {
  CHECK(union_edge({0.0}, Params{1.0}) == 1.0);
  CHECK(union_edge({-1.0, 0.0, 1.0}, Params{2.0}) == 2.0);
  std::vector<double> dense;
  for (int i = -100; i <= 100; ++i) dense.push_back(i * 0.05);
  CHECK(union_edge(dense, Params{0.7}) == 0.7);
  CHECK_THROWS_AS(union_edge({}, Params{1.0}), InputError);
  CHECK_THROWS_AS(union_edge({0.5, 1.0}, Params{1.0}), InputError);
}

TEST_CASE("xi_grid and parallel fiber scan are deterministic") {
  const auto grid = xi_grid(1.5, 7);
  REQUIRE(grid.size() == 7);
  CHECK(grid.front() == -1.5);
  CHECK(grid.back() == 1.5);
  CHECK(grid[3] == 0.0);
  CHECK_THROWS_AS(xi_grid(1.0, 1), InputError);
  CHECK_THROWS_AS(xi_grid(-1.0, 5), InputError);

  const auto serial = fiber_scan(grid, Params{1.0}, 80, 10.0, 1);
  const auto parallel = fiber_scan(grid, Params{1.0}, 80, 10.0, 4);
  REQUIRE(serial.size() == grid.size());
  REQUIRE(parallel.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(serial[i].xi == grid[i]);
    CHECK(parallel[i].xi == grid[i]);
    CHECK(serial[i].eigenvalues == parallel[i].eigenvalues);
  }
  // Symmetric in xi.
  CHECK(serial[0].min_abs == doctest::Approx(serial[6].min_abs).epsilon(1e-12));
}

TEST_CASE("2D / fiber consistency at matched y-resolution") {
  // Reference 2D grid: [-20, 20] x [0, 20], 161 x 81 -> hy = 0.25.
  const Grid2D g(-20, 20, 20, 161, 81);
  const auto t = assemble_T(g, Params{1.0});
  const auto near = nearest_eigs(t, 0.0, 2);
  double min2d = 1e300;
  for (const auto& p : near.pairs) min2d = std::min(min2d, std::abs(p.value));

  const auto fibers = fiber_scan(xi_grid(1.0, 21), Params{1.0}, 81, 20.0, 2);
  double min1d = 1e300;
  for (const auto& f : fibers) min1d = std::min(min1d, f.min_abs);
  CHECK(min2d == doctest::Approx(min1d).epsilon(0.05));
  CHECK(union_edge(xi_grid(1.0, 21), Params{1.0}) == 1.0);
}
