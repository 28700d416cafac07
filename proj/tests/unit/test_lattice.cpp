// Unit tests for the lattice module: grids, fields, potentials, quadrature.
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semidirac/errors.hpp"
#include "semidirac/lattice.hpp"

using namespace semidirac;

namespace {

SpinorField random_field(const Grid2D& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpinorField u(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      u.u1(i, j) = {nd(rng), nd(rng)};
      u.u2(i, j) = {nd(rng), nd(rng)};
    }
  return u;
}

}  // namespace

TEST_CASE("params and grid validation") {
  CHECK_THROWS_AS(Params{0.0}.validate(), InputError);
  CHECK_THROWS_AS(Params{-1.0}.validate(), InputError);
  CHECK_NOTHROW(Params{0.5}.validate());
  CHECK_THROWS_AS(Grid2D(0, 1, 1, 3, 10), InputError);
  CHECK_THROWS_AS(Grid2D(1, 0, 1, 10, 10), InputError);
  CHECK_THROWS_AS(Grid2D(0, 1, 0, 10, 10), InputError);
  const Grid2D g(-2, 2, 3, 5, 4);
  CHECK(g.hx() == doctest::Approx(1.0));
  CHECK(g.hy() == doctest::Approx(1.0));
  CHECK(g.x(3) == doctest::Approx(1.0));
  CHECK(g.y(2) == doctest::Approx(2.0));
}

TEST_CASE("active layout indexing is a bijection") {
  const Grid2D g(0, 1, 1, 7, 6);
  const auto l = ActiveLayout::for_grid(g);
  CHECK(l.dimension() == 2u * 5 * 5 - 5);
  std::vector<int> hits(l.dimension(), 0);
  for (std::size_t k = 0; k < l.dimension(); ++k) {
    const auto s = l.slot(k);
    CHECK(l.index(s.c, s.ai, s.aj) == k);
    hits[k]++;
  }
  for (int ai = 0; ai < l.nxa; ++ai) CHECK(l.index(0, ai, 0) == l.index(1, ai, 0));
}

TEST_CASE("inner_product: zero, conjugate symmetry, constant") {
  const Grid2D g(0, 1, 1, 11, 9);
  const SpinorField zero(g);
  CHECK(inner_product(zero, zero) == cplx{});

  const auto u = random_field(g, 1), v = random_field(g, 2);
  const cplx uv = inner_product(u, v), vu = inner_product(v, u);
  CHECK(std::abs(uv - std::conj(vu)) < 1e-12 * std::abs(uv));
  CHECK(inner_product(u, u).real() > 0.0);
  CHECK(std::abs(inner_product(u, u).imag()) < 1e-12);

  // u1 = u2 = 1 on [0,1]^2: the trapezoid rule integrates constants exactly.
  const auto one = SpinorField::from_functions(
      g, [](double, double) { return cplx{1.0}; }, [](double, double) { return cplx{1.0}; });
  CHECK(inner_product(one, one).real() == doctest::Approx(2.0).epsilon(1e-14));

  const Grid2D other(0, 1, 1, 11, 10);
  CHECK_THROWS_AS(inner_product(u, SpinorField(other)), DimensionError);
}

TEST_CASE("inner_product converges at second order") {
  // |u|^2 = 2 (x(1-x) e^y)^2, integral 2 * (1/30) * (e^2 - 1)/2.
  const double exact = (std::exp(2.0) - 1.0) / 30.0;
  std::vector<double> err;
  for (int n : {11, 21, 41, 81}) {
    const Grid2D g(0, 1, 1, n, n);
    auto f = [](double x, double y) { return cplx{x * (1 - x) * std::exp(y)}; };
    const auto u = SpinorField::from_functions(g, f, f);
    err.push_back(std::abs(inner_product(u, u).real() - exact));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double slope = std::log2(err[k - 1] / err[k]);
    CHECK(slope > 1.6);
    CHECK(slope < 2.4);
  }
}

TEST_CASE("sample") {
  const Grid2D g(-3, 3, 4, 31, 21);
  const auto one = sample(g, [](double, double) { return 1.0; });
  for (double v : one.values) CHECK(v == 1.0);
  const auto yf = sample(g, [](double, double y) { return y; });
  for (int i = 0; i < g.nx(); ++i) CHECK(yf.at(i, 0) == 0.0);

  const double cx = 0.43, cy = 1.77;
  const auto gauss = sample(g, [&](double x, double y) {
    return std::exp(-(x - cx) * (x - cx) - (y - cy) * (y - cy));
  });
  int bi = 0, bj = 0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (gauss.at(i, j) > gauss.at(bi, bj)) bi = i, bj = j;
  CHECK(bi == static_cast<int>(std::lround((cx - g.x_min()) / g.hx())));
  CHECK(bj == static_cast<int>(std::lround(cy / g.hy())));

  CHECK_THROWS_AS(sample(g, [](double x, double) { return x > 0 ? 1.0 / 0.0 : 0.0; }),
                  InputError);
}

TEST_CASE("quadrature_1d") {
  auto grid_samples = [](int n, auto f) {
    std::vector<double> s(n);
    for (int k = 0; k < n; ++k) s[k] = f(static_cast<double>(k) / (n - 1));
    return s;
  };
  CHECK(quadrature_1d(grid_samples(5, [](double) { return 1.0; }), 2) == 1.0);
  CHECK(quadrature_1d(grid_samples(7, [](double t) { return t; }), 2) ==
        doctest::Approx(0.5).epsilon(1e-15));
  double prev = 0;
  for (int n : {11, 21, 41}) {
    const double e = std::abs(quadrature_1d(grid_samples(n, [](double t) { return t * t; }), 2) -
                              1.0 / 3.0);
    const double h = 1.0 / (n - 1);
    CHECK(e <= h * h);
    if (prev > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.01));
    prev = e;
  }
  CHECK(quadrature_1d(grid_samples(11, [](double t) { return t * t * t; }), 4) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(quadrature_1d(std::vector<double>{1, 2, 3}, 2), InputError);
  CHECK_THROWS_AS(quadrature_1d(grid_samples(6, [](double) { return 1.0; }), 4), InputError);
  CHECK_THROWS_AS(quadrature_1d(grid_samples(6, [](double) { return 1.0; }), 3), InputError);
}

TEST_CASE("gauss-legendre rules") {
  for (int n : {1, 2, 5, 8, 16}) {
    const auto r = gauss_legendre(n);
    double s = 0, m = 0;
    for (int k = 0; k < n; ++k) {
      s += r.weights[k];
      m += r.weights[k] * std::pow(r.nodes[k], 2 * n - 2);
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
  }
  const auto c = composite_gauss(0.0, std::numbers::pi, 8, 6);
  double s = 0;
  for (std::size_t k = 0; k < c.nodes.size(); ++k) s += c.weights[k] * std::sin(c.nodes[k]);
  CHECK(s == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("potentials") {
  const Grid2D g(-4, 9, 9, 27, 19);
  CHECK_NOTHROW(validate_potential(BoxXY{1, 4, -3}, g));
  CHECK_THROWS_AS(validate_potential(BoxXY{0, 4, -3}, g), InputError);
  CHECK_THROWS_AS(validate_potential(BoxXY{4, 1, -3}, g), InputError);
  CHECK_THROWS_AS(validate_potential(BoxXY{1, 10, -3}, g), InputError);
  CHECK_THROWS_AS(validate_potential(XOnly{{1.0, 2.0}}, g), DimensionError);
  CHECK(potential_at(BoxXY{1, 4, -3}, g, 10, 2) == -3.0);  // (1, 1) is a box corner
  CHECK(potential_at(BoxXY{1, 4, -3}, g, 9, 2) == 0.0);

  auto w = rectangle_perturbation(g, 1, 3, 1, 3, cplx{0.5, 0.25}, 0.0, 0.0, 1.0);
  CHECK(w.self_adjoint());
  CHECK_NOTHROW(validate_potential(w, g));
  w.w21[g.node(10, 2)] = cplx{0.5, 0.25};
  CHECK_FALSE(w.self_adjoint());
  CHECK_THROWS_AS(potential_at(w, g, 0, 0), UnsupportedError);
}

TEST_CASE("bc admissibility") {
  const Grid2D g(0, 1, 1, 6, 6);
  auto u = SpinorField::from_functions(
      g, [](double x, double y) { return cplx{x + y}; }, [](double x, double) { return cplx{x}; });
  CHECK(u.bc_admissible());
  u.u2(2, 0) += 0.1;
  CHECK_FALSE(u.bc_admissible(1e-12));
  CHECK_THROWS_AS(SpinorField(g, std::vector<cplx>(5)), DimensionError);
}
