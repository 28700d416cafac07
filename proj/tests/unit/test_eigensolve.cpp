// Unit tests for the eigensolve module: dense oracle, shift-invert gap
// solver, square-form LOBPCG, inertia counts and localization metrics.
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semidirac/assembly.hpp"
#include "semidirac/eigensolve.hpp"
#include "semidirac/errors.hpp"

using namespace semidirac;

namespace {

std::vector<double> gap_values(const SpectrumReport& r, double lo, double hi) {
  std::vector<double> v;
  for (const auto& p : r.pairs)
    if (p.value >= lo && p.value <= hi) v.push_back(p.value);
  return v;
}

HermitianOperator box_operator(int nx, int ny) {
  const Grid2D g(-4, 9, 9, nx, ny);
  return assemble_H(g, Params{2.0}, BoxXY{1, 1 + std::numbers::pi, -3.0});
}

}  // namespace

TEST_CASE("hermitian_eigen: Pauli-x and diagonal") {
  const double delta = 1.7;
  auto e = hermitian_eigen({0.0, delta, delta, 0.0}, 2);
  CHECK(e.values[0] == doctest::Approx(-delta).epsilon(1e-15));
  CHECK(e.values[1] == doctest::Approx(delta).epsilon(1e-15));

  const std::vector<double> diag{3.0, -1.0, 2.5, 0.0, -7.0};
  std::vector<cplx> a(25, 0.0);
  for (int k = 0; k < 5; ++k) a[k * 6] = diag[k];
  e = hermitian_eigen(a, 5);
  auto sorted = diag;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < 5; ++k) CHECK(e.values[k] == sorted[k]);
}

TEST_CASE("hermitian_eigen: random Hermitian matrix residuals and orthonormality") {
  const std::size_t n = 60;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::vector<cplx> a(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    a[r * n + r] = nd(rng);
    for (std::size_t c = r + 1; c < n; ++c) {
      a[r * n + c] = {nd(rng), nd(rng)};
      a[c * n + r] = std::conj(a[r * n + c]);
    }
  }
  const auto e = hermitian_eigen(a, n);
  double norm = 0;
  for (auto v : a) norm = std::max(norm, std::abs(v));
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) CHECK(e.values[j - 1] <= e.values[j]);
    const cplx* v = &e.vectors[j * n];
    double res = 0;
    for (std::size_t r = 0; r < n; ++r) {
      cplx s = 0;
      for (std::size_t c = 0; c < n; ++c) s += a[r * n + c] * v[c];
      res = std::max(res, std::abs(s - e.values[j] * v[r]));
    }
    CHECK(res <= 1e-10 * norm * n);
    for (std::size_t i = 0; i <= j; ++i) {
      cplx d = 0;
      for (std::size_t r = 0; r < n; ++r) d += std::conj(e.vectors[i * n + r]) * v[r];
      CHECK(std::abs(d - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("tridiagonal_ql on the discrete Laplacian") {
  const std::size_t n = 30;
  std::vector<double> d(n, 2.0), e(n, -1.0), z;
  tridiagonal_ql(d, e, z, n);
  std::sort(d.begin(), d.end());
  for (std::size_t k = 0; k < n; ++k) {
    const double exact = 2 - 2 * std::cos(std::numbers::pi * (k + 1) / (n + 1));
    CHECK(d[k] == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("dense_eigs: residuals, sign convention, cap") {
  const Grid2D g(-2, 2, 2, 8, 8);
  const auto t = assemble_T(g, Params{1.0});
  const auto r = dense_eigs(t);
  CHECK(r.pairs.size() == t.dimension());
  CHECK(r.method == "dense");
  const double norm = t.matrix().norm_inf();
  for (const auto& p : r.pairs) {
    CHECK(p.residual <= 1e-10 * norm);
    CHECK(residual_norm(t, p.vector, p.value) <= 1e-10 * norm);
    const auto first = std::find_if(p.vector.begin(), p.vector.end(),
                                    [](cplx v) { return std::abs(v) > 1e-8; });
    REQUIRE(first != p.vector.end());
    CHECK(first->imag() == 0.0);
    CHECK(first->real() > 0.0);
  }
  SolverOptions small;
  small.dense_cap = 10;
  CHECK_THROWS_AS(dense_eigs(t, small), InputError);
}

TEST_CASE("gap_eigs: V = 0 leaves the gap empty with certificate 0") {
  for (auto [nx, ny] : {std::pair{24, 14}, std::pair{161, 81}}) {
    const Grid2D g(-20, 20, 20, nx, ny);
    const auto t = assemble_T(g, Params{1.0});
    const auto r = gap_eigs(t, -0.9, 0.9, 4);
    CHECK(r.pairs.empty());
    CHECK(r.certificate == CertificateKind::Certified);
    REQUIRE(r.certified_count.has_value());
    CHECK(*r.certified_count == 0);
  }
  // Dense cross-check on the coarse grid.
  const auto d = dense_eigs(assemble_T(Grid2D(-20, 20, 20, 24, 14), Params{1.0}));
  CHECK(gap_values(d, -0.9, 0.9).empty());
}

TEST_CASE("gap_eigs agrees with the dense oracle") {
  for (auto [nx, ny] : {std::pair{8, 8}, std::pair{20, 20}, std::pair{27, 25}}) {
    const auto h = box_operator(nx, ny);
    REQUIRE(h.dimension() <= 2000);
    const auto dense = gap_values(dense_eigs(h), -1.9, 1.9);
    const auto it = gap_eigs(h, -1.9, 1.9, 50);
    REQUIRE(it.certified_count.has_value());
    CHECK(*it.certified_count == dense.size());
    REQUIRE(it.pairs.size() == dense.size());
    for (std::size_t k = 0; k < dense.size(); ++k) {
      CHECK(std::abs(it.pairs[k].value - dense[k]) <= 1e-8);
      CHECK(it.pairs[k].residual <= 1e-9);
      CHECK(residual_norm(h, it.pairs[k].vector, it.pairs[k].value) <= 1e-9);
    }
  }
}

TEST_CASE("gap_eigs: bound state of the box well, count contract") {
  const auto h = box_operator(41, 41);
  const auto r = gap_eigs(h, -1.9, 1.9, 8);
  REQUIRE(!r.pairs.empty());
  const double lambda = r.pairs.front().value;
  // An interval around one isolated eigenvalue: asking for 3 returns 1.
  double gap_to_next = 1e9;
  for (std::size_t k = 1; k < r.pairs.size(); ++k)
    gap_to_next = std::min(gap_to_next, r.pairs[k].value - lambda);
  const double half = std::min(0.05, 0.5 * gap_to_next);
  const auto one = gap_eigs(h, lambda - half, lambda + half, 3);
  CHECK(one.pairs.size() == 1);
  REQUIRE(one.certified_count.has_value());
  CHECK(*one.certified_count == 1);
  CHECK(one.pairs[0].value == doctest::Approx(lambda).epsilon(1e-9));

  CHECK_THROWS_AS(gap_eigs(h, 1.0, -1.0, 2), InputError);
  CHECK_THROWS_AS(gap_eigs(h, -1.0, 1.0, 0), InputError);
}

TEST_CASE("matrix-free path is reported uncertified and agrees") {
  const auto h = box_operator(20, 20);
  SolverOptions opt;
  opt.use_factorization = false;
  const auto mf = gap_eigs(h, -1.9, 1.9, 4, opt);
  const auto ref = gap_values(dense_eigs(h), -1.9, 1.9);
  CHECK(mf.certificate == CertificateKind::Uncertified);
  CHECK(!mf.certified_count.has_value());
  REQUIRE(!ref.empty());
  REQUIRE(!mf.pairs.empty());
  // Every value found is a true eigenvalue.
  for (const auto& p : mf.pairs) {
    double best = 1e9;
    for (double v : ref) best = std::min(best, std::abs(v - p.value));
    CHECK(best <= 1e-8);
  }
}

TEST_CASE("nearest_eigs and count_below match the dense spectrum") {
  const auto h = box_operator(20, 20);
  const auto d = dense_eigs(h);
  const double shift = 0.3;
  const auto r = nearest_eigs(h, shift, 5);
  std::vector<double> all = d.values();
  std::sort(all.begin(), all.end(), [&](double a, double b) {
    return std::abs(a - shift) < std::abs(b - shift);
  });
  std::vector<double> want(all.begin(), all.begin() + 5);
  std::sort(want.begin(), want.end());
  REQUIRE(r.pairs.size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(r.pairs[k].value - want[k]) <= 1e-8);

  for (double x : {-3.0, -1.0, 0.1, 2.5}) {
    const auto below = static_cast<std::size_t>(
        std::count_if(d.pairs.begin(), d.pairs.end(), [x](const auto& p) { return p.value < x; }));
    CHECK(count_below(h, x) == below);
  }
}

TEST_CASE("lowest_of_square") {
  const Params p{1.0};
  const Grid2D ref(-20, 20, 20, 161, 81);
  const auto q = assemble_square_form(ref, p, NoPotential{});
  const auto r = lowest_of_square(q, 1);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].value >= 1.0 - 1e-9);
  CHECK(r.pairs[0].value <= 1.1);
  CHECK(r.method == "lobpcg");

  const Grid2D g(-20, 20, 10, 81, 21);
  const auto q1 = assemble_square_form(g, p, XOnly{std::vector<double>(g.nx(), 1.0)});
  const auto r1 = lowest_of_square(q1, 2);
  CHECK(r1.pairs[0].value == doctest::Approx(4.0).epsilon(0.02));
  CHECK(r1.pairs[0].value >= 4.0 - 1e-9);

  // Linearity in a positive scale factor, and agreement with the dense path.
  const Grid2D s(-3, 3, 3, 14, 10);
  const auto qs = assemble_square_form(s, p, NoPotential{});
  const auto base = lowest_of_square(qs, 3);
  const auto scaled = lowest_of_square(qs.scaled(2.5), 3);
  const auto dense = dense_eigs(qs);
  for (int k = 0; k < 3; ++k) {
    CHECK(scaled.pairs[k].value == doctest::Approx(2.5 * base.pairs[k].value).epsilon(1e-9));
    CHECK(std::abs(base.pairs[k].value - dense.pairs[k].value) <= 1e-8);
  }

  CHECK_THROWS_AS(lowest_of_square(assemble_T(s, p), 1), InputError);
  SolverOptions starved;
  starved.max_iter = 1;
  starved.tol = 1e-14;
  CHECK_THROWS_AS(lowest_of_square(q, 1, starved), ConvergenceError);
}

TEST_CASE("square-form minimum is non-increasing as the domain grows") {
  const double h = 0.5;
  double prev = 1e9;
  for (double ymax : {5.0, 10.0, 20.0}) {
    const Grid2D g(-10, 10, ymax, 41, static_cast<int>(std::lround(ymax / h)) + 1);
    const auto q = assemble_square_form(g, Params{1.0}, NoPotential{});
    const double v = lowest_of_square(q, 1).pairs[0].value;
    CHECK(v <= prev + 1e-10);
    prev = v;
  }
}

TEST_CASE("localization metrics") {
  const Grid2D g(-2, 2, 2, 10, 10);
  const std::size_t n = ActiveLayout::for_grid(g).dimension();
  std::vector<cplx> uniform(n, 1.0 / std::sqrt(static_cast<double>(n)));
  CHECK(localization_metrics(uniform, g).participation_ratio == doctest::Approx(1.0));
  std::vector<cplx> single(n, 0.0);
  single[5] = 1.0;
  CHECK(localization_metrics(single, g).participation_ratio ==
        doctest::Approx(1.0 / static_cast<double>(n)));
  CHECK_THROWS_AS(localization_metrics(std::vector<cplx>(n, 0.0), g), InputError);

  const Grid2D bg(-4, 9, 9, 41, 41);
  const auto h = assemble_H(bg, Params{2.0}, BoxXY{1, 1 + std::numbers::pi, -3.0});
  const auto r = gap_eigs(h, -1.9, 1.9, 4);
  REQUIRE(!r.pairs.empty());
  const auto& state = *std::min_element(r.pairs.begin(), r.pairs.end(), [](auto& a, auto& b) {
    return std::abs(a.value) < std::abs(b.value);
  });
  CHECK(state.participation_ratio < 0.2);
  CHECK(state.y_decay_rate < 0.0);
}
