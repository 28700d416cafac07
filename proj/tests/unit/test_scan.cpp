// Unit tests for the scan module: potential and perturbation sweeps with
// one-sided assertions, convergence studies and the delocalization probe.
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "semidirac/errors.hpp"
#include "semidirac/quasimode.hpp"
#include "semidirac/scan.hpp"

using namespace semidirac;

namespace {

constexpr double pi = std::numbers::pi;

// Box [1, 1 + pi]^2 with a 3-box-width margin on [-9, 14] x [0, 14], h = 0.25.
Grid2D box_grid() { return Grid2D(-9.0, 14.0, 14.0, 93, 57); }

const ScanPoint& at(const ScanResult& r, double v) {
  for (const auto& p : r.points)
    if (p.axis_value == v) return p;
  throw std::runtime_error("missing scan point");
}

}  // namespace

TEST_CASE("scan_potential: window predictions, one-sided assertions") {
  const Params p{2.0};
  const double a = 1.0, b = 1.0 + pi;
  const auto win = boundstate_window(p, a, b);
  REQUIRE(win.has_value());
  const double outside = win->second + 0.1;
  const std::vector<double> vs{-4.0, -3.0, -2.0, outside, 0.0};

  int sink_calls = 0;
  ScanResult predicted;
  ScanSolver solver;
  solver.threads = 2;
  const auto r = scan_potential(p, box_grid(), a, b, vs, solver, [&](const ScanResult& pre) {
    ++sink_calls;
    predicted = pre;
    for (const auto& pt : pre.points) CHECK(pt.observed_count == 0);
  });
  CHECK(sink_calls == 1);
  REQUIRE(r.points.size() == vs.size());
  CHECK(r.axis == "V");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    CHECK(r.points[i].axis_value == vs[i]);
    CHECK(r.points[i].predicted == predicted.points[i].predicted);
    CHECK(r.points[i].prediction_value == predicted.points[i].prediction_value);
  }
  for (double v : {-4.0, -3.0, -2.0}) {
    const auto& pt = at(r, v);
    CHECK(pt.predicted == "present");
    CHECK(pt.asserted);
    CHECK(pt.observed_count >= 1);
    CHECK(pt.localized);
    CHECK(pt.min_participation < 0.2);
    CHECK(pt.min_abs_lambda < 0.95 * p.delta);
    CHECK(pt.agreement == "true");
  }
  CHECK(at(r, -3.0).prediction_value == doctest::Approx(-6.0).epsilon(1e-12));
  const auto& zero = at(r, 0.0);
  CHECK(zero.predicted == "absent");
  CHECK(zero.asserted);
  CHECK(zero.observed_count == 0);
  CHECK(zero.agreement == "true");
  const auto& out = at(r, outside);
  CHECK(out.predicted == "none");
  CHECK_FALSE(out.asserted);
  CHECK(out.agreement == "unasserted");
  CHECK(r.all_agree());

  // Determinism across worker counts.
  solver.threads = 1;
  const auto r1 = scan_potential(p, box_grid(), a, b, {-3.0, 0.0}, solver);
  CHECK(r1.points[0].min_abs_lambda == at(r, -3.0).min_abs_lambda);
  CHECK(r1.points[0].min_participation == at(r, -3.0).min_participation);
  CHECK(r1.points[1].observed_count == 0);
}

TEST_CASE("scan_potential: preconditions") {
  const Params p{2.0};
  ScanSolver solver;
  // Margin of 3 box widths violated on the right.
  CHECK_THROWS_AS(scan_potential(p, Grid2D(-9.0, 10.0, 14.0, 77, 57), 1.0, 1.0 + pi, {-3.0}, solver),
                  InputError);
  // Box outside the domain.
  CHECK_THROWS_AS(scan_potential(p, box_grid(), 20.0, 21.0, {-3.0}, solver), InputError);
  CHECK_THROWS_AS(scan_potential(p, box_grid(), 1.0, 1.0 + pi, {std::nan("")}, solver), InputError);
}

TEST_CASE("scan_perturbation: A_eps < 0 implies a gap eigenvalue") {
  const Params p{1.0};
  const Grid2D g(-12.0, 12.0, 12.0, 97, 49);
  const auto w = coincidence_w(g, 3.0);
  CHECK(eps_threshold(w, g, p).epsilon == doctest::Approx(2.0).epsilon(1e-12));
  ScanSolver solver;
  solver.threads = 2;
  bool sink_called = false;
  const auto r = scan_perturbation(p, g, w, {0.0, 0.5, 1.0, 3.0}, solver,
                                   [&](const ScanResult&) { sink_called = true; });
  CHECK(sink_called);
  CHECK(r.axis == "eps");
  REQUIRE(r.points.size() == 4);
  CHECK(r.points[0].predicted == "none");
  CHECK(r.points[0].prediction_value == 0.0);
  CHECK(r.points[0].observed_count == 0);
  for (int i : {1, 2}) {
    CHECK(r.points[i].predicted == "present");
    CHECK(r.points[i].prediction_value < 0.0);
    CHECK(r.points[i].observed_count >= 1);
    CHECK(r.points[i].localized);
    CHECK(r.points[i].agreement == "true");
  }
  CHECK(r.points[3].prediction_value > 0.0);
  CHECK(r.points[3].agreement == "unasserted");
  CHECK(r.all_agree());
  CHECK_FALSE(r.note.empty());  // domain size is reported
}

TEST_CASE("convergence_study") {
  const Params p{1.0};
  const Grid2D domain(-10.0, 10.0, 10.0, 41, 21);
  ScanSolver solver;
  const auto edge = convergence_study(Observable::GapEdge, {41, 81, 161}, p, domain,
                                      NoPotential{}, solver);
  REQUIRE(edge.values.size() == 3);
  CHECK(edge.h[0] == doctest::Approx(0.5));
  for (double v : edge.values) CHECK(std::abs(v - 1.0) < 0.1);
  CHECK(std::abs(edge.values[2] - 1.0) < std::abs(edge.values[0] - 1.0) + 1e-3);
  CHECK(edge.fitted_order >= 1.0);

  const auto sq = convergence_study(Observable::SquareFormMin, {41, 81, 161}, p, domain,
                                    NoPotential{}, solver);
  // Approaches from one side: successive differences share a sign.
  const double d1 = sq.values[1] - sq.values[0], d2 = sq.values[2] - sq.values[1];
  CHECK(d1 * d2 > 0.0);
  CHECK(std::abs(d2) < std::abs(d1));
  for (double v : sq.values) CHECK(v >= 1.0 - 0.05);

  CHECK_THROWS_AS(convergence_study(Observable::GapEdge, {41, 41, 81}, p, domain, NoPotential{}, solver),
                  InputError);
  CHECK_THROWS_AS(convergence_study(Observable::GapEdge, {41, 81}, p, domain, NoPotential{}, solver),
                  InputError);
  CHECK_THROWS_AS(convergence_study(Observable::GapEdge, {81, 41, 161}, p, domain, NoPotential{}, solver),
                  InputError);
  CHECK(observable_from_string("square-form-min") == Observable::SquareFormMin);
  CHECK(to_string(Observable::BoundStateLambda) == "bound-state-lambda");
  CHECK_THROWS_AS(observable_from_string("nope"), InputError);
}

TEST_CASE("delocalization_probe") {
  ScanSolver solver;
  const auto free = delocalization_probe(Params{1.0}, {10.0, 20.0, 40.0}, 0.5, NoPotential{}, solver);
  REQUIRE(free.points.size() == 3);
  for (std::size_t i = 1; i < free.points.size(); ++i)
    CHECK(free.points[i].min_participation >= 0.9 * free.points[i - 1].min_participation);
  CHECK(free.all_agree());

  const auto bound = delocalization_probe(Params{2.0}, {10.0, 20.0, 40.0}, 0.5,
                                          BoxXY{1.0, 1.0 + pi, -3.0}, solver);
  for (std::size_t i = 1; i < bound.points.size(); ++i)
    CHECK(bound.points[i].min_participation < bound.points[i - 1].min_participation);

  CHECK_THROWS_AS(delocalization_probe(Params{1.0}, {10.0}, 0.5, NoPotential{}, solver), InputError);
}
