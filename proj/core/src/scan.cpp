// Sweeps, convergence studies and the delocalization probe.
#include "semidirac/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "semidirac/assembly.hpp"
#include "semidirac/errors.hpp"
#include "semidirac/parallel.hpp"
#include "semidirac/quasimode.hpp"

namespace semidirac {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Observation {
  std::size_t count = 0;
  double min_abs = inf;
  double min_pr = inf;
  bool localized = false;
};

Observation observe_gap(const HermitianOperator& op, const Params& params,
                        const ScanSolver& solver) {
  const double edge = gap_fraction * params.delta;
  const auto rep = gap_eigs(op, -edge, edge, solver.k, solver.options);
  Observation o;
  o.count = rep.certified_count.value_or(rep.pairs.size());
  for (const auto& p : rep.pairs) {
    o.min_abs = std::min(o.min_abs, std::abs(p.value));
    o.min_pr = std::min(o.min_pr, p.participation_ratio);
    if (p.participation_ratio < localized_participation && p.y_decay_rate < 0.0)
      o.localized = true;
  }
  return o;
}

void record(ScanPoint& pt, const Observation& o) {
  pt.observed_count = o.count;
  pt.min_abs_lambda = o.min_abs;
  pt.min_participation = o.min_pr;
  pt.localized = o.localized;
  if (!pt.asserted) {
    pt.agreement = "unasserted";
  } else if (pt.predicted == "present") {
    pt.agreement = (o.count >= 1 && o.localized) ? "true" : "false";
  } else {
    pt.agreement = o.count == 0 ? "true" : "false";
  }
}

// Fresh point carrying only the prediction; observation fields at defaults.
ScanPoint prediction(double axis_value, std::string predicted, double value, bool asserted) {
  ScanPoint pt;
  pt.axis_value = axis_value;
  pt.predicted = std::move(predicted);
  pt.prediction_value = value;
  pt.asserted = asserted;
  pt.min_abs_lambda = inf;
  pt.min_participation = inf;
  return pt;
}

std::string describe(const Grid2D& g) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "domain [%.17g, %.17g] x [0, %.17g], nx=%d, ny=%d", g.x_min(),
                g.x_max(), g.y_max(), g.nx(), g.ny());
  return buf;
}

void check_finite(const std::vector<double>& values, const char* what) {
  if (values.empty()) throw InputError(std::string(what) + " grid is empty");
  for (double v : values)
    if (!std::isfinite(v)) throw InputError(std::string(what) + " grid value is not finite");
}

}  // namespace

bool ScanResult::all_agree() const {
  return std::none_of(points.begin(), points.end(),
                      [](const ScanPoint& p) { return p.agreement == "false"; });
}

ScanResult scan_potential(const Params& params, const Grid2D& grid, double a, double b,
                          const std::vector<double>& v_grid, const ScanSolver& solver,
                          const PredictionSink& sink) {
  params.validate();
  if (!(a > 0.0 && a < b) || !std::isfinite(b)) throw InputError("box requires 0 < a < b");
  check_finite(v_grid, "V");
  if (a < grid.x_min() || b > grid.x_max() || b > grid.y_max())
    throw InputError("box [a,b]^2 lies outside the domain");
  const double w = b - a;
  if (grid.x_min() > a - 3.0 * w || grid.x_max() < b + 3.0 * w || grid.y_max() < b + 3.0 * w)
    throw InputError("domain must contain the box with a margin of 3 box widths");

  ScanResult result;
  result.axis = "V";
  result.note = describe(grid);
  const auto window = boundstate_window(params, a, b);
  for (double v : v_grid) {
    const double q = box_energy_analytic(a, b, v, params);
    if (window && v > window->first && v < window->second)
      result.points.push_back(prediction(v, "present", q, true));
    else if (v >= 0.0)  // sigma(H) avoids the gap for V >= 0
      result.points.push_back(prediction(v, "absent", q, true));
    else
      result.points.push_back(prediction(v, "none", q, false));
  }
  if (sink) sink(result);

  const auto obs = parallel_map<Observation>(v_grid.size(), solver.threads, [&](std::size_t i) {
    const auto op = assemble_H(grid, params, BoxXY{a, b, v_grid[i]});
    return observe_gap(op, params, solver);
  });
  for (std::size_t i = 0; i < obs.size(); ++i) record(result.points[i], obs[i]);
  return result;
}

PerturbationW coincidence_w(const Grid2D& grid, double side) {
  if (!(side > 0.0) || !std::isfinite(side)) throw InputError("coincidence W side must be positive");
  return rectangle_perturbation(grid, -0.5 * side, 0.5 * side, 0.0, side, cplx(-1.0, 0.0), 0.0,
                                0.0, 1.0);
}

ScanResult scan_perturbation(const Params& params, const Grid2D& grid, const PerturbationW& w,
                             const std::vector<double>& eps_grid, const ScanSolver& solver,
                             const PredictionSink& sink) {
  params.validate();
  validate_potential(w, grid);
  if (!w.self_adjoint()) throw InputError("W must satisfy w12 = conj(w21)");
  check_finite(eps_grid, "eps");
  // Compact support: W vanishes on the outer frame of the grid.
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      if (i != 0 && i != grid.nx() - 1 && j != grid.ny() - 1) continue;
      const std::size_t k = grid.node(i, j);
      if (w.w11[k] != 0.0 || w.w22[k] != 0.0 || w.w12[k] != 0.0 || w.w21[k] != 0.0)
        throw InputError("W must vanish on the outer grid frame (compact support)");
    }

  ScanResult result;
  result.axis = "eps";
  result.note = describe(grid);
  for (double eps : eps_grid) {
    const double a = a_eps_derived(w, grid, eps, params);
    result.points.push_back(a < 0.0 ? prediction(eps, "present", a, true)
                                    : prediction(eps, "none", a, false));
  }
  if (sink) sink(result);

  const auto obs = parallel_map<Observation>(eps_grid.size(), solver.threads, [&](std::size_t i) {
    PerturbationW we = w;
    we.epsilon = eps_grid[i];
    return observe_gap(assemble_H_eps(grid, params, we), params, solver);
  });
  for (std::size_t i = 0; i < obs.size(); ++i) record(result.points[i], obs[i]);
  return result;
}

std::string to_string(Observable o) {
  switch (o) {
    case Observable::GapEdge: return "gap-edge";
    case Observable::BoundStateLambda: return "bound-state-lambda";
    case Observable::SquareFormMin: return "square-form-min";
  }
  return "unknown";
}

Observable observable_from_string(const std::string& name) {
  for (auto o : {Observable::GapEdge, Observable::BoundStateLambda, Observable::SquareFormMin})
    if (to_string(o) == name) return o;
  if (name == "bound-state-λ") return Observable::BoundStateLambda;
  throw InputError("unknown observable '" + name + "'");
}

ConvergenceStudy convergence_study(Observable observable, const std::vector<int>& ladder,
                                   const Params& params, const Grid2D& domain,
                                   const PotentialSpec& potential, const ScanSolver& solver) {
  params.validate();
  if (ladder.size() < 3) throw InputError("convergence study needs at least 3 rungs");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i] <= ladder[i - 1])
      throw InputError("convergence ladder must be strictly increasing");
  const bool none = std::holds_alternative<NoPotential>(potential);
  if (observable == Observable::BoundStateLambda) {
    if (!std::holds_alternative<BoxXY>(potential))
      throw InputError("bound-state-lambda needs a box potential");
  } else if (!none) {
    throw InputError(to_string(observable) + " is defined for V = 0 only");
  }

  const double width = domain.x_max() - domain.x_min();
  std::vector<Grid2D> grids;
  for (int nx : ladder) {
    const int ny = static_cast<int>(std::lround((nx - 1) * domain.y_max() / width)) + 1;
    grids.emplace_back(domain.x_min(), domain.x_max(), domain.y_max(), nx, ny);
    validate_potential(potential, grids.back());
  }

  ConvergenceStudy st;
  st.observable = observable;
  st.ladder = ladder;
  st.values = parallel_map<double>(grids.size(), solver.threads, [&](std::size_t i) {
    const Grid2D& g = grids[i];
    if (observable == Observable::SquareFormMin) {
      const auto rep = lowest_of_square(assemble_square_form(g, params, potential), 1, solver.options);
      return rep.pairs.at(0).value;
    }
    const auto rep = nearest_eigs(assemble_H(g, params, potential), 0.0, 1, solver.options);
    return std::abs(rep.pairs.at(0).value);
  });
  for (const auto& g : grids) st.h.push_back(g.hx());

  std::vector<double> hs, diffs;
  for (std::size_t i = 0; i + 1 < st.values.size(); ++i) {
    hs.push_back(st.h[i]);
    diffs.push_back(std::abs(st.values[i + 1] - st.values[i]));
  }
  if (std::any_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; }))
    st.fitted_order = inf;  // converged to rounding: no finite order to fit
  else
    st.fitted_order = loglog_slope(hs, diffs);
  return st;
}

ScanResult delocalization_probe(const Params& params, const std::vector<double>& domain_ladder,
                                double h, const PotentialSpec& potential,
                                const ScanSolver& solver) {
  params.validate();
  if (domain_ladder.size() < 2) throw InputError("delocalization probe needs at least 2 domains");
  check_finite(domain_ladder, "domain");
  for (std::size_t i = 1; i < domain_ladder.size(); ++i)
    if (domain_ladder[i] <= domain_ladder[i - 1])
      throw InputError("domain ladder must be strictly increasing");
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("probe spacing h must be positive");
  const bool free = std::holds_alternative<NoPotential>(potential);
  if (!free && !std::holds_alternative<BoxXY>(potential))
    throw InputError("delocalization probe accepts no potential or a box potential");

  std::vector<Grid2D> grids;
  for (double L : domain_ladder) {
    if (!(L > 0.0)) throw InputError("domain size must be positive");
    const int ny = static_cast<int>(std::lround(L / h)) + 1;
    grids.emplace_back(-L, L, L, 2 * ny - 1, ny);
    validate_potential(potential, grids.back());
  }

  ScanResult result;
  result.axis = "domain";
  char buf[96];
  std::snprintf(buf, sizeof buf, "domains [-L, L] x [0, L], h=%.17g", h);
  result.note = buf;
  for (double L : domain_ladder)
    result.points.push_back(prediction(L, free ? "nondecreasing" : "none", 0.0, free));
  const auto obs = parallel_map<Observation>(grids.size(), solver.threads, [&](std::size_t i) {
    const auto op = assemble_H(grids[i], params, potential);
    const auto rep = nearest_eigs(op, 0.0, 1, solver.options);
    const auto& p = rep.pairs.at(0);
    const double edge = gap_fraction * params.delta;
    Observation o;
    o.count = count_below(op, edge) - count_below(op, -edge);
    o.min_abs = std::abs(p.value);
    o.min_pr = p.participation_ratio;
    o.localized = p.participation_ratio < localized_participation && p.y_decay_rate < 0.0;
    return o;
  });
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ScanPoint& pt = result.points[i];
    pt.observed_count = obs[i].count;
    pt.min_abs_lambda = obs[i].min_abs;
    pt.min_participation = obs[i].min_pr;
    pt.localized = obs[i].localized;
    if (!pt.asserted)
      pt.agreement = "unasserted";
    else if (i == 0)
      pt.agreement = "true";
    else
      pt.agreement = obs[i].min_pr >= (1.0 - delocalization_band) * obs[i - 1].min_pr ? "true"
                                                                                      : "false";
  }
  return result;
}

}  // namespace semidirac
