// Subcommands: spectrum, quasimode, scan, fiber, export-matrix and
// validate-config. All files of a run are written by the calling thread.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>

#include "semidirac/assembly.hpp"
#include "semidirac/cli.hpp"
#include "semidirac/errors.hpp"
#include "semidirac/fiber.hpp"
#include "semidirac/quasimode.hpp"
#include "semidirac/scan.hpp"

namespace semidirac::cli {

namespace fs = std::filesystem;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Writer {
 public:
  Writer(fs::path dir, const OutputConfig& out, ResultBundle& bundle)
      : dir_(std::move(dir)), out_(out), bundle_(bundle) {}

  void csv(const std::string& name, const CsvTable& table) {
    if (out_.csv) write(name, table.str());
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + (dir_ / name).string() + "'");
    f << content;
    bundle_.files.push_back(name);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }
  void record(const std::string& name) { bundle_.files.push_back(name); }

 private:
  fs::path dir_;
  const OutputConfig& out_;
  ResultBundle& bundle_;
};

HermitianOperator first_order_operator(const RunConfig& cfg) {
  const Grid2D grid = cfg.grid.make();
  const auto spec = cfg.potential_spec();
  if (const auto* w = std::get_if<PerturbationW>(&spec)) return assemble_H_eps(grid, cfg.params, *w);
  return assemble_H(grid, cfg.params, spec);
}

void eigen_csv(Writer& w, const SpectrumReport& rep) {
  CsvTable t({"index", "lambda", "residual", "participation_ratio", "y_decay_rate"});
  for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
    const auto& p = rep.pairs[i];
    t.add({fmt(i), fmt(p.value), fmt(p.residual), fmt(p.participation_ratio), fmt(p.y_decay_rate)});
  }
  w.csv("eigenvalues.csv", t);
}

void cmd_spectrum(const RunConfig& cfg, const RunOptions& opt, Writer& w, ResultBundle& b) {
  const auto sopt = cfg.solver_options(opt.seed);
  const auto& s = cfg.solver;
  if (s.mode == "square-form") {
    const auto q = assemble_square_form(cfg.grid.make(), cfg.params, cfg.potential_spec());
    const auto rep = lowest_of_square(q, s.k, sopt);
    eigen_csv(w, rep);
    const double qmin = rep.pairs.at(0).value;
    const double d2 = cfg.params.delta * cfg.params.delta;
    b.metrics.emplace_back("square_form_min", qmin);
    b.metrics.emplace_back("delta_squared", d2);
    b.checks.emplace_back("square_form_min_ge_delta2_minus_0.05", qmin >= d2 - 0.05);
    return;
  }
  const auto op = first_order_operator(cfg);
  SpectrumReport rep;
  std::size_t count = 0;
  bool certified = false;
  if (s.mode == "dense") {
    rep = dense_eigs(op, sopt);
    for (const auto& p : rep.pairs) count += (p.value > s.lo && p.value < s.hi) ? 1 : 0;
    certified = true;
  } else {
    const double mid = 0.5 * (s.lo + s.hi);
    rep = nearest_eigs(op, mid, s.k, sopt);
    if (sopt.use_factorization) {
      count = count_below(op, s.hi) - count_below(op, s.lo);
      certified = true;
    } else {
      for (const auto& p : rep.pairs) count += (p.value > s.lo && p.value < s.hi) ? 1 : 0;
    }
  }
  eigen_csv(w, rep);
  double min_abs = inf, max_res = 0;
  for (const auto& p : rep.pairs) {
    min_abs = std::min(min_abs, std::abs(p.value));
    max_res = std::max(max_res, p.residual);
  }
  b.metrics.emplace_back("dimension", static_cast<double>(op.dimension()));
  b.metrics.emplace_back("interval_lo", s.lo);
  b.metrics.emplace_back("interval_hi", s.hi);
  b.metrics.emplace_back("gap_count", static_cast<double>(count));
  b.metrics.emplace_back("min_abs_lambda", min_abs);
  b.metrics.emplace_back("max_residual", max_res);
  b.checks.emplace_back("gap_count_certified", certified);
  b.checks.emplace_back("gap_interval_empty", count == 0);
}

void cmd_quasimode(const RunConfig& cfg, Writer& w, ResultBundle& b) {
  const auto& q = cfg.quasimode;
  const Params& params = cfg.params;

  // Weyl residual table and per-(mu, branch) slopes.
  CsvTable weyl({"n", "k", "mu", "branch", "residual", "bound_rhs"});
  CsvTable slopes({"mu", "branch", "slope"});
  bool in_band = true, below = true;
  for (double mu : q.weyl_mu)
    for (int branch : {1, -1}) {
      std::vector<double> ns, res;
      for (int n : q.weyl_n) {
        const auto r = weyl_residual({n, branch * mu}, params);
        weyl.add({fmt(r.n), fmt(r.k), fmt(r.mu), fmt(r.branch), fmt(r.residual), fmt(r.bound_rhs)});
        below = below && r.residual * r.residual <= r.bound_rhs * (1.0 + 1e-9);
        ns.push_back(n);
        res.push_back(r.residual);
      }
      if (ns.size() >= 2) {
        const double slope = loglog_slope(ns, res);
        slopes.add({fmt(branch * mu), fmt(branch), fmt(slope)});
        in_band = in_band && slope >= -1.05 && slope <= -0.95;
      }
    }
  w.csv("weyl.csv", weyl);
  w.csv("weyl_slope.csv", slopes);
  b.checks.emplace_back("weyl_slopes_in_band", in_band);
  b.checks.emplace_back("weyl_residuals_below_bound", below);

  // Cutoff integrals.
  const auto prof = q.profile == "exp-logistic" ? exp_logistic_profile() : smoothstep7_profile();
  CsvTable cut({"n", "Ix", "Iy", "Ixx", "first_deriv_identity_rel_err", "second_deriv_bound_slack"});
  bool ident = true, slack = true;
  for (int n : q.cutoff_n) {
    const auto c = cutoff_derivative_integrals(n, prof, q.quad_order);
    cut.add({fmt(c.n), fmt(c.Ix), fmt(c.Iy), fmt(c.Ixx), fmt(c.first_deriv_identity_rel_err),
             fmt(c.second_deriv_bound_slack)});
    ident = ident && c.first_deriv_identity_rel_err <= 1e-4;
    slack = slack && c.second_deriv_bound_slack > 0.0;
  }
  w.csv("cutoff.csv", cut);
  b.checks.emplace_back("cutoff_first_deriv_identity", ident);
  b.checks.emplace_back("cutoff_second_deriv_bound", slack);

  // Square identity, printed and corrected right-hand sides.
  CsvTable sq({"trial", "lhs", "paper_rhs", "corrected_rhs", "dx_norm2", "paper_rel_err",
               "corrected_rel_err"});
  bool paper_ok = true, corrected_ok = true;
  for (const auto& t : square_identity_trials()) {
    const auto s = square_identity(t, params);
    sq.add({t.name, fmt(s.lhs), fmt(s.paper_rhs), fmt(s.corrected_rhs), fmt(s.dx_norm2),
            fmt(s.paper_rel_err), fmt(s.corrected_rel_err)});
    paper_ok = paper_ok && s.paper_rel_err <= 1e-6;
    corrected_ok = corrected_ok && s.corrected_rel_err <= 1e-6;
  }
  w.csv("square_identity.csv", sq);
  b.checks.emplace_back("square_identity_paper", paper_ok);
  b.checks.emplace_back("square_identity_corrected", corrected_ok);

  const auto spec = cfg.potential_spec();
  if (const auto* box = std::get_if<BoxXY>(&spec)) {
    CsvTable bt({"V", "q_analytic", "q_numeric", "abs_diff"});
    bool match = true;
    for (double v : {-6.0, -4.5, -3.0, -1.5, 0.0, box->value}) {
      const double qa = box_energy_analytic(box->a, box->b, v, params);
      const double qn = box_energy_numeric(box->a, box->b, v, params, 12);
      bt.add({fmt(v), fmt(qa), fmt(qn), fmt(std::abs(qa - qn))});
      match = match && std::abs(qa - qn) <= 1e-8 * std::max(1.0, std::abs(qa));
    }
    w.csv("box.csv", bt);
    b.checks.emplace_back("box_energy_numeric_matches", match);
    if (const auto win = boundstate_window(params, box->a, box->b)) {
      b.metrics.emplace_back("window_V1", win->first);
      b.metrics.emplace_back("window_V2", win->second);
    }
  }
  if (const auto* pw = std::get_if<PerturbationW>(&spec)) {
    const Grid2D grid = cfg.grid.make();
    std::vector<double> eps = q.eps.empty() ? std::vector<double>{pw->epsilon} : q.eps;
    CsvTable at({"eps", "paper", "derived", "divergent"});
    for (double e : eps) {
      const auto r = a_eps_report(*pw, grid, e, params);
      at.add({fmt(e), fmt(r.paper), fmt(r.derived), fmt(r.divergent)});
    }
    w.csv("aeps.csv", at);
    try {
      const auto th = eps_threshold(*pw, grid, params);
      b.metrics.emplace_back("eps_threshold", th.epsilon);
      b.metrics.emplace_back("eps_threshold_small_delta", th.at_small_delta);
      b.metrics.emplace_back("eps_threshold_large_delta", th.at_large_delta);
      b.checks.emplace_back("threshold_limits_hold", th.limits_hold);
    } catch (const InputError& e) {
      b.metrics.emplace_back("eps_threshold", std::nan(""));
    }
    CsvTable gt({"n", "energy", "a_eps_derived", "gap"});
    const double target = a_eps_derived(*pw, grid, pw->epsilon, params);
    double last_gap = inf;
    for (int n : q.gn_n) {
      const double e = gn_trial_energy(*pw, grid, pw->epsilon, params, n, prof, 8);
      last_gap = std::abs(e - target);
      gt.add({fmt(n), fmt(e), fmt(target), fmt(last_gap)});
    }
    w.csv("gn.csv", gt);
    if (!q.gn_n.empty()) {
      b.metrics.emplace_back("gn_gap_at_largest_n", last_gap);
      b.checks.emplace_back("gn_gap_le_0.05", last_gap <= 0.05);
    }
  }
}

void scan_csv(Writer& w, const ScanResult& r, const std::string& name) {
  CsvTable t({"axis_value", "predicted", "observed_count", "min_abs_lambda", "min_participation",
              "agreement"});
  for (const auto& p : r.points)
    t.add({fmt(p.axis_value), p.predicted, fmt(p.observed_count), fmt(p.min_abs_lambda),
           fmt(p.min_participation), p.agreement});
  w.csv(name, t);
}

PredictionSink prediction_writer(Writer& w) {
  return [&w](const ScanResult& r) {
    CsvTable t({"axis_value", "predicted", "prediction_value", "asserted"});
    for (const auto& p : r.points)
      t.add({fmt(p.axis_value), p.predicted, fmt(p.prediction_value), fmt(p.asserted)});
    w.csv("scan_predictions.csv", t);
  };
}

void cmd_scan(const RunConfig& cfg, const RunOptions& opt, Writer& w, ResultBundle& b) {
  const auto& s = *cfg.scan;
  const Grid2D grid = cfg.grid.make();
  ScanSolver solver;
  solver.options = cfg.solver_options(opt.seed);
  solver.k = s.k;
  solver.threads = opt.threads;
  const auto spec = cfg.potential_spec();

  if (s.axis == "convergence") {
    std::vector<int> ladder;
    for (double v : s.values) ladder.push_back(static_cast<int>(v));
    const auto obs = observable_from_string(s.observable);
    const auto st = convergence_study(obs, ladder, cfg.params, grid, spec, solver);
    CsvTable t({"rung", "observable", "value", "fitted_order"});
    for (std::size_t i = 0; i < st.values.size(); ++i)
      t.add({fmt(st.ladder[i]), to_string(obs), fmt(st.values[i]), fmt(st.fitted_order)});
    w.csv("convergence.csv", t);
    b.metrics.emplace_back("fitted_order", st.fitted_order);
    if (obs == Observable::GapEdge) b.checks.emplace_back("fitted_order_ge_1", st.fitted_order >= 1.0);
  } else {
    ScanResult r;
    if (s.axis == "V")
      r = scan_potential(cfg.params, grid, s.a, s.b, s.values, solver, prediction_writer(w));
    else if (s.axis == "eps")
      r = scan_perturbation(cfg.params, grid, std::get<PerturbationW>(spec), s.values, solver,
                            prediction_writer(w));
    else
      r = delocalization_probe(cfg.params, s.values, s.h, spec, solver);
    scan_csv(w, r, "scan.csv");
    b.checks.emplace_back("asserted_points_agree", r.all_agree());
    std::size_t asserted = 0;
    for (const auto& p : r.points) asserted += p.asserted ? 1 : 0;
    b.metrics.emplace_back("asserted_points", static_cast<double>(asserted));
  }

  if (s.fiber_check) {
    const FiberConfig fc = cfg.fiber.value_or(FiberConfig{});
    const double ue = union_edge(xi_grid(fc.xi_max, fc.count), cfg.params);
    const auto rep = nearest_eigs(assemble_T(grid, cfg.params), 0.0, 1, solver.options);
    const double e2 = std::abs(rep.pairs.at(0).value);
    const double rel = std::abs(e2 - ue) / ue;
    CsvTable t({"two_d_min_abs_lambda", "union_edge", "rel_diff"});
    t.add({fmt(e2), fmt(ue), fmt(rel)});
    w.csv("fiber_check.csv", t);
    b.checks.emplace_back("fiber_cross_check_within_5pct", rel <= 0.05);
  }
}

void cmd_fiber(const RunConfig& cfg, const RunOptions& opt, Writer& w, ResultBundle& b) {
  const auto& fc = *cfg.fiber;
  const auto xis = xi_grid(fc.xi_max, fc.count);
  const auto spectra = fiber_scan(xis, cfg.params, fc.ny, fc.y_max, opt.threads, fc.samples);
  CsvTable t({"xi", "edge", "min_abs_lambda"});
  double at_zero = inf;
  for (const auto& s : spectra) {
    t.add({fmt(s.xi), fmt(s.edge), fmt(s.min_abs)});
    if (s.xi == 0.0) at_zero = s.min_abs;
  }
  w.csv("fiber.csv", t);
  const double ue = union_edge(xis, cfg.params);
  const double d = cfg.params.delta;
  b.metrics.emplace_back("union_edge", ue);
  b.metrics.emplace_back("discrete_edge_at_xi0", at_zero);
  b.checks.emplace_back("union_edge_equals_delta", ue == d);
  b.checks.emplace_back("fiber_edge_within_5pct", std::abs(at_zero - d) <= 0.05 * d);
}

void cmd_export(const RunConfig& cfg, Writer& w) {
  const std::string path = w.path("matrix.txt").string();
  if (cfg.solver.mode == "square-form")
    export_matrix(assemble_square_form(cfg.grid.make(), cfg.params, cfg.potential_spec()), path);
  else
    export_matrix(first_order_operator(cfg), path);
  w.record("matrix.txt");
}

}  // namespace

ResultBundle run_command(Command command, const RunConfig& cfg, const RunOptions& options) {
  validate_for(command, cfg);
  ResultBundle bundle;
  bundle.command = command;
  bundle.config_echo = canonical_json(cfg);
  if (command == Command::ValidateConfig) return bundle;

  const fs::path dir(options.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error("cannot create output directory '" + dir.string() + "'");
  Writer w(dir, cfg.output, bundle);
  try {
    switch (command) {
      case Command::Spectrum: cmd_spectrum(cfg, options, w, bundle); break;
      case Command::Quasimode: cmd_quasimode(cfg, w, bundle); break;
      case Command::Scan: cmd_scan(cfg, options, w, bundle); break;
      case Command::Fiber: cmd_fiber(cfg, options, w, bundle); break;
      case Command::ExportMatrix: cmd_export(cfg, w); break;
      case Command::ValidateConfig: break;
    }
  } catch (const ConvergenceError& e) {
    std::string diag = std::string("convergence failure: ") + e.what() + "\nresidual history:\n";
    for (double r : e.history()) diag += format_double(r) + "\n";
    w.write("diagnostics.txt", diag);
    throw;
  }
  if (cfg.output.json) {
    bundle.files.push_back("summary.json");
    const auto summary = summary_json(bundle, utc_now());
    std::ofstream f(dir / "summary.json", std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write summary.json");
    f << summary;
  }
  return bundle;
}

}  // namespace semidirac::cli
