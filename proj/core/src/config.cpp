// Run configuration: JSON parsing with field-level validation, unknown-key
// rejection and the canonical echo.
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "semidirac/cli.hpp"
#include "semidirac/errors.hpp"
#include "semidirac/fiber.hpp"
#include "semidirac/lattice.hpp"
#include "semidirac/scan.hpp"

namespace semidirac::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Typed accessor over one JSON object that remembers which keys were read,
// so that finish() can reject the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<document>" : path_, "must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key), "required key is missing");
    return j_.at(key);
  }

  double num(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(join(path_, key), "required key is missing");
    }
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key), "must be finite");
    return d;
  }

  long long integer(const std::string& key, long long min, std::optional<long long> def = std::nullopt) {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(join(path_, key), "required key is missing");
    }
    const long long v = as_integer(j_.at(key), join(path_, key));
    if (v < min)
      throw ConfigError(join(path_, key), "must be >= " + std::to_string(min) + " (got " +
                                              std::to_string(v) + ")");
    return v;
  }

  std::string str(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path_, key), "must be a boolean");
    return v.get<bool>();
  }

  std::vector<double> nums(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>()))
        throw ConfigError(join(path_, key), "must be an array of finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> ints(const std::string& key, std::vector<int> def, int min) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "must be an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      const long long x = as_integer(e, join(path_, key));
      if (x < min || x > 1000000000)
        throw ConfigError(join(path_, key), "entries must be >= " + std::to_string(min));
      out.push_back(static_cast<int>(x));
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
  }

  const std::string& path() const { return path_; }

 private:
  static long long as_integer(const json& v, const std::string& field) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e15)
        return static_cast<long long>(d);
    }
    throw ConfigError(field, "must be an integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

std::pair<double, double> pair_of(Obj& o, const std::string& key) {
  const auto v = o.nums(key, {});
  require(v.size() == 2, join(o.path(), key), "must be a 2-element array");
  return {v[0], v[1]};
}

void parse_potential(Obj o, RunConfig& cfg) {
  auto& p = cfg.potential;
  p.kind = o.str("kind", "none");
  const std::string f = o.path();
  if (p.kind == "none") {
  } else if (p.kind == "box") {
    p.a = o.num("a");
    p.b = o.num("b");
    p.value = o.num("value");
  } else if (p.kind == "x_only") {
    p.samples = o.nums("samples", {});
    require(p.samples.size() == static_cast<std::size_t>(cfg.grid.nx), join(f, "samples"),
            "needs grid.nx entries");
  } else if (p.kind == "x_bump") {
    p.center = o.num("center", 0.0);
    p.radius = o.num("radius", 1.0);
    p.height = o.num("height", 1.0);
    require(p.radius > 0.0, join(f, "radius"), "must be positive");
  } else if (p.kind == "perturbation") {
    p.x0 = o.num("x0");
    p.x1 = o.num("x1");
    p.y0 = o.num("y0", 0.0);
    p.y1 = o.num("y1");
    p.w11 = o.num("w11", 0.0);
    p.w22 = o.num("w22", 0.0);
    const auto w12 = o.nums("w12", {0.0, 0.0});
    require(w12.size() == 2, join(f, "w12"), "must be [re, im]");
    p.w12 = cplx(w12[0], w12[1]);
    p.epsilon = o.num("epsilon", 1.0);
    require(p.x0 < p.x1, join(f, "x1"), "must exceed x0");
    require(p.y0 >= 0.0 && p.y0 < p.y1, join(f, "y1"), "requires 0 <= y0 < y1");
  } else {
    throw ConfigError(join(f, "kind"), "must be one of none, box, x_only, x_bump, perturbation");
  }
  o.finish();
  try {
    validate_potential(cfg.potential_spec(), cfg.grid.make());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(f, e.what());
  }
}

void parse_solver(Obj o, RunConfig& cfg) {
  auto& s = cfg.solver;
  const std::string f = o.path();
  s.mode = o.str("mode", "gap");
  require(s.mode == "dense" || s.mode == "gap" || s.mode == "square-form", join(f, "mode"),
          "must be one of dense, gap, square-form");
  if (o.has("interval")) {
    const auto [lo, hi] = pair_of(o, "interval");
    require(lo < hi, join(f, "interval"), "requires lo < hi");
    s.lo = lo;
    s.hi = hi;
  } else {
    s.lo = -0.9 * cfg.params.delta;
    s.hi = 0.9 * cfg.params.delta;
  }
  s.k = static_cast<std::size_t>(o.integer("k", 1, 6));
  s.tol = o.num("tol", 1e-9);
  require(s.tol > 0.0, join(f, "tol"), "must be positive");
  s.max_iter = static_cast<std::size_t>(o.integer("max_iter", 1, 400));
  s.dense_cap = static_cast<std::size_t>(o.integer("dense_cap", 1, 4000));
  s.block_size = static_cast<std::size_t>(o.integer("block_size", 1, 4));
  s.use_factorization = o.boolean("use_factorization", true);
  o.finish();
}

void parse_scan(Obj o, RunConfig& cfg) {
  ScanConfig s;
  const std::string f = o.path();
  s.axis = o.str("axis", "");
  require(s.axis == "V" || s.axis == "eps" || s.axis == "convergence" || s.axis == "domain",
          join(f, "axis"), "must be one of V, eps, convergence, domain");
  s.values = o.nums("values", {});
  require(!s.values.empty(), join(f, "values"), "must be a non-empty array");
  if (s.axis == "V") {
    const auto [a, b] = pair_of(o, "box");
    require(a > 0.0 && a < b, join(f, "box"), "requires 0 < a < b");
    s.a = a;
    s.b = b;
  }
  if (s.axis == "convergence") {
    s.observable = o.str("observable", "gap-edge");
    try {
      observable_from_string(s.observable);
    } catch (const Error& e) {
      throw ConfigError(join(f, "observable"), e.what());
    }
    for (double v : s.values)
      require(v == std::floor(v) && v >= 4.0, join(f, "values"), "ladder entries must be integers >= 4");
  }
  if (s.axis == "domain") {
    s.h = o.num("h", 0.5);
    require(s.h > 0.0, join(f, "h"), "must be positive");
  }
  s.k = static_cast<std::size_t>(o.integer("k", 1, 4));
  s.fiber_check = o.boolean("fiber_check", false);
  o.finish();
  cfg.scan = s;
}

void parse_quasimode(Obj o, RunConfig& cfg) {
  auto& q = cfg.quasimode;
  const std::string f = o.path();
  q.weyl_n = o.ints("weyl_n", q.weyl_n, 1);
  q.weyl_mu = o.nums("weyl_mu", {});
  for (double mu : q.weyl_mu)
    require(mu >= cfg.params.delta, join(f, "weyl_mu"), "entries must be >= delta (branch sign is added)");
  q.cutoff_n = o.ints("cutoff_n", q.cutoff_n, 2);
  q.profile = o.str("profile", q.profile);
  require(q.profile == "smoothstep7" || q.profile == "exp-logistic", join(f, "profile"),
          "must be smoothstep7 or exp-logistic");
  q.quad_order = static_cast<int>(o.integer("quad_order", 2, q.quad_order));
  require(q.quad_order <= 64, join(f, "quad_order"), "must be <= 64");
  q.eps = o.nums("eps", {});
  q.gn_n = o.ints("gn_n", q.gn_n, 2);
  o.finish();
}

void parse_fiber(Obj o, RunConfig& cfg) {
  FiberConfig fc;
  const std::string f = o.path();
  fc.xi_max = o.num("xi_max", fc.xi_max);
  require(fc.xi_max > 0.0, join(f, "xi_max"), "must be positive");
  fc.count = static_cast<std::size_t>(o.integer("count", 2, 81));
  fc.ny = static_cast<int>(o.integer("ny", 4, 400));
  fc.y_max = o.num("y_max", fc.y_max);
  require(fc.y_max > 0.0, join(f, "y_max"), "must be positive");
  fc.samples = static_cast<std::size_t>(o.integer("samples", 1, 8));
  o.finish();
  cfg.fiber = fc;
}

void parse_output(Obj o, RunConfig& cfg) {
  auto& out = cfg.output;
  out.directory = o.str("directory", "out");
  require(!out.directory.empty(), join(o.path(), "directory"), "must be non-empty");
  if (o.has("formats")) {
    const json& v = o.at("formats");
    require(v.is_array(), join(o.path(), "formats"), "must be an array");
    out.csv = out.json = false;
    for (const auto& e : v) {
      require(e.is_string(), join(o.path(), "formats"), "entries must be strings");
      const auto s = e.get<std::string>();
      if (s == "csv")
        out.csv = true;
      else if (s == "json")
        out.json = true;
      else
        throw ConfigError(join(o.path(), "formats"), "entries must be csv or json");
    }
  }
  o.finish();
}

}  // namespace

PotentialSpec RunConfig::potential_spec() const {
  const auto& p = potential;
  if (p.kind == "box") return BoxXY{p.a, p.b, p.value};
  if (p.kind == "x_only") return XOnly{p.samples};
  if (p.kind == "x_bump") {
    const Grid2D g = grid.make();
    XOnly xo;
    for (int i = 0; i < g.nx(); ++i) {
      const double s = (g.x(i) - p.center) / p.radius;
      xo.samples.push_back(std::abs(s) < 1.0 ? p.height * std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0);
    }
    return xo;
  }
  if (p.kind == "perturbation")
    return rectangle_perturbation(grid.make(), p.x0, p.x1, p.y0, p.y1, p.w12, p.w11, p.w22,
                                  p.epsilon);
  return NoPotential{};
}

SolverOptions RunConfig::solver_options(std::uint64_t seed) const {
  SolverOptions o;
  o.tol = solver.tol;
  o.max_iter = solver.max_iter;
  o.dense_cap = solver.dense_cap;
  o.block_size = solver.block_size;
  o.use_factorization = solver.use_factorization;
  o.seed = seed;
  return o;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  Obj root(doc, "");
  {
    Obj p(root.at("params"), "params");
    cfg.params.delta = p.num("delta");
    require(cfg.params.delta > 0.0, "params.delta", "must be positive");
    p.finish();
  }
  {
    Obj g(root.at("grid"), "grid");
    cfg.grid.x_min = g.num("x_min");
    cfg.grid.x_max = g.num("x_max");
    cfg.grid.y_max = g.num("y_max");
    cfg.grid.nx = static_cast<int>(g.integer("nx", 4));
    cfg.grid.ny = static_cast<int>(g.integer("ny", 4));
    require(cfg.grid.x_min < cfg.grid.x_max, "grid.x_max", "must exceed x_min");
    require(cfg.grid.y_max > 0.0, "grid.y_max", "must be positive");
    require(cfg.grid.nx <= 100000 && cfg.grid.ny <= 100000, "grid", "node counts are limited to 1e5 per axis");
    g.finish();
  }
  if (root.has("potential")) parse_potential(Obj(doc.at("potential"), "potential"), cfg);
  if (root.has("solver")) {
    parse_solver(Obj(doc.at("solver"), "solver"), cfg);
  } else {
    cfg.solver.lo = -0.9 * cfg.params.delta;
    cfg.solver.hi = 0.9 * cfg.params.delta;
  }
  if (root.has("scan")) parse_scan(Obj(doc.at("scan"), "scan"), cfg);
  if (root.has("quasimode")) parse_quasimode(Obj(doc.at("quasimode"), "quasimode"), cfg);
  if (cfg.quasimode.weyl_mu.empty()) {
    const double d = cfg.params.delta;
    cfg.quasimode.weyl_mu = {d, d + 1.0, d + 4.0};
  }
  if (root.has("fiber")) parse_fiber(Obj(doc.at("fiber"), "fiber"), cfg);
  if (root.has("output")) parse_output(Obj(doc.at("output"), "output"), cfg);
  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_json(const RunConfig& cfg) {
  json j;
  j["params"] = {{"delta", cfg.params.delta}};
  j["grid"] = {{"x_min", cfg.grid.x_min}, {"x_max", cfg.grid.x_max}, {"y_max", cfg.grid.y_max},
               {"nx", cfg.grid.nx},       {"ny", cfg.grid.ny}};
  const auto& p = cfg.potential;
  json pj = {{"kind", p.kind}};
  if (p.kind == "box") {
    pj["a"] = p.a;
    pj["b"] = p.b;
    pj["value"] = p.value;
  } else if (p.kind == "x_only") {
    pj["samples"] = p.samples;
  } else if (p.kind == "x_bump") {
    pj["center"] = p.center;
    pj["radius"] = p.radius;
    pj["height"] = p.height;
  } else if (p.kind == "perturbation") {
    pj["x0"] = p.x0;
    pj["x1"] = p.x1;
    pj["y0"] = p.y0;
    pj["y1"] = p.y1;
    pj["w11"] = p.w11;
    pj["w22"] = p.w22;
    pj["w12"] = {p.w12.real(), p.w12.imag()};
    pj["epsilon"] = p.epsilon;
  }
  j["potential"] = pj;
  const auto& s = cfg.solver;
  j["solver"] = {{"mode", s.mode},         {"interval", {s.lo, s.hi}},
                 {"k", s.k},               {"tol", s.tol},
                 {"max_iter", s.max_iter}, {"dense_cap", s.dense_cap},
                 {"block_size", s.block_size}, {"use_factorization", s.use_factorization}};
  if (cfg.scan) {
    const auto& sc = *cfg.scan;
    json sj = {{"axis", sc.axis}, {"values", sc.values}, {"k", sc.k}, {"fiber_check", sc.fiber_check}};
    if (sc.axis == "V") sj["box"] = {sc.a, sc.b};
    if (sc.axis == "convergence") sj["observable"] = sc.observable;
    if (sc.axis == "domain") sj["h"] = sc.h;
    j["scan"] = sj;
  }
  const auto& q = cfg.quasimode;
  j["quasimode"] = {{"weyl_n", q.weyl_n},     {"weyl_mu", q.weyl_mu},
                    {"cutoff_n", q.cutoff_n}, {"profile", q.profile},
                    {"quad_order", q.quad_order}, {"eps", q.eps},
                    {"gn_n", q.gn_n}};
  if (cfg.fiber) {
    const auto& f = *cfg.fiber;
    j["fiber"] = {{"xi_max", f.xi_max}, {"count", f.count}, {"ny", f.ny},
                  {"y_max", f.y_max},   {"samples", f.samples}};
  }
  json formats = json::array();
  if (cfg.output.csv) formats.push_back("csv");
  if (cfg.output.json) formats.push_back("json");
  j["output"] = {{"directory", cfg.output.directory}, {"formats", formats}};
  return j.dump();
}

Command command_from_string(const std::string& name) {
  for (auto c : {Command::Spectrum, Command::Quasimode, Command::Scan, Command::Fiber,
                 Command::ExportMatrix, Command::ValidateConfig})
    if (to_string(c) == name) return c;
  throw ConfigError("command", "unknown subcommand '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::Quasimode: return "quasimode";
    case Command::Scan: return "scan";
    case Command::Fiber: return "fiber";
    case Command::ExportMatrix: return "export-matrix";
    case Command::ValidateConfig: return "validate-config";
  }
  return "unknown";
}

void validate_for(Command command, const RunConfig& cfg) {
  const Grid2D grid = cfg.grid.make();
  const std::size_t nxa = static_cast<std::size_t>(cfg.grid.nx - 2);
  const std::size_t dim = 2 * nxa * static_cast<std::size_t>(cfg.grid.ny - 1) - nxa;
  const auto& kind = cfg.potential.kind;
  if (command == Command::Spectrum || command == Command::ExportMatrix) {
    if (cfg.solver.mode == "dense" && dim > cfg.solver.dense_cap)
      throw ConfigError("solver.mode", "dense mode needs dimension <= dense_cap (" +
                                           std::to_string(cfg.solver.dense_cap) + "), grid gives " +
                                           std::to_string(dim));
    if (cfg.solver.mode == "square-form" && kind != "none" && kind != "x_only" && kind != "x_bump")
      throw ConfigError("potential.kind", "the square form supports x-only potentials only");
    if (kind == "perturbation" && !std::get<PerturbationW>(cfg.potential_spec()).self_adjoint())
      throw ConfigError("potential", "W must be self-adjoint");
  }
  if (command == Command::Scan) {
    if (!cfg.scan) throw ConfigError("scan", "required by the scan subcommand");
    const auto& s = *cfg.scan;
    if (s.axis == "V") {
      const double w = s.b - s.a;
      if (s.a < grid.x_min() || s.b > grid.x_max() || s.b > grid.y_max())
        throw ConfigError("scan.box", "box lies outside the domain");
      if (grid.x_min() > s.a - 3 * w || grid.x_max() < s.b + 3 * w || grid.y_max() < s.b + 3 * w)
        throw ConfigError("scan.box", "domain must contain the box with a margin of 3 box widths");
    }
    if (s.axis == "eps" && kind != "perturbation")
      throw ConfigError("potential.kind", "an eps scan needs a perturbation potential");
    if (s.axis == "convergence") {
      if (s.values.size() < 3) throw ConfigError("scan.values", "needs at least 3 rungs");
      for (std::size_t i = 1; i < s.values.size(); ++i)
        if (s.values[i] <= s.values[i - 1])
          throw ConfigError("scan.values", "ladder must be strictly increasing");
    }
    if (s.axis == "domain") {
      if (s.values.size() < 2) throw ConfigError("scan.values", "needs at least 2 domains");
      if (kind != "none" && kind != "box")
        throw ConfigError("potential.kind", "the delocalization probe takes no potential or a box");
    }
  }
  if (command == Command::Fiber && !cfg.fiber)
    throw ConfigError("fiber", "required by the fiber subcommand");
  // The union edge needs xi = 0, which only odd xi grids contain.
  if ((command == Command::Fiber || (command == Command::Scan && cfg.scan->fiber_check)) &&
      cfg.fiber && cfg.fiber->count % 2 == 0)
    throw ConfigError("fiber.count", "must be odd so that the xi grid contains 0");
}

}  // namespace semidirac::cli
