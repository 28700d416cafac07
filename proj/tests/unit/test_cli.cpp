// Unit tests for the cli module: config parsing/canonicalization, report
// formatting, subcommands and the executable's exit codes.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "semidirac/cli.hpp"
#include "semidirac/errors.hpp"

using namespace semidirac;
using namespace semidirac::cli;
namespace fs = std::filesystem;

namespace {

const char* small_config = R"({
  "params": {"delta": 1.0},
  "grid": {"x_min": -6, "x_max": 6, "y_max": 6, "nx": 25, "ny": 13},
  "solver": {"mode": "gap", "interval": [-0.9, 0.9], "k": 4}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("semidirac_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(SEMIDIRAC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError");
  return ConfigError("", "");
}

}  // namespace

TEST_CASE("config: parse, defaults and canonical round-trip") {
  const auto cfg = parse_config(small_config);
  CHECK(cfg.params.delta == 1.0);
  CHECK(cfg.grid.nx == 25);
  CHECK(cfg.solver.mode == "gap");
  CHECK(cfg.potential.kind == "none");
  const std::string c1 = canonical_json(cfg);
  const std::string c2 = canonical_json(parse_config(c1));
  CHECK(c1 == c2);
  CHECK(canonical_json(parse_config(c2)) == c2);
  // Canonical form is independent of key order and whitespace.
  const auto shuffled = parse_config(R"({"solver":{"k":4,"interval":[-0.9,0.9],"mode":"gap"},
      "grid":{"ny":13,"nx":25,"y_max":6,"x_max":6,"x_min":-6},"params":{"delta":1}})");
  CHECK(canonical_json(shuffled) == c1);

  const auto box = parse_config(R"({"params":{"delta":2},
      "grid":{"x_min":-9,"x_max":14,"y_max":14,"nx":93,"ny":57},
      "potential":{"kind":"box","a":1,"b":4.141592653589793,"value":-3}})");
  CHECK(std::holds_alternative<BoxXY>(box.potential_spec()));
  CHECK(canonical_json(parse_config(canonical_json(box))) == canonical_json(box));
}

TEST_CASE("config: field-level errors, unknown keys rejected") {
  CHECK(config_error(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":2,"ny":13}})")
            .field() == "grid.nx");
  CHECK(config_error(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13,"nz":3}})")
            .field() == "grid.nz");
  CHECK(config_error(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13},"extra":1})")
            .field() == "extra");
  CHECK(config_error(R"({"params":{"delta":-1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13}})")
            .field() == "params.delta");
  CHECK(config_error(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25.5,"ny":13}})")
            .field() == "grid.nx");
  CHECK(config_error(R"({"params":{"delta":1}})").field() == "grid");
  CHECK(config_error(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13},
      "solver":{"mode":"bogus"}})").field() == "solver.mode");
  CHECK(config_error(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13},
      "solver":{"interval":[1,-1]}})").field() == "solver.interval");
  CHECK(config_error("{not json").field() == "<document>");

  // Dense mode over the cap fails validation before any compute.
  auto cfg = parse_config(R"({"params":{"delta":1},"grid":{"x_min":-20,"x_max":20,"y_max":20,"nx":161,"ny":81},
      "solver":{"mode":"dense"}})");
  CHECK_THROWS_AS(validate_for(Command::Spectrum, cfg), ConfigError);
  // The scan subcommand needs a scan block.
  CHECK_THROWS_AS(validate_for(Command::Scan, parse_config(small_config)), ConfigError);
}

TEST_CASE("report: number formatting and content hash") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  // git hash-object of "hello\n".
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");

  CsvTable t({"a", "b"});
  t.add({format_double(1.5), "x"});
  CHECK(t.str() == "a,b\n1.5,x\n");
  CHECK_THROWS_AS(t.add({"only-one"}), DimensionError);

  CHECK(exit_code_for(ConfigError("grid.nx", "bad")) == 2);
  CHECK(exit_code_for(InputError("bad")) == 2);
  CHECK(exit_code_for(ConvergenceError("stalled")) == 3);
  CHECK(exit_code_for(std::runtime_error("other")) == 1);
  CHECK(command_from_string("export-matrix") == Command::ExportMatrix);
  CHECK_THROWS_AS(command_from_string("nope"), ConfigError);
}

TEST_CASE("commands: spectrum on a small V = 0 grid") {
  const auto dir = scratch_dir("spectrum");
  const auto cfg = parse_config(small_config);
  RunOptions opt;
  opt.out_dir = dir.string();
  const auto bundle = run_command(Command::Spectrum, cfg, opt);
  CHECK(bundle.check("gap_interval_empty"));
  const auto csv = slurp(dir / "eigenvalues.csv");
  CHECK(csv.rfind("index,lambda,residual,participation_ratio,y_decay_rate\n", 0) == 0);
  const auto summary = slurp(dir / "summary.json");
  CHECK(summary.find("\"config_hash\"") != std::string::npos);
  CHECK(summary.find(git_blob_sha1(canonical_json(cfg))) != std::string::npos);
  CHECK(summary.find("\"gap_interval_empty\": true") != std::string::npos);

  // Dense mode on the same small grid agrees.
  auto dense = parse_config(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13},
      "solver":{"mode":"dense"}})");
  const auto db = run_command(Command::Spectrum, dense, opt);
  CHECK(db.check("gap_interval_empty"));
}

TEST_CASE("commands: quasimode, fiber, scan and export-matrix") {
  const auto dir = scratch_dir("commands");
  RunOptions opt;
  opt.out_dir = dir.string();

  const auto q = parse_config(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13},
      "quasimode":{"weyl_n":[8,16,32,64],"cutoff_n":[4,16,64]}})");
  const auto qb = run_command(Command::Quasimode, q, opt);
  CHECK(qb.check("weyl_slopes_in_band"));
  CHECK(qb.check("weyl_residuals_below_bound"));
  CHECK(qb.check("cutoff_first_deriv_identity"));
  CHECK(qb.check("cutoff_second_deriv_bound"));
  CHECK(qb.check("square_identity_corrected"));
  CHECK(slurp(dir / "weyl.csv").rfind("n,k,mu,branch,residual,bound_rhs\n", 0) == 0);
  CHECK(slurp(dir / "cutoff.csv")
            .rfind("n,Ix,Iy,Ixx,first_deriv_identity_rel_err,second_deriv_bound_slack\n", 0) == 0);

  const auto f = parse_config(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":25,"ny":13},
      "fiber":{"xi_max":2,"count":9,"ny":200,"y_max":20}})");
  const auto fb = run_command(Command::Fiber, f, opt);
  CHECK(fb.check("union_edge_equals_delta"));
  CHECK(fb.check("fiber_edge_within_5pct"));

  const auto s = parse_config(R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":49,"ny":25},
      "potential":{"kind":"perturbation","x0":-1.5,"x1":1.5,"y0":0,"y1":3,"w12":[-1,0]},
      "scan":{"axis":"eps","values":[0,1,3]}})");
  const auto sb = run_command(Command::Scan, s, opt);
  CHECK(sb.check("asserted_points_agree"));
  const auto scan_csv = slurp(dir / "scan.csv");
  CHECK(scan_csv.rfind("axis_value,predicted,observed_count,min_abs_lambda,min_participation,agreement\n", 0) == 0);
  const auto pred = slurp(dir / "scan_predictions.csv");
  CHECK(pred.find("1,present,") != std::string::npos);
  CHECK(pred.find("3,none,") != std::string::npos);

  const auto e = parse_config(small_config);
  run_command(Command::ExportMatrix, e, opt);
  CHECK(fs::exists(dir / "matrix.txt"));
}

TEST_CASE("executable: exit codes and byte-identical reruns") {
  const auto dir = scratch_dir("binary");
  const auto good = write_config(dir, small_config);
  const std::string out1 = (dir / "o1").string(), out2 = (dir / "o2").string();
  CHECK(run_binary("validate-config --config " + good.string() + " --out " + out1) == 0);
  CHECK(run_binary("spectrum --config " + good.string() + " --out " + out1 + " --threads 1") == 0);
  CHECK(run_binary("spectrum --config " + good.string() + " --out " + out2 + " --threads 2") == 0);
  CHECK(slurp(fs::path(out1) / "eigenvalues.csv") == slurp(fs::path(out2) / "eigenvalues.csv"));
  CHECK_FALSE(slurp(fs::path(out1) / "eigenvalues.csv").empty());

  const auto bad_dir = scratch_dir("binary_bad");
  const auto bad = write_config(bad_dir,
      R"({"params":{"delta":1},"grid":{"x_min":-6,"x_max":6,"y_max":6,"nx":2,"ny":13}})");
  CHECK(run_binary("spectrum --config " + bad.string() + " --out " + out1) == 2);
  const auto cap_dir = scratch_dir("binary_cap");
  const auto cap = write_config(cap_dir,
      R"({"params":{"delta":1},"grid":{"x_min":-20,"x_max":20,"y_max":20,"nx":161,"ny":81},"solver":{"mode":"dense"}})");
  CHECK(run_binary("spectrum --config " + cap.string() + " --out " + out1) == 2);
  CHECK(run_binary("spectrum --out " + out1) != 0);  // --config is required
  CHECK(run_binary("spectrum --config /nonexistent/config.json") == 2);
}
