// semidirac/cli.hpp
//
// The operational surface: JSON run configuration (schema-checked, unknown
// keys rejected, canonical echo), CSV/JSON reporting with fixed 17-digit
// formatting, and the subcommands spectrum | quasimode | scan | fiber |
// export-matrix | validate-config.

#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semidirac/eigensolve.hpp"
#include "semidirac/lattice.hpp"

namespace semidirac::cli {

/// Library version string.
std::string version();

// ---------------------------------------------------------------------------
// Configuration

struct GridConfig {
  double x_min = 0, x_max = 0, y_max = 0;
  int nx = 0, ny = 0;
  Grid2D make() const { return Grid2D(x_min, x_max, y_max, nx, ny); }
};

/// kind: none | box (a, b, value) | x_only (samples) | x_bump (center, radius,
/// height) | perturbation (rectangle x0..x1 x y0..y1 carrying w11, w22, w12,
/// w21 = conj(w12), epsilon).
struct PotentialConfig {
  std::string kind = "none";
  double a = 0, b = 0, value = 0;
  std::vector<double> samples;
  double center = 0, radius = 1, height = 1;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0, w11 = 0, w22 = 0;
  cplx w12{0.0, 0.0};
  double epsilon = 1;
};

struct SolverConfig {
  std::string mode = "gap";  // dense | gap | square-form
  double lo = 0, hi = 0;     // gap interval; defaults to (-0.9 delta, 0.9 delta)
  std::size_t k = 6;
  double tol = 1e-9;
  std::size_t max_iter = 400;
  std::size_t dense_cap = 4000;
  std::size_t block_size = 4;
  bool use_factorization = true;
};

/// axis: V (box [a, b] from `box`) | eps (W from the perturbation potential)
/// | convergence (values = nx ladder, `observable`) | domain (values = L ladder, `h`).
struct ScanConfig {
  std::string axis;
  std::vector<double> values;
  double a = 0, b = 0;
  std::string observable = "gap-edge";
  double h = 0.5;
  std::size_t k = 4;
  bool fiber_check = false;
};

struct QuasimodeConfig {
  std::vector<int> weyl_n{8, 16, 32, 64};
  std::vector<double> weyl_mu;  // defaults to {delta, delta + 1, delta + 4}
  std::vector<int> cutoff_n{4, 16, 64};
  std::string profile = "smoothstep7";  // smoothstep7 | exp-logistic
  int quad_order = 16;
  std::vector<double> eps;   // A_eps rows (perturbation potential only)
  std::vector<int> gn_n{8, 32};
};

struct FiberConfig {
  double xi_max = 4;
  std::size_t count = 81;
  int ny = 400;
  double y_max = 20;
  std::size_t samples = 8;
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true, json = true;
};

struct RunConfig {
  Params params;
  GridConfig grid;
  PotentialConfig potential;
  SolverConfig solver;
  std::optional<ScanConfig> scan;
  QuasimodeConfig quasimode;
  std::optional<FiberConfig> fiber;
  OutputConfig output;

  /// The potential sampled on the configured grid.
  PotentialSpec potential_spec() const;
  SolverOptions solver_options(std::uint64_t seed = 0) const;
};

/// Parses and validates a JSON document. Throws ConfigError naming the
/// offending key path ("<document>" for syntax errors).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical echo: every field explicit, keys sorted, compact. Idempotent
/// under parse_config.
std::string canonical_json(const RunConfig& cfg);

enum class Command { Spectrum, Quasimode, Scan, Fiber, ExportMatrix, ValidateConfig };
Command command_from_string(const std::string& name);
std::string to_string(Command c);

/// Command-specific preconditions checked before any compute (dense cap,
/// required blocks, scan geometry). Throws ConfigError.
void validate_for(Command command, const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Reporting

/// 17 significant digits, '.' decimal point; inf/-inf/nan spelled out.
std::string format_double(double v);

/// SHA-1 of "blob <size>\0<content>", lowercase hex (git object id).
std::string git_blob_sha1(const std::string& content);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  /// Throws DimensionError when the cell count differs from the header.
  void add(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct ResultBundle {
  Command command = Command::ValidateConfig;
  std::string config_echo;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::pair<std::string, double>> metrics;

  /// Value of a named check; throws InputError when absent.
  bool check(const std::string& name) const;
};

/// UTC timestamp, version and content hash around the bundle.
std::string summary_json(const ResultBundle& bundle, const std::string& timestamp);

// ---------------------------------------------------------------------------
// Commands

struct RunOptions {
  std::string out_dir = "out";
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 0;
};

/// Validates, runs and writes every output file (single writer). On a
/// ConvergenceError, diagnostics.txt is written before rethrowing.
ResultBundle run_command(Command command, const RunConfig& cfg, const RunOptions& options);

/// ConfigError / InputError / DimensionError / UnsupportedError -> 2,
/// ConvergenceError -> 3, anything else -> 1.
int exit_code_for(const std::exception& e);

}  // namespace semidirac::cli
