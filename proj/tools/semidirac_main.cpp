// semidirac: command-line front end of the spectral bench.
//
//   semidirac <spectrum|quasimode|scan|fiber|export-matrix|validate-config>
//             --config PATH [--out DIR] [--threads N] [--seed U64]
//
// Exit codes: 0 success, 2 configuration or precondition failure,
// 3 solver non-convergence, 1 anything else.
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "semidirac/cli.hpp"

namespace cli = semidirac::cli;

int main(int argc, char** argv) {
  CLI::App app{"Half-space semi-Dirac spectral solver and theorem bench"};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "./out";
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  for (const char* name :
       {"spectrum", "quasimode", "scan", "fiber", "export-matrix", "validate-config"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (default: hardware count)");
    sub->add_option("--seed", seed, "seed for randomized start vectors")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const auto command = cli::command_from_string(name);
    const auto cfg = cli::load_config(config_path);
    cli::RunOptions options;
    options.out_dir = out_dir;
    options.threads = threads;
    options.seed = seed;
    const auto bundle = cli::run_command(command, cfg, options);
    if (command == cli::Command::ValidateConfig) {
      std::cout << bundle.config_echo << "\n";
      return 0;
    }
    bool all = true;
    for (const auto& [check, ok] : bundle.checks) {
      std::cout << (ok ? "PASS " : "FAIL ") << check << "\n";
      all = all && ok;
    }
    std::cout << "wrote " << bundle.files.size() << " file(s) to " << out_dir
              << (all ? "" : " (some checks failed; see summary.json)") << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "semidirac " << name << ": " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
