#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "homdip/parallel.hpp"
#include "homdip/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hong-Ou-Mandel dip simulator for phase-screen turbulence"};
  app.set_version_flag("--version", HOMDIP_VERSION);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the scans described by a JSON config");
  std::string config_path;
  homdip::RunOptions options;
  options.workers = homdip::default_workers();
  std::uint64_t seed = 0;
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->add_option("--workers", options.workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", options.out_dir, "Output directory");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) options.seed = seed;

  homdip::RunConfig config;
  try {
    config = homdip::load_config(config_path);
  } catch (const homdip::ConfigDiagnostic& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    const homdip::RunManifest m = homdip::run(config, options);
    for (const auto& c : m.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    std::cout << "wrote " << options.out_dir << " in " << m.wall_seconds << " s\n";
    return m.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: numerical failure: " << e.what() << "\n";
    return 3;
  }
}
