#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sgm/sgm.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Solver and verification harness for a singular sign-changing elliptic system"};
  std::string config_path;
  std::string out_dir = "out";
  std::string command = "all";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "configuration file (key = value)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--command", command, "pipeline stage")
      ->check(CLI::IsMember({"barriers", "eigen", "solve", "continuation", "verify", "all"}));
  auto* seed_opt = app.add_option("--seed", seed, "overrides run.seed");
  CLI11_PARSE(app, argc, argv);

  try {
    sgm::RunConfig cfg = sgm::load_config(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed;
    sgm::Pipeline pipeline(std::move(cfg), out_dir);
    std::cout << "config_hash=" << pipeline.config_hash() << '\n';
    return pipeline.run(command, std::cout);
  } catch (const sgm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
