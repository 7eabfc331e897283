#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fklab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fklab: overdamped lattice dynamics on a half space and its continuum limit"};

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  bool seedless = false;

  app.add_option("--config", config_path, "Path to the JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Artifact directory (overrides output.dir)");
  app.add_option("--workers", workers, "Worker threads (overrides the config)");
  app.add_flag("--seedless", seedless,
               "Assert in the manifest that no randomness is involved anywhere");

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open " << config_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  fklab::RunConfig cfg;
  try {
    cfg = fklab::parse_config(buf.str());
  } catch (const fklab::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  const fklab::RunResult result = fklab::run(cfg, out_dir, workers, seedless);
  if (!result.message.empty()) std::cerr << result.message << "\n";
  if (!result.artifact_dir.empty()) {
    std::cout << result.artifact_dir.string() << "\n";
  }
  return result.exit_code;
}
