#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "cylperc/harness.hpp"

int main(int argc, char** argv) {
  using namespace cylperc;
  CLI::App app{"Cylinder percolation experiments"};
  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("experiment", experiment, "Experiment name")->required();
  app.add_option("--config", config_path, "key=value config file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides config and CYLPERC_SEED)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* thr_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.footer("Experiments: vacancy cov crossing_H crossing_plane circuit pn qn recursion induction tail lemma_tube "
             "lemma_core lemma_horizon lemma_blocking covering contrast\n"
             "Exit codes: 0 success, 2 config error, 3 resource limit.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (const char* env = std::getenv("CYLPERC_SEED")) set_config_value(cfg, "seed", env);
    if (*seed_opt) set_config_value(cfg, "seed", std::to_string(seed));
    if (*out_opt) set_config_value(cfg, "out_dir", out_dir);
    if (*thr_opt) set_config_value(cfg, "threads", std::to_string(threads));
    validate_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto records = run_experiment(cfg, experiment);
    write_outputs(cfg, experiment, records);
    for (const auto& r : records) std::cout << csv_row(r) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PartialResults& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    write_outputs(cfg, experiment, e.records, true);
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
