// tcov <kind> --config FILE --out FILE [--seed N] [--threads N]

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tcov/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Structured covariance estimation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tcov::version_string());

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> threads;

  for (const char* kind : {"convergence", "mse_vs_n", "sinr", "crlb_table", "runtime"}) {
    CLI::App* sub = app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "CSV output path (defaults to the config's output key)");
    sub->add_option("--seed", seed, "override the base seed");
    sub->add_option("--threads", threads, "worker threads for Monte-Carlo trials")->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    tcov::ExperimentConfig cfg = tcov::load_config(config_path);
    if (tcov::to_string(cfg.kind) != kind) {
      std::cerr << "tcov: config kind '" << tcov::to_string(cfg.kind) << "' does not match subcommand '" << kind
                << "'\n";
      return 2;
    }
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!out_path.empty()) cfg.output = out_path;
    if (cfg.output.empty()) {
      std::cerr << "tcov: no output path (pass --out or set 'output' in the config)\n";
      return 2;
    }
    const tcov::ResultTable table = tcov::run_experiment(cfg);
    tcov::write_table(table, std::filesystem::path(cfg.output));
  } catch (const tcov::ValidationError& e) {
    std::cerr << "tcov: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tcov: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
