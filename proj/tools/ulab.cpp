#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ulab/config.hpp"
#include "ulab/parallel.hpp"
#include "ulab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ulab - uniformity-norm and recurrence experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  bool validate_only = false;

  for (const auto& name : ulab::config::known_subcommands()) {
    auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--threads", threads, "worker cap (default: logical cores)");
    sub->add_flag("--validate-only", validate_only, "validate the config and exit");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  ulab::parallel::set_max_threads(threads);

  ulab::config::ExperimentConfig cfg;
  try {
    cfg = ulab::config::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  cfg.subcommand = subcommand;
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  if (validate_only) {
    const auto v = ulab::runner::validate(cfg);
    for (const auto& note : v.notes) std::printf("note: %s\n", note.c_str());
    if (!v.ok()) {
      for (const auto& err : v.errors) std::fprintf(stderr, "invalid: %s\n", err.c_str());
      return 2;
    }
    std::printf("ok\n");
    return 0;
  }

  const auto result = ulab::runner::run(cfg);
  for (const auto& note : result.notes) std::printf("note: %s\n", note.c_str());
  for (const auto& err : result.errors) std::fprintf(stderr, "error: %s\n", err.c_str());
  for (const auto& out : result.outputs) std::printf("wrote %s\n", out.c_str());
  if (!result.manifest_path.empty()) std::printf("wrote %s\n", result.manifest_path.c_str());
  return result.exit_code;
}
