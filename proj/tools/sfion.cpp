// Command-line front end: sfion <tdse run | ctmc run | analyze | preset NAME>.

#include <omp.h>

#include <CLI11.hpp>
#include <iostream>

#include "sfion/config.hpp"
#include "sfion/error.hpp"
#include "sfion/pipeline.hpp"

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  int threads = 0;
  bool quiet = false;
};

sfion::RunConfig load(const Common& common, sfion::RunConfig config) {
  if (!common.config_file.empty()) config = sfion::load_config(common.config_file);
  for (const auto& o : common.overrides) sfion::apply_override(config, o);
  config.validate();
  return config;
}

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("-c,--config", common.config_file, "Run configuration file");
  cmd->add_option("-s,--set", common.overrides,
                  "Override a config key, e.g. --set pulse.F0=0.05 (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong-field ionization of hydrogen: TDSE, continuum analysis, CTMC-T"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "OpenMP threads (default: all)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("-q,--quiet", common.quiet, "No progress output");
  app.set_version_flag("--version", sfion::pipeline::kVersion);

  auto* tdse = app.add_subcommand("tdse", "Quantum propagation");
  auto* tdse_run = tdse->add_subcommand("run", "Propagate through the pulse and save the final state");
  tdse->require_subcommand(1);
  add_common(tdse_run, common);

  auto* ctmc = app.add_subcommand("ctmc", "Classical trajectories with tunneling");
  auto* ctmc_run = ctmc->add_subcommand("run", "Sample, integrate and histogram an ensemble");
  ctmc->require_subcommand(1);
  add_common(ctmc_run, common);

  auto* analyze = app.add_subcommand("analyze", "Analyze a saved final state");
  std::string checkpoint;
  analyze->add_option("checkpoint", checkpoint, "Final-state file from 'tdse run'")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(analyze, common);

  auto* preset = app.add_subcommand("preset", "Regenerate the data behind one figure");
  std::string preset_name;
  preset->add_option("name", preset_name, "fig1a|fig1b|fig1c|fig2a|fig2b|fig3a|fig3b|fig4a")
      ->required();
  add_common(preset, common);

  auto* show = app.add_subcommand("config", "Print the effective configuration");
  add_common(show, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (common.threads > 0) omp_set_num_threads(common.threads);
  std::ostream* log = common.quiet ? nullptr : &std::cerr;

  try {
    if (tdse_run->parsed()) {
      auto config = load(common, {});
      std::cout << sfion::pipeline::run_tdse_outputs(config, log).dump(2) << "\n";
    } else if (ctmc_run->parsed()) {
      auto config = load(common, {});
      sfion::pipeline::Products products;
      products.tdse = false;
      products.ctmc = true;
      std::cout << sfion::pipeline::run(config, products, "", log).at("ctmc").dump(2) << "\n";
    } else if (analyze->parsed()) {
      auto config = load(common, {});
      const auto manifest = sfion::pipeline::analyze_checkpoint(config, checkpoint, log);
      std::cout << manifest.at("analysis").dump(2) << "\n";
    } else if (preset->parsed()) {
      const auto p = sfion::pipeline::preset(preset_name);
      auto config = p.config;
      for (const auto& o : common.overrides) sfion::apply_override(config, o);
      if (!common.config_file.empty()) {
        throw sfion::config_error("preset takes --set overrides, not --config");
      }
      config.validate();
      const auto manifest = sfion::pipeline::run(config, p.products, p.name + "_", log);
      if (log) *log << "wrote " << config.outputs.directory << "/" << p.name << "_manifest.json\n";
      std::cout << manifest.dump(2) << "\n";
    } else if (show->parsed()) {
      std::cout << sfion::serialize(load(common, {}));
    }
  } catch (const sfion::Error& e) {
    std::cerr << "error: " << sfion::category_name(e.category()) << ": " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
