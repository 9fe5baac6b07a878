// Experiment pipeline driver: config in, CSV/JSON artifacts and checkpoints
// out. One subcommand per stage; see README for the stage order.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scneugm/stages.hpp"
#include "scneugm/util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ScNeuGM: neural graph modeling for RTWT slot assignment"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir_flag;
  std::vector<std::string> overrides;
  bool force = false;
  int threads = 0;

  std::vector<CLI::App*> stage_cmds;
  for (const auto& stage : scneugm::kStageNames) {
    CLI::App* cmd = app.add_subcommand(stage, "run the " + stage + " stage");
    cmd->add_option("-c,--config", config_path, "experiment config JSON")
        ->required();
    cmd->add_option("--set", overrides,
                    "override a config field, e.g. --set train.es.max_steps=500");
    cmd->add_option("--output-dir", output_dir_flag,
                    "override output_dir (also: SCNEUGM_OUTPUT_DIR)");
    cmd->add_flag("--force", force, "rerun even if the stage is complete");
    cmd->add_option("--threads", threads, "worker thread cap (0 = all cores)");
    stage_cmds.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    scneugm::set_thread_cap(threads);
    const scneugm::ExperimentConfig cfg = scneugm::ExperimentConfig::load(
        config_path, overrides, output_dir_flag);
    const std::string stage = app.get_subcommands().front()->get_name();
    const std::string summary = scneugm::run_stage(stage, cfg, force);
    std::printf("%s\n", summary.c_str());
    return 0;
  } catch (const scneugm::UserError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
