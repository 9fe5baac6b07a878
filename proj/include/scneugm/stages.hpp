#pragma once

#include <string>
#include <vector>

#include "scneugm/config.hpp"

namespace scneugm {

inline const std::vector<std::string> kStageNames = {
    "gen-net",    "pretrain-embed", "pretrain-pred", "train-dhf",
    "dhf-grid",   "train-es",       "train-pg",      "eval-static",
    "eval-mobile", "report"};

// Runs one stage end to end, writing its CSV/JSON artifacts and checkpoints
// into output_dir. A completed stage (same config hash) is a no-op unless
// force is set. Throws UserError for missing prerequisites or bad input.
// Returns a one-line summary for the console.
std::string run_stage(const std::string& name, const ExperimentConfig& cfg,
                      bool force = false);

// Loads the trained model stack from this config's checkpoints.
NgmModels load_models(const ExperimentConfig& cfg, bool need_egnn = true);

// Aggregates evaluation artifacts into the summary document (report stage).
nlohmann::json build_report(const ExperimentConfig& cfg);

}  // namespace scneugm
