#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "scneugm/dhf.hpp"
#include "scneugm/es.hpp"
#include "scneugm/online.hpp"

namespace scneugm {

// Exit code 1: bad input (config, missing prerequisite). Exit code 2 is any
// other exception.
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  std::vector<int> psis = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  std::vector<int> upsilons = {1, 5, 10, 20, 30};
  int seeds = 20;
};

struct EvalConfig {
  int topologies = 5;
  int periods = 200;
};

struct ExperimentConfig {
  uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  RadioConfig radio;
  TrainConfig embed;
  PredictorTrainConfig pred;
  DhfTrainConfig dhf;
  EsConfig es;
  PgConfig pg;
  OnlineConfig online;
  GridConfig grid;
  EvalConfig eval;

  std::string config_hash;  // over the effective config document

  // Loads the JSON file, applies dotted-path --set overrides, validates.
  static ExperimentConfig load(const std::filesystem::path& path,
                               const std::vector<std::string>& overrides,
                               const std::string& output_dir_flag = "");
  static ExperimentConfig from_json(nlohmann::json doc,
                                    const std::string& output_dir_flag = "");
  nlohmann::json to_json() const;
};

}  // namespace scneugm
