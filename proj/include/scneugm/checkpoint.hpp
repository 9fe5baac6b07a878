#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "scneugm/nn.hpp"

namespace scneugm {

// One named network inside a checkpoint: a spec descriptor plus the raw
// float64 parameter payload (little-endian, base64 in the JSON file).
struct CheckpointNet {
  nlohmann::json spec;
  std::vector<double> data;
};

using CheckpointMap = std::map<std::string, CheckpointNet>;

nlohmann::json dense_spec_json(const DenseSpec& spec);
nlohmann::json lstm_spec_json(const LstmSpec& spec);
DenseSpec dense_spec_from_json(const nlohmann::json& j);
LstmSpec lstm_spec_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path,
                     const CheckpointMap& nets, const std::string& config_hash,
                     uint64_t seed);

CheckpointMap load_checkpoint(const std::filesystem::path& path);

// Segment-by-segment copy helpers between composite ParamVectors and the
// per-network payloads (layout order defines the payload order).
std::vector<double> extract_prefixed(const ParamVector& params,
                                     const std::string& prefix);
void inject_prefixed(ParamVector& params, const std::string& prefix,
                     const std::vector<double>& data);

}  // namespace scneugm
