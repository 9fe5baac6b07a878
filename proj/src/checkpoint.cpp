#include "scneugm/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "scneugm/util.hpp"

namespace scneugm {

nlohmann::json dense_spec_json(const DenseSpec& spec) {
  return nlohmann::json{{"type", "dense"},
                        {"dims", spec.dims},
                        {"hidden", activation_name(spec.hidden)},
                        {"output", activation_name(spec.output)}};
}

nlohmann::json lstm_spec_json(const LstmSpec& spec) {
  return nlohmann::json{{"type", "lstm"},
                        {"input", spec.input_dim},
                        {"hidden", spec.hidden_dim},
                        {"layers", spec.layers}};
}

DenseSpec dense_spec_from_json(const nlohmann::json& j) {
  DenseSpec s;
  s.dims = j.at("dims").get<std::vector<int>>();
  s.hidden = activation_from_name(j.at("hidden").get<std::string>());
  s.output = activation_from_name(j.at("output").get<std::string>());
  return s;
}

LstmSpec lstm_spec_from_json(const nlohmann::json& j) {
  LstmSpec s;
  s.input_dim = j.at("input").get<int>();
  s.hidden_dim = j.at("hidden").get<int>();
  s.layers = j.at("layers").get<int>();
  return s;
}

void save_checkpoint(const std::filesystem::path& path,
                     const CheckpointMap& nets, const std::string& config_hash,
                     uint64_t seed) {
  nlohmann::json doc;
  doc["format"] = "scneugm-ckpt-v1";
  doc["config_hash"] = config_hash;
  doc["seed"] = seed;
  nlohmann::json networks = nlohmann::json::object();
  for (const auto& [name, net] : nets) {
    networks[name] = {{"spec", net.spec},
                      {"float64_b64", encode_doubles_b64(net.data)}};
  }
  doc["networks"] = networks;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << doc.dump(1) << "\n";
}

CheckpointMap load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing checkpoint " + path.string());
  nlohmann::json doc;
  in >> doc;
  if (doc.value("format", "") != "scneugm-ckpt-v1")
    throw std::runtime_error("unrecognized checkpoint format in " +
                             path.string());
  CheckpointMap nets;
  for (const auto& [name, entry] : doc.at("networks").items()) {
    CheckpointNet net;
    net.spec = entry.at("spec");
    net.data = decode_doubles_b64(entry.at("float64_b64").get<std::string>());
    nets.emplace(name, std::move(net));
  }
  return nets;
}

std::vector<double> extract_prefixed(const ParamVector& params,
                                     const std::string& prefix) {
  std::vector<double> out;
  for (const auto& seg : params.layout->segments) {
    if (seg.name.rfind(prefix, 0) != 0) continue;
    const double* base = params.values.data() + seg.offset;
    out.insert(out.end(), base, base + seg.size());
  }
  return out;
}

void inject_prefixed(ParamVector& params, const std::string& prefix,
                     const std::vector<double>& data) {
  size_t cursor = 0;
  for (const auto& seg : params.layout->segments) {
    if (seg.name.rfind(prefix, 0) != 0) continue;
    if (cursor + size_t(seg.size()) > data.size())
      throw std::runtime_error("checkpoint payload too small for " + prefix);
    std::copy(data.begin() + cursor, data.begin() + cursor + seg.size(),
              params.values.begin() + seg.offset);
    cursor += size_t(seg.size());
  }
  if (cursor != data.size())
    throw std::runtime_error("checkpoint payload size mismatch for " + prefix);
}

}  // namespace scneugm
