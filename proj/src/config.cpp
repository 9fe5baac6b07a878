#include "scneugm/config.hpp"

#include <cstdlib>
#include <fstream>

#include "scneugm/util.hpp"

namespace scneugm {

namespace {

// "a.b.c=value" -> doc["a"]["b"]["c"] = parsed value
void apply_override(nlohmann::json& doc, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw UserError("--set expects key.path=value, got: " + kv);
  const std::string path = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;  // plain string
  }
  nlohmann::json* node = &doc;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw UserError("--set has an empty path segment: " + kv);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

template <typename T>
void get_to(const nlohmann::json& j, const char* key, T& field,
            const std::string& where) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UserError("config field " + where + "." + key + ": " + e.what());
  }
}

EsConfig::Schedule schedule_from_name(const std::string& name) {
  if (name == "adaptive") return EsConfig::Schedule::Adaptive;
  if (name == "linear") return EsConfig::Schedule::Linear;
  if (name == "none") return EsConfig::Schedule::None;
  throw UserError("config field train.es.schedule must be adaptive|linear|none");
}

std::string schedule_name(EsConfig::Schedule s) {
  switch (s) {
    case EsConfig::Schedule::Adaptive: return "adaptive";
    case EsConfig::Schedule::Linear: return "linear";
    case EsConfig::Schedule::None: return "none";
  }
  return "adaptive";
}

PairMode pair_mode_from_name(const std::string& name) {
  if (name == "bucketed") return PairMode::Bucketed;
  if (name == "all-pairs") return PairMode::AllPairs;
  throw UserError("config field online.mode must be bucketed|all-pairs");
}

std::string pair_mode_name(PairMode m) {
  return m == PairMode::Bucketed ? "bucketed" : "all-pairs";
}

TimeModel time_model_from_name(const std::string& name) {
  if (name == "measured") return TimeModel::Measured;
  if (name == "pair-proxy") return TimeModel::PairProxy;
  if (name == "fixed") return TimeModel::Fixed;
  throw UserError("config field online.time_model must be measured|pair-proxy|fixed");
}

std::string time_model_name(TimeModel m) {
  switch (m) {
    case TimeModel::Measured: return "measured";
    case TimeModel::PairProxy: return "pair-proxy";
    case TimeModel::Fixed: return "fixed";
  }
  return "measured";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(nlohmann::json doc,
                                             const std::string& output_dir_flag) {
  ExperimentConfig cfg;
  if (!doc.contains("seed"))
    throw UserError("config is missing the mandatory field: seed");
  get_to(doc, "seed", cfg.seed, "");

  std::string out_dir = doc.value("output_dir", std::string());
  if (!output_dir_flag.empty()) out_dir = output_dir_flag;
  if (out_dir.empty()) {
    const char* env = std::getenv("SCNEUGM_OUTPUT_DIR");
    if (env) out_dir = env;
  }
  if (out_dir.empty())
    throw UserError(
        "output_dir not set (config field, --output-dir, or SCNEUGM_OUTPUT_DIR)");
  cfg.output_dir = out_dir;

  if (doc.contains("radio")) {
    try {
      cfg.radio = RadioConfig::from_json(doc.at("radio"));
    } catch (const std::invalid_argument& e) {
      throw UserError(std::string("config field radio: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw UserError(std::string("config field radio: ") + e.what());
    }
  }

  const nlohmann::json train = doc.value("train", nlohmann::json::object());
  if (train.contains("embed")) {
    const auto& j = train.at("embed");
    get_to(j, "steps", cfg.embed.steps, "train.embed");
    get_to(j, "lr", cfg.embed.lr, "train.embed");
    get_to(j, "num_stas", cfg.embed.num_stas, "train.embed");
  }
  if (train.contains("predictors")) {
    const auto& j = train.at("predictors");
    get_to(j, "steps", cfg.pred.steps, "train.predictors");
    get_to(j, "lr", cfg.pred.lr, "train.predictors");
    get_to(j, "num_stas", cfg.pred.num_stas, "train.predictors");
    get_to(j, "balance", cfg.pred.balance, "train.predictors");
  }
  if (train.contains("dhf")) {
    const auto& j = train.at("dhf");
    get_to(j, "steps", cfg.dhf.steps, "train.dhf");
    get_to(j, "lr", cfg.dhf.lr, "train.dhf");
    get_to(j, "lambda", cfg.dhf.lambda, "train.dhf");
    get_to(j, "num_stas", cfg.dhf.num_stas, "train.dhf");
  }
  if (train.contains("es")) {
    const auto& j = train.at("es");
    get_to(j, "lr", cfg.es.lr, "train.es");
    get_to(j, "sigma0_sq", cfg.es.sigma0_sq, "train.es");
    get_to(j, "k_start", cfg.es.k_start, "train.es");
    get_to(j, "k_increment", cfg.es.k_increment, "train.es");
    get_to(j, "k_total", cfg.es.k_total, "train.es");
    get_to(j, "omega_hat", cfg.es.omega_hat, "train.es");
    get_to(j, "psi", cfg.es.psi, "train.es");
    get_to(j, "periods", cfg.es.periods, "train.es");
    get_to(j, "max_steps", cfg.es.max_steps, "train.es");
    get_to(j, "gamma", cfg.es.gamma, "train.es");
    get_to(j, "baseline_ema", cfg.es.baseline_ema, "train.es");
    if (j.contains("schedule"))
      cfg.es.schedule = schedule_from_name(j.at("schedule").get<std::string>());
  }
  if (train.contains("pg")) {
    const auto& j = train.at("pg");
    get_to(j, "lr", cfg.pg.lr, "train.pg");
    get_to(j, "k_batch", cfg.pg.k_batch, "train.pg");
    get_to(j, "k_total", cfg.pg.k_total, "train.pg");
    get_to(j, "psi", cfg.pg.psi, "train.pg");
    get_to(j, "periods", cfg.pg.periods, "train.pg");
    get_to(j, "max_steps", cfg.pg.max_steps, "train.pg");
    get_to(j, "gamma", cfg.pg.gamma, "train.pg");
    get_to(j, "baseline_ema", cfg.pg.baseline_ema, "train.pg");
  }

  if (doc.contains("online")) {
    const auto& j = doc.at("online");
    auto& o = cfg.online;
    get_to(j, "rounds", o.rounds, "online");
    get_to(j, "history_window", o.history_window, "online");
    get_to(j, "psi", o.psi, "online");
    get_to(j, "upsilon", o.upsilon, "online");
    get_to(j, "augment", o.augment, "online");
    get_to(j, "mobility", o.mobility, "online");
    get_to(j, "speed_min", o.speed_min, "online");
    get_to(j, "speed_max", o.speed_max, "online");
    get_to(j, "periods_per_round", o.periods_per_round, "online");
    if (j.contains("mode"))
      o.mode = pair_mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("time_model"))
      o.time_model = time_model_from_name(j.at("time_model").get<std::string>());
    get_to(j, "fixed_dt_ms", o.fixed_dt_ms, "online");
    get_to(j, "proxy_pair_us", o.proxy_pair_us, "online");
    get_to(j, "proxy_sta_us", o.proxy_sta_us, "online");
    get_to(j, "proxy_base_ms", o.proxy_base_ms, "online");
  }

  if (doc.contains("grid")) {
    const auto& j = doc.at("grid");
    get_to(j, "psis", cfg.grid.psis, "grid");
    get_to(j, "upsilons", cfg.grid.upsilons, "grid");
    get_to(j, "seeds", cfg.grid.seeds, "grid");
  }
  if (doc.contains("eval")) {
    const auto& j = doc.at("eval");
    get_to(j, "topologies", cfg.eval.topologies, "eval");
    get_to(j, "periods", cfg.eval.periods, "eval");
  }

  // hash the effective document so artifacts can spot stale configs
  nlohmann::json effective = cfg.to_json();
  effective.erase("output_dir");  // relocating outputs is not a config change
  cfg.config_hash = hex64(fnv1a(effective.dump()));
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides,
                                        const std::string& output_dir_flag) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UserError("config file " + path.string() + " is not valid JSON: " +
                    e.what());
  }
  for (const auto& kv : overrides) apply_override(doc, kv);
  return from_json(std::move(doc), output_dir_flag);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["output_dir"] = output_dir.string();
  doc["radio"] = radio.to_json();
  doc["train"]["embed"] = {{"steps", embed.steps},
                           {"lr", embed.lr},
                           {"num_stas", embed.num_stas}};
  doc["train"]["predictors"] = {{"steps", pred.steps},
                                {"lr", pred.lr},
                                {"num_stas", pred.num_stas},
                                {"balance", pred.balance}};
  doc["train"]["dhf"] = {{"steps", dhf.steps},
                         {"lr", dhf.lr},
                         {"lambda", dhf.lambda},
                         {"num_stas", dhf.num_stas}};
  doc["train"]["es"] = {{"lr", es.lr},
                        {"sigma0_sq", es.sigma0_sq},
                        {"k_start", es.k_start},
                        {"k_increment", es.k_increment},
                        {"k_total", es.k_total},
                        {"omega_hat", es.omega_hat},
                        {"psi", es.psi},
                        {"periods", es.periods},
                        {"max_steps", es.max_steps},
                        {"gamma", es.gamma},
                        {"baseline_ema", es.baseline_ema},
                        {"schedule", schedule_name(es.schedule)}};
  doc["train"]["pg"] = {{"lr", pg.lr},
                        {"k_batch", pg.k_batch},
                        {"k_total", pg.k_total},
                        {"psi", pg.psi},
                        {"periods", pg.periods},
                        {"max_steps", pg.max_steps},
                        {"gamma", pg.gamma},
                        {"baseline_ema", pg.baseline_ema}};
  const auto& o = online;
  doc["online"] = {{"rounds", o.rounds},
                   {"history_window", o.history_window},
                   {"psi", o.psi},
                   {"upsilon", o.upsilon},
                   {"mode", pair_mode_name(o.mode)},
                   {"augment", o.augment},
                   {"mobility", o.mobility},
                   {"speed_min", o.speed_min},
                   {"speed_max", o.speed_max},
                   {"periods_per_round", o.periods_per_round},
                   {"time_model", time_model_name(o.time_model)},
                   {"fixed_dt_ms", o.fixed_dt_ms},
                   {"proxy_pair_us", o.proxy_pair_us},
                   {"proxy_sta_us", o.proxy_sta_us},
                   {"proxy_base_ms", o.proxy_base_ms}};
  doc["grid"] = {{"psis", grid.psis},
                 {"upsilons", grid.upsilons},
                 {"seeds", grid.seeds}};
  doc["eval"] = {{"topologies", eval.topologies}, {"periods", eval.periods}};
  return doc;
}

}  // namespace scneugm
