#include "spinbus/model.hpp"

#include <cmath>

#include <json.hpp>

namespace spinbus {

void validate(const ChainSpec& spec) {
  if (spec.n < 2) throw ConfigError("chain length must satisfy n >= 2");
  if (!std::isfinite(spec.j) || !std::isfinite(spec.h))
    throw ConfigError("couplings must be finite");
  if (spec.model == ModelKind::xy && !std::isfinite(spec.gamma))
    throw ConfigError("gamma must be finite");
  if (spec.model == ModelKind::xxz && !std::isfinite(spec.delta))
    throw ConfigError("delta must be finite");
}

Couplings derived_couplings(const ChainSpec& spec) {
  validate(spec);
  if (spec.model == ModelKind::xy) {
    return {spec.j * (1.0 + spec.gamma) / 2.0, spec.j * (1.0 - spec.gamma) / 2.0, 0.0};
  }
  return {spec.j / 2.0, spec.j / 2.0, spec.j * spec.delta / 2.0};
}

int total_sites(const ChainSpec& spec, bool with_probe) {
  return spec.n + (with_probe ? 1 : 0);
}

void validate(const BlochVector& v) {
  if (v.norm2() > 1.0 + 1e-9)
    throw EngineError("Bloch vector leaves the unit ball: |n|^2 = " +
                      std::to_string(v.norm2()));
}

std::string to_string(ModelKind m) { return m == ModelKind::xy ? "xy" : "xxz"; }

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::ferro_down: return "ferro_down";
    case InitKind::ferro_up: return "ferro_up";
    case InitKind::neel: return "neel";
    case InitKind::singlet_series: return "singlets";
    case InitKind::ground_state: return "ground";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "xy") return ModelKind::xy;
  if (s == "xxz") return ModelKind::xxz;
  throw ConfigError("unknown model kind '" + s + "' (expected \"xy\" or \"xxz\")");
}

InitKind init_kind_from_string(const std::string& s) {
  if (s == "ferro_down") return InitKind::ferro_down;
  if (s == "ferro_up") return InitKind::ferro_up;
  if (s == "neel") return InitKind::neel;
  if (s == "singlets") return InitKind::singlet_series;
  if (s == "ground") return InitKind::ground_state;
  throw ConfigError("unknown init kind '" + s + "'");
}

ModelConfig parse_model_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("bad model config json: ") + e.what());
  }
  ModelConfig cfg;
  try {
    cfg.spec.model = model_kind_from_string(j.at("model").get<std::string>());
    cfg.spec.n = j.at("n").get<int>();
    if (j.contains("j")) cfg.spec.j = j["j"].get<double>();
    if (j.contains("gamma")) cfg.spec.gamma = j["gamma"].get<double>();
    if (j.contains("delta")) cfg.spec.delta = j["delta"].get<double>();
    if (j.contains("h")) cfg.spec.h = j["h"].get<double>();
    if (j.contains("init")) cfg.init = init_kind_from_string(j["init"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model config: ") + e.what());
  }
  validate(cfg.spec);
  if (cfg.init == InitKind::singlet_series && cfg.spec.n % 2 != 0)
    throw ConfigError("singlet series initialization requires even n");
  return cfg;
}

std::string model_config_to_json(const ModelConfig& cfg) {
  nlohmann::json j;
  j["model"] = to_string(cfg.spec.model);
  j["n"] = cfg.spec.n;
  j["j"] = cfg.spec.j;
  if (cfg.spec.model == ModelKind::xy) j["gamma"] = cfg.spec.gamma;
  if (cfg.spec.model == ModelKind::xxz) j["delta"] = cfg.spec.delta;
  j["h"] = cfg.spec.h;
  j["init"] = to_string(cfg.init);
  return j.dump();
}

}  // namespace spinbus
