#include "pipeline_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "gpkmd/error.hpp"

namespace gpkmd::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

fs::path resolve(const json& j, const fs::path& base) {
  fs::path p = j.get<std::string>();
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::vector<double> positive_list(const json& j, const char* key) {
  auto v = j.at(key).get<std::vector<double>>();
  if (v.empty()) throw ConfigError(std::string("hyperparameter list '") + key + "' is empty");
  return v;
}

}  // namespace

PipelineConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"grid", "series", "disturbance", "sampling", "embedding_order", "hyperparameters",
                  "noise_sigma", "seed", "trials", "track_modes", "reference_task",
                  "reselect_per_trial", "plots", "workers", "out"},
                 "config");
  PipelineConfig cfg;
  try {
    if (j.contains("grid") && !j["grid"].is_null()) cfg.grid = resolve(j["grid"], base_dir);
    if (j.contains("series") && !j["series"].is_null()) cfg.series = resolve(j["series"], base_dir);
    if (j.contains("disturbance") && !j["disturbance"].is_null()) {
      const auto& d = j["disturbance"];
      reject_unknown(d, {"generator", "delta", "omega"}, "disturbance");
      cfg.disturbance = Disturbance{d.at("generator").get<int>(), d.value("delta", 0.0), d.value("omega", 0.0)};
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      reject_unknown(s, {"rate_hz", "window_s"}, "sampling");
      cfg.rate_hz = s.value("rate_hz", cfg.rate_hz);
      cfg.window_s = s.value("window_s", cfg.window_s);
    }
    cfg.embedding_order = j.value("embedding_order", cfg.embedding_order);
    if (j.contains("hyperparameters")) {
      const auto& h = j["hyperparameters"];
      reject_unknown(h, {"fixed", "grid", "objective"}, "hyperparameters");
      if (h.contains("fixed") && !h["fixed"].is_null()) {
        const auto& f = h["fixed"];
        reject_unknown(f, {"signal_variance", "length_scale", "noise_variance"}, "hyperparameters.fixed");
        cfg.hyper.fixed = HyperCandidate{{f.at("signal_variance").get<double>(), f.at("length_scale").get<double>()},
                                         f.at("noise_variance").get<double>()};
      }
      if (h.contains("grid")) {
        const auto& g = h["grid"];
        reject_unknown(g, {"signal_variance", "length_scale", "noise_variance"}, "hyperparameters.grid");
        if (g.contains("signal_variance")) cfg.hyper.grid.signal_variances = positive_list(g, "signal_variance");
        if (g.contains("length_scale")) cfg.hyper.grid.length_scales = positive_list(g, "length_scale");
        if (g.contains("noise_variance")) cfg.hyper.grid.noise_variances = positive_list(g, "noise_variance");
      }
      if (h.contains("objective")) cfg.hyper.objective = parse_loo_objective(h["objective"].get<std::string>());
    }
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.track_modes = j.value("track_modes", cfg.track_modes);
    if (j.contains("reference_task") && !j["reference_task"].is_null()) {
      cfg.reference_task = j["reference_task"].get<std::string>();
    }
    cfg.reselect_per_trial = j.value("reselect_per_trial", cfg.reselect_per_trial);
    cfg.plots = j.value("plots", cfg.plots);
    cfg.workers = j.value("workers", cfg.workers);
    if (j.contains("out")) cfg.out = resolve(j["out"], base_dir);
    else cfg.out = (base_dir / cfg.out).lexically_normal();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type or is missing: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

void validate(const PipelineConfig& cfg) {
  if (cfg.grid && !fs::is_regular_file(*cfg.grid)) {
    throw ConfigError("grid file not found: " + cfg.grid->string());
  }
  if (cfg.series && !fs::is_regular_file(*cfg.series)) {
    throw ConfigError("series file not found: " + cfg.series->string());
  }
  if (!(cfg.rate_hz > 0.0) || !std::isfinite(cfg.rate_hz)) throw ConfigError("sampling rate must be > 0");
  if (!(cfg.window_s > 0.0) || !std::isfinite(cfg.window_s)) throw ConfigError("window must be > 0");
  if (cfg.embedding_order < 1) throw ConfigError("embedding order p must be >= 1");
  if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) {
    throw ConfigError("noise sigma must be >= 0");
  }
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.track_modes < 1) throw ConfigError("track_modes must be >= 1");
  try {
    if (cfg.hyper.fixed) {
      cfg.hyper.fixed->kernel.validate();
      if (!(cfg.hyper.fixed->noise_variance >= 0.0)) throw ConfigError("noise variance must be >= 0");
    }
    for (const auto& c : cfg.hyper.grid.candidates()) {
      c.kernel.validate();
      if (!(c.noise_variance >= 0.0)) throw ConfigError("noise variance must be >= 0");
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid hyperparameters: ") + e.what());
  }
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  json j;
  j["grid"] = cfg.grid ? json(cfg.grid->string()) : json(nullptr);
  j["series"] = cfg.series ? json(cfg.series->string()) : json(nullptr);
  if (cfg.disturbance) {
    j["disturbance"] = {{"generator", cfg.disturbance->generator},
                        {"delta", cfg.disturbance->delta},
                        {"omega", cfg.disturbance->omega}};
  } else {
    j["disturbance"] = nullptr;
  }
  j["sampling"] = {{"rate_hz", cfg.rate_hz}, {"window_s", cfg.window_s}};
  j["embedding_order"] = cfg.embedding_order;
  json h;
  if (cfg.hyper.fixed) {
    h["fixed"] = {{"signal_variance", cfg.hyper.fixed->kernel.signal_variance},
                  {"length_scale", cfg.hyper.fixed->kernel.length_scale},
                  {"noise_variance", cfg.hyper.fixed->noise_variance}};
  } else {
    h["fixed"] = nullptr;
  }
  h["grid"] = {{"signal_variance", cfg.hyper.grid.signal_variances},
               {"length_scale", cfg.hyper.grid.length_scales},
               {"noise_variance", cfg.hyper.grid.noise_variances}};
  h["objective"] = std::string(to_string(cfg.hyper.objective));
  j["hyperparameters"] = h;
  j["noise_sigma"] = cfg.noise_sigma;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["track_modes"] = cfg.track_modes;
  j["reference_task"] = cfg.reference_task ? json(*cfg.reference_task) : json(nullptr);
  j["reselect_per_trial"] = cfg.reselect_per_trial;
  j["plots"] = cfg.plots;
  j["workers"] = cfg.workers;
  j["out"] = cfg.out.string();
  return j;
}

}  // namespace gpkmd::cli
