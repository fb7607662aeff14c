#pragma once

// JSON configuration mirroring PipelineConfig. Missing keys keep their current value,
// so a file can be layered over defaults and then overridden by command-line flags.
//
// {
//   "gate":     {"tau_conf": 0.9, "min_area": 1, "max_area": 1e300, "min_aspect": 0,
//                "max_aspect": 1e300, "connectivity": 8, "geometry_from_gt": true},
//   "sauvola":  {"window": 31, "k": 0.2, "r_dynamic": 128, "polarity": "auto"},
//   "se":       {"side": 3, "shape": "square"},
//   "workers":  1,
//   "provider": {"kind": "oracle", "dir": "exported/",
//                "oracle": {"perturbations": ["none"], "score_mode": "true_iou",
//                           "fixed_score": 0.95, "fail_probability": 0.0, "seed": 7}}
// }

#include <initializer_list>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "segsem/backend.hpp"
#include "segsem/pipeline.hpp"

namespace segsem {

struct ProviderSpec {
  std::string kind = "null";  // null | oracle | dir
  std::string dir;
  OracleConfig oracle;
};

struct RunConfig {
  PipelineConfig pipeline;
  ProviderSpec provider;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw InvalidArgument("unknown config key '" + where + "." + k + "'");
  }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

inline void apply_oracle_json(const nlohmann::json& j, OracleConfig& o) {
  detail::reject_unknown(j, {"perturbations", "score_mode", "fixed_score", "fail_probability", "seed"},
                         "provider.oracle");
  if (j.contains("perturbations")) {
    o.perturbations.clear();
    for (const auto& p : j.at("perturbations")) o.perturbations.push_back(Perturbation::parse(p.get<std::string>()));
  }
  if (j.contains("score_mode")) {
    const auto m = j.at("score_mode").get<std::string>();
    if (m == "true_iou") o.score_mode = OracleConfig::ScoreMode::true_iou;
    else if (m == "fixed") o.score_mode = OracleConfig::ScoreMode::fixed;
    else throw InvalidArgument("unknown oracle score_mode '" + m + "'");
  }
  detail::maybe(j, "fixed_score", o.fixed_score);
  detail::maybe(j, "fail_probability", o.fail_probability);
  detail::maybe(j, "seed", o.seed);
}

inline void apply_config_json(const nlohmann::json& j, RunConfig& cfg) {
  try {
    detail::reject_unknown(j, {"gate", "sauvola", "se", "workers", "provider"}, "config");
    PipelineConfig& p = cfg.pipeline;
    if (j.contains("gate")) {
      const auto& g = j.at("gate");
      detail::reject_unknown(g, {"tau_conf", "min_area", "max_area", "min_aspect", "max_aspect",
                                 "connectivity", "geometry_from_gt"}, "gate");
      detail::maybe(g, "tau_conf", p.gate.tau_conf);
      detail::maybe(g, "min_area", p.gate.min_area);
      detail::maybe(g, "max_area", p.gate.max_area);
      detail::maybe(g, "min_aspect", p.gate.min_aspect);
      detail::maybe(g, "max_aspect", p.gate.max_aspect);
      if (g.contains("connectivity")) p.gate.connectivity = connectivity_from_int(g.at("connectivity").get<int>());
      detail::maybe(g, "geometry_from_gt", p.gate_geometry_from_gt);
    }
    if (j.contains("sauvola")) {
      const auto& s = j.at("sauvola");
      detail::reject_unknown(s, {"window", "k", "r_dynamic", "polarity"}, "sauvola");
      detail::maybe(s, "window", p.sauvola.window);
      detail::maybe(s, "k", p.sauvola.k);
      detail::maybe(s, "r_dynamic", p.sauvola.r_dynamic);
      if (s.contains("polarity")) p.sauvola.polarity = polarity_from_string(s.at("polarity").get<std::string>());
    }
    if (j.contains("se")) {
      const auto& s = j.at("se");
      detail::reject_unknown(s, {"side", "shape"}, "se");
      detail::maybe(s, "side", p.se.side);
      if (s.contains("shape")) p.se.shape = element_shape_from_string(s.at("shape").get<std::string>());
    }
    detail::maybe(j, "workers", p.workers);
    if (j.contains("provider")) {
      const auto& pr = j.at("provider");
      detail::reject_unknown(pr, {"kind", "dir", "oracle"}, "provider");
      detail::maybe(pr, "kind", cfg.provider.kind);
      detail::maybe(pr, "dir", cfg.provider.dir);
      if (pr.contains("oracle")) apply_oracle_json(pr.at("oracle"), cfg.provider.oracle);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

inline void load_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  const nlohmann::json j = read_json_file(path);
  try {
    apply_config_json(j, cfg);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

/// Builds the provider named by `spec`. The oracle needs the corpus for ground truth.
inline std::unique_ptr<CandidateProvider> make_provider(const ProviderSpec& spec, const Corpus& corpus) {
  if (spec.kind == "null") return std::make_unique<NullProvider>();
  if (spec.kind == "oracle") return std::make_unique<OracleProvider>(spec.oracle, corpus);
  if (spec.kind == "dir") {
    if (spec.dir.empty()) throw InvalidArgument("dir provider needs a directory");
    if (!std::filesystem::is_directory(spec.dir)) throw IoError(spec.dir, "candidate directory not found");
    return std::make_unique<DirectoryProvider>(spec.dir);
  }
  throw InvalidArgument("unknown provider '" + spec.kind + "'");
}

}  // namespace segsem
