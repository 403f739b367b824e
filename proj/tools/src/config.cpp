// Copyright 2026 The SkimNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "skimnet/cli/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "skimnet/error.hpp"

namespace skimnet::cli {

using nlohmann::json;

std::string_view sweep_axis_name(SweepAxis axis) {
  return axis == SweepAxis::kTStop ? "t_stop" : "subsample_factor";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "t_stop") return SweepAxis::kTStop;
  if (name == "subsample_factor") return SweepAxis::kSubsampleFactor;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (valid: subsample_factor, t_stop)");
}

namespace {

const char* const kSections[] = {"dataset", "model", "distill", "skim", "eval"};

json object_at(const json& root, const char* key) {
  const json& v = root.at(key);
  if (!v.is_object()) throw ConfigError(std::string(key) + ": section must be an object");
  if (std::string(key) != "model" && std::string(key) != "eval" && v.contains("seed")) {
    throw ConfigError(std::string(key) + ": 'seed' is set at the top level only");
  }
  return v;
}

template <typename T>
T get(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": wrong value type: " + e.what());
  }
}

skim::InferenceBudget parse_budget(const json& j) {
  if (!j.is_object()) throw ConfigError("eval.budget: must be an object");
  skim::InferenceBudget b;
  for (const auto& [key, v] : j.items()) {
    const std::string where = "eval.budget." + key;
    if (key == "t_stop") b.t_stop = get<std::size_t>(v, where);
    else if (key == "subsample_factor") b.subsample_factor = get<std::size_t>(v, where);
    else if (key == "use_recognition_features") b.use_recognition_features = get<bool>(v, where);
    else throw ConfigError("eval.budget: unknown key '" + key + "'");
  }
  try {
    b.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("eval.budget: ") + e.what());
  }
  return b;
}

json budget_json(const skim::InferenceBudget& b) {
  return {{"t_stop", b.t_stop}, {"subsample_factor", b.subsample_factor},
          {"use_recognition_features", b.use_recognition_features}};
}

EvalSection parse_eval(const json& j) {
  EvalSection e;
  for (const auto& [key, v] : j.items()) {
    const std::string where = "eval." + key;
    if (key == "strategies") {
      e.strategies.clear();
      for (const auto& s : get<std::vector<std::string>>(v, where)) e.strategies.push_back(evalbench::parse_strategy(s));
    } else if (key == "budget") {
      e.budget = parse_budget(v);
    } else if (key == "seeds") {
      e.seeds = get<std::vector<std::uint64_t>>(v, where);
    } else if (key == "split") {
      e.split = get<std::string>(v, where);
    } else if (key == "sweep_axis") {
      e.sweep_axis = parse_sweep_axis(get<std::string>(v, where));
    } else if (key == "sweep_values") {
      e.sweep_values = get<std::vector<std::size_t>>(v, where);
    } else {
      throw ConfigError("eval: unknown key '" + key + "'");
    }
  }
  return e;
}

json eval_json(const EvalSection& e) {
  json strategies = json::array();
  for (auto s : e.strategies) strategies.push_back(std::string(evalbench::strategy_name(s)));
  return {{"strategies", strategies},
          {"budget", budget_json(e.budget)},
          {"seeds", e.seeds},
          {"split", e.split},
          {"sweep_axis", std::string(sweep_axis_name(e.sweep_axis))},
          {"sweep_values", e.sweep_values}};
}

GradcheckSection parse_gradcheck(const json& j) {
  if (!j.is_object()) throw ConfigError("gradcheck: section must be an object");
  GradcheckSection g;
  for (const auto& [key, v] : j.items()) {
    const std::string where = "gradcheck." + key;
    if (key == "feature_dim") g.feature_dim = get<std::size_t>(v, where);
    else if (key == "encoder_hidden") g.encoder_hidden = get<std::size_t>(v, where);
    else if (key == "teacher_hidden") g.teacher_hidden = get<std::size_t>(v, where);
    else if (key == "lstm_hidden") g.lstm_hidden = get<std::size_t>(v, where);
    else if (key == "key_dim") g.key_dim = get<std::size_t>(v, where);
    else if (key == "query_hidden") g.query_hidden = get<std::size_t>(v, where);
    else if (key == "num_classes") g.num_classes = get<std::size_t>(v, where);
    else if (key == "seq_len") g.seq_len = get<std::size_t>(v, where);
    else if (key == "batch") g.batch = get<std::size_t>(v, where);
    else if (key == "steps") g.steps = get<std::size_t>(v, where);
    else if (key == "param_scale") g.param_scale = get<double>(v, where);
    else if (key == "lstm_scale") g.lstm_scale = get<double>(v, where);
    else if (key == "attention_scale") g.attention_scale = get<double>(v, where);
    else if (key == "bias_scale") g.bias_scale = get<double>(v, where);
    else if (key == "eps") g.eps = get<double>(v, where);
    else if (key == "tolerance") g.tolerance = get<double>(v, where);
    else throw ConfigError("gradcheck: unknown key '" + key + "'");
  }
  return g;
}

json gradcheck_json(const GradcheckSection& g) {
  return {{"feature_dim", g.feature_dim},       {"encoder_hidden", g.encoder_hidden},
          {"teacher_hidden", g.teacher_hidden}, {"lstm_hidden", g.lstm_hidden},
          {"key_dim", g.key_dim},               {"query_hidden", g.query_hidden},
          {"num_classes", g.num_classes},       {"seq_len", g.seq_len},
          {"batch", g.batch},                   {"steps", g.steps},
          {"param_scale", g.param_scale},
          {"lstm_scale", g.lstm_scale},
          {"attention_scale", g.attention_scale},
          {"bias_scale", g.bias_scale},
          {"eps", g.eps},                       {"tolerance", g.tolerance}};
}

json without_seed(const std::string& text) {
  json j = json::parse(text);
  j.erase("seed");
  return j;
}

}  // namespace

void ExperimentConfig::resolve() {
  dataset.seed = seed;
  distill.seed = seed;
  skim.seed = seed;
  model.image_dim = dataset.image_dim;
  model.audio_dim = dataset.audio_dim;
  model.clip_frames = dataset.clip_frames;
  model.num_classes = dataset.num_classes;
}

void ExperimentConfig::validate() const {
  dataset.validate();
  model.validate();
  distill.validate();
  skim.validate();
  eval.budget.validate();
  if (eval.strategies.empty()) throw ConfigError("eval.strategies: at least one strategy is required");
  if (eval.seeds.empty()) throw ConfigError("eval.seeds: at least one seed is required");
  if (eval.split != "train" && eval.split != "val" && eval.split != "test") {
    throw ConfigError("eval.split: must be train, val or test");
  }
  for (std::size_t v : eval.sweep_values) {
    if (v == 0) throw ConfigError("eval.sweep_values: values must be positive");
  }
  const auto& g = gradcheck;
  if (g.feature_dim < 2 || g.feature_dim % 2 || g.encoder_hidden == 0 || g.teacher_hidden == 0 ||
      g.lstm_hidden == 0 || g.key_dim == 0 || g.query_hidden == 0 || g.num_classes < 2 || g.seq_len < 2 ||
      g.batch == 0 || g.steps < 2) {
    throw ConfigError("gradcheck: sizes must be positive, feature_dim even, num_classes, seq_len and steps >= 2");
  }
  if (!(g.eps > 0.0) || !(g.tolerance > 0.0) || !(g.param_scale > 0.0) || !(g.lstm_scale > 0.0) ||
      !(g.attention_scale > 0.0) || !(g.bias_scale >= 0.0)) {
    throw ConfigError("gradcheck: eps, tolerance and gains must be positive, bias_scale nonnegative");
  }
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const char* s : kSections) {
    if (!root.contains(s)) throw ConfigError(std::string("missing section '") + s + "'");
  }
  ExperimentConfig cfg;
  for (const auto& [key, v] : root.items()) {
    if (key == "seed") cfg.seed = get<std::uint64_t>(v, "seed");
    else if (key == "output_dir") cfg.output_dir = get<std::string>(v, "output_dir");
    else if (key == "gradcheck") cfg.gradcheck = parse_gradcheck(v);
    else if (std::find(std::begin(kSections), std::end(kSections), key) == std::end(kSections)) {
      throw ConfigError("unknown top-level key '" + key + "'");
    }
  }
  cfg.dataset = synth::dataset_config_from_json(object_at(root, "dataset").dump());
  cfg.resolve();
  cfg.model = models::model_dims_from_json(object_at(root, "model").dump(), cfg.model);
  cfg.distill = distill::distill_config_from_json(object_at(root, "distill").dump());
  cfg.skim = skim::skim_config_from_json(object_at(root, "skim").dump());
  cfg.eval = parse_eval(object_at(root, "eval"));
  cfg.resolve();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kMissingFile, "config file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();
  j["dataset"] = without_seed(synth::dataset_config_to_json(cfg.dataset));
  j["model"] = json::parse(models::model_dims_to_json(cfg.model));
  j["distill"] = without_seed(distill::distill_config_to_json(cfg.distill));
  j["skim"] = without_seed(skim::skim_config_to_json(cfg.skim));
  j["eval"] = eval_json(cfg.eval);
  j["gradcheck"] = gradcheck_json(cfg.gradcheck);
  return j.dump(2) + "\n";
}

}  // namespace skimnet::cli
