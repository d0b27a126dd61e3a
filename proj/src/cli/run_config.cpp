// Copyright 2026 The Guide Bidding Authors.
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

#include "guide/cli/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "guide/common/errors.hpp"
#include "guide/common/seeding.hpp"

namespace guide {
namespace {

using nlohmann::json;

// Visitors walk every configurable field once; the same field list drives
// serialization, parsing and unknown-key detection.

class JsonWriter {
 public:
  explicit JsonWriter(json& out) : out_(out) {}

  template <typename T>
  void operator()(const char* key, T& value) {
    out_[key] = value;
  }
  template <typename Fn>
  void section(const char* key, Fn&& fn) {
    JsonWriter child(out_[key]);
    fn(child);
  }

 private:
  json& out_;
};

class JsonReader {
 public:
  JsonReader(const json& in, std::string path) : in_(in), path_(std::move(path)) {
    if (!in_.is_object()) throw ConfigError(name_or_root() + ": expected an object");
  }

  template <typename T>
  void operator()(const char* key, T& value) {
    seen_.insert(key);
    const auto it = in_.find(key);
    if (it == in_.end()) return;
    try {
      value = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + key + ": wrong type");
    }
  }
  template <typename Fn>
  void section(const char* key, Fn&& fn) {
    seen_.insert(key);
    const auto it = in_.find(key);
    if (it == in_.end()) return;
    JsonReader child(*it, path_ + key + ".");
    fn(child);
    child.finish();
  }
  void finish() const {
    for (const auto& item : in_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(path_ + item.key() + ": unknown key");
      }
    }
  }

 private:
  std::string name_or_root() const {
    return path_.empty() ? "config" : path_.substr(0, path_.size() - 1);
  }

  const json& in_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string family_name(ValueDistribution::Family f) {
  switch (f) {
    case ValueDistribution::Family::kLogNormal: return "lognormal";
    case ValueDistribution::Family::kPointMass: return "point_mass";
    case ValueDistribution::Family::kUniform: return "uniform";
  }
  return "lognormal";
}

ValueDistribution::Family parse_family(const std::string& name) {
  if (name == "lognormal") return ValueDistribution::Family::kLogNormal;
  if (name == "point_mass") return ValueDistribution::Family::kPointMass;
  if (name == "uniform") return ValueDistribution::Family::kUniform;
  throw ConfigError("env.value_dist.family: unknown family '" + name + "'");
}

template <typename V>
void visit_env(V& v, AuctionEpisodeConfig& c) {
  v("budget", c.budget);
  v("cpa_limit", c.cpa_limit);
  v("steps", c.steps);
  v("impressions_per_step", c.impressions_per_step);
  v("traffic_amplitude", c.traffic_amplitude);
  v("volume_jitter", c.volume_jitter);
  v.section("value_dist", [&](auto& d) {
    std::string family = family_name(c.value_dist.family);
    d("family", family);
    c.value_dist.family = parse_family(family);
    d("a", c.value_dist.a);
    d("b", c.value_dist.b);
  });
  v("conversion_rate", c.conversion_rate);
  v("num_competitors", c.num_competitors);
  v("pid_competitors", c.pid_competitors);
  v("competitor_lambda_low", c.competitor_lambda_low);
  v("competitor_lambda_high", c.competitor_lambda_high);
  v("competitor_value_noise", c.competitor_value_noise);
  v("competitor_budget", c.competitor_budget);
}

template <typename V>
void visit_data(V& v, DataOptions& c) {
  v("num_episodes", c.num_episodes);
  v("budget_low", c.mix.budget_low);
  v("budget_high", c.mix.budget_high);
  v("noise_sigma", c.mix.noise_sigma);
  v("policy_weights", c.mix.weights);
}

template <typename V>
void visit_train(V& v, TrainConfig& c) {
  v("phase1_steps", c.phase1_steps);
  v("phase2_steps", c.phase2_steps);
  v("batch_size", c.batch_size);
  v("critic_batch_size", c.critic_batch_size);
  v("critic_updates_per_step", c.critic_updates_per_step);
  v("lr_actor", c.lr_actor);
  v("lr_critic", c.lr_critic);
  v("gamma", c.gamma);
  v("tau_ema", c.tau_ema);
  v("q_reg_weight", c.q_reg_weight);
  v("grad_clip", c.grad_clip);
}

template <typename V>
void visit_model(V& v, ModelConfig& c) {
  v("layers", c.dt.layers);
  v("heads", c.dt.heads);
  v("hidden_dim", c.dt.hidden_dim);
  v("context_k", c.dt.context_k);
  v("dropout", c.dt.dropout);
  v("max_timestep", c.dt.max_timestep);
  v("mlp_hidden", c.mlp_hidden);
  v("mlp_layers", c.mlp_layers);
}

template <typename V>
void visit_eval(V& v, EvalOptions& c) {
  v("fractions", c.fractions);
  v("episodes_per_cell", c.episodes_per_cell);
  v("ablation_episodes", c.ablation_episodes);
  v("calibration_episodes", c.calibration_episodes);
  v("rtg_multiplier", c.rtg_multiplier);
  v("smoothing", c.smoothing);
  v("window_len", c.window_len);
  v("blend", c.blend);
}

template <typename V>
void visit_run(V& v, RunConfig& c) {
  v("seed", c.seed);
  v.section("env", [&](auto& s) { visit_env(s, c.env); });
  v.section("data", [&](auto& s) { visit_data(s, c.data); });
  v.section("train", [&](auto& s) { visit_train(s, c.train); });
  v.section("model", [&](auto& s) { visit_model(s, c.model); });
  v.section("eval", [&](auto& s) { visit_eval(s, c.eval); });
}

std::string prefixed(const std::string& section, const Error& e) {
  return section + "." + e.what();
}

}  // namespace

GuidePolicyOptions EvalOptions::policy() const {
  GuidePolicyOptions p;
  p.rtg_multiplier = rtg_multiplier;
  p.smoothing = smoothing;
  p.window_len = window_len;
  p.blend = blend;
  return p;
}

void RunConfig::validate() const {
  try {
    env.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(prefixed("env", e));
  }
  try {
    train_config().validate();
  } catch (const ConfigError& e) {
    throw ConfigError(prefixed("train", e));
  }
  try {
    model.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(prefixed("model", e));
  }
  if (data.num_episodes < 0) throw ConfigError("data.num_episodes must be >= 0");
  if (!(data.mix.budget_low > 0.0 && data.mix.budget_low <= data.mix.budget_high)) {
    throw ConfigError("data.budget_low must satisfy 0 < budget_low <= budget_high");
  }
  if (!(data.mix.noise_sigma >= 0.0)) throw ConfigError("data.noise_sigma must be >= 0");
  double weight_sum = 0.0;
  for (double w : data.mix.weights) {
    if (!(w >= 0.0)) throw ConfigError("data.policy_weights must be >= 0");
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) throw ConfigError("data.policy_weights must not all be 0");
  if (eval.fractions.empty()) throw ConfigError("eval.fractions must not be empty");
  for (double f : eval.fractions) {
    if (!(f > 0.0)) throw ConfigError("eval.fractions entries must be > 0");
  }
  if (eval.episodes_per_cell < 1) throw ConfigError("eval.episodes_per_cell must be >= 1");
  if (eval.ablation_episodes < 1) throw ConfigError("eval.ablation_episodes must be >= 1");
  if (eval.calibration_episodes < 1) {
    throw ConfigError("eval.calibration_episodes must be >= 1");
  }
  if (!(eval.rtg_multiplier >= 0.0)) throw ConfigError("eval.rtg_multiplier must be >= 0");
  if (eval.window_len < 1) throw ConfigError("eval.window_len must be >= 1");
  if (!(eval.blend >= 0.0 && eval.blend <= 1.0)) {
    throw ConfigError("eval.blend must lie in [0, 1]");
  }
}

std::uint64_t RunConfig::env_seed() const { return substream(seed, "env"); }
std::uint64_t RunConfig::data_seed() const { return substream(seed, "data"); }
std::uint64_t RunConfig::train_seed() const { return substream(seed, "train"); }
std::uint64_t RunConfig::eval_seed() const { return substream(seed, "eval"); }

TrainConfig RunConfig::train_config() const {
  TrainConfig t = train;
  t.seed = train_seed();
  return t;
}

TrainConfig benchmark_train_config() {
  TrainConfig t;
  t.lr_actor = 3e-4;
  t.lr_critic = 1e-3;
  t.critic_updates_per_step = 8;
  return t;
}

RunConfig default_run_config() { return RunConfig{}; }

json to_json(const RunConfig& config) {
  json doc = json::object();
  RunConfig copy = config;
  JsonWriter writer(doc);
  visit_run(writer, copy);
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig config;
  JsonReader reader(doc, "");
  visit_run(reader, config);
  reader.finish();
  return config;
}

std::string canonical_dump(const RunConfig& config) {
  // nlohmann::json objects keep keys sorted.
  return to_json(config).dump();
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_dump(config))));
  return buf;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  json doc;
  try {
    doc = json::parse(text.str(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig config = run_config_from_json(doc);
  config.validate();
  return config;
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << to_json(config).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace guide
