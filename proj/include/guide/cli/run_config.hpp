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

#pragma once

// One JSON document configures a whole run. configs/benchmark.json is the
// annotated reference; // comments are accepted.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "guide/data/generate.hpp"
#include "guide/env/auction_env.hpp"
#include "guide/model/networks.hpp"
#include "guide/policy/guide_policy.hpp"
#include "guide/train/trainer.hpp"
#include "json.hpp"

namespace guide {

struct DataOptions {
  int num_episodes = 400;
  BehaviorMix mix;
};

struct EvalOptions {
  std::vector<double> fractions{0.5, 0.75, 1.0, 1.25, 1.5};
  int episodes_per_cell = 20;
  int ablation_episodes = 20;
  int calibration_episodes = 20;
  double rtg_multiplier = 1.0;
  bool smoothing = false;
  int window_len = 4;
  double blend = 0.5;

  GuidePolicyOptions policy() const;
};

// TrainConfig::seed and AuctionEpisodeConfig::seed are not part of the
// document; both derive from `seed`.
// Desk-scale training schedule used by the CLI and the benchmark: a faster
// actor, and several critic regressions per actor step so the critics track
// the behavior value before the Q term leans on them.
TrainConfig benchmark_train_config();

struct RunConfig {
  std::uint64_t seed = 7;
  AuctionEpisodeConfig env;
  DataOptions data;
  TrainConfig train = benchmark_train_config();
  ModelConfig model;
  EvalOptions eval;

  // Throws ConfigError naming the offending field.
  void validate() const;

  std::uint64_t env_seed() const;
  std::uint64_t data_seed() const;
  std::uint64_t train_seed() const;
  std::uint64_t eval_seed() const;

  // train with seed = train_seed().
  TrainConfig train_config() const;
};

// The benchmark preset; equal to a default-constructed RunConfig.
RunConfig default_run_config();

nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults. Unknown keys and wrong types throw
// ConfigError naming the key path.
RunConfig run_config_from_json(const nlohmann::json& doc);

// Sorted-key compact dump of the complete document.
std::string canonical_dump(const RunConfig& config);
// 16 hex digits of FNV-1a over canonical_dump; independent of key order in
// the source file.
std::string config_hash(const RunConfig& config);

// Throws IoError or ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace guide
