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

// Small models and random windows shared by the libtorch test suites.
// Suites get doctest through torch_doctest.hpp.

#include <filesystem>
#include <random>

#include <torch/torch.h>

#include "guide/data/trajectory.hpp"
#include "guide/model/networks.hpp"

namespace guide::testing {

inline ModelConfig tiny_config(int k = 5) {
  ModelConfig c;
  c.dt.layers = 2;
  c.dt.heads = 2;
  c.dt.hidden_dim = 16;
  c.dt.context_k = k;
  c.dt.dropout = 0.1;
  c.mlp_hidden = 16;
  c.mlp_layers = 2;
  return c;
}

inline NormStats unit_stats(double action_high = 2.0) {
  NormStats s;
  s.state_mean.fill(0.0);
  s.state_std.fill(1.0);
  s.rtg_scale = 1.0;
  s.action_low = 0.0;
  s.action_high = action_high;
  return s;
}

inline GuideModel make_model(std::uint64_t seed, const ModelConfig& config = tiny_config(),
                             const NormStats& stats = unit_stats()) {
  torch::manual_seed(seed);
  return GuideModel(config, stats);
}

// Left-padded window with `real` real steps ending at step `last_step`.
inline ContextWindow random_window(std::mt19937_64& rng, int k, int real,
                                   int last_step) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 2.0);
  ContextWindow w;
  w.rtg.assign(k, 0.0);
  w.states.assign(k, {});
  w.actions.assign(k - 1, 0.0);
  w.timesteps.assign(k, 0);
  w.padding_mask.assign(k, false);
  for (int j = k - real; j < k; ++j) {
    w.rtg[j] = pos(rng);
    for (double& x : w.states[j]) x = n(rng);
    if (j < k - 1) w.actions[j] = pos(rng);
    w.timesteps[j] = last_step - (k - 1 - j);
    w.padding_mask[j] = true;
  }
  w.target_action = pos(rng);
  std::array<double, kStateDim> next{};
  for (double& x : next) x = n(rng);
  w.target_next_state = next;
  return w;
}

inline std::filesystem::path scratch_dir(const char* name) {
  const auto p = std::filesystem::temp_directory_path() / "guide_tests" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace guide::testing
