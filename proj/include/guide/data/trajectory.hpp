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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "guide/env/bid_state.hpp"

namespace guide {

struct EpisodeMeta {
  double budget = 0.0;
  double cpa_limit = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const EpisodeMeta&, const EpisodeMeta&) = default;
};

// One logged episode. returns_to_go[t] is the suffix sum of rewards from t.
struct Trajectory {
  std::vector<BidState> states;
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<double> returns_to_go;
  EpisodeMeta meta;

  std::size_t length() const { return states.size(); }
  double episode_return() const {
    return returns_to_go.empty() ? 0.0 : returns_to_go.front();
  }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

using Dataset = std::vector<Trajectory>;

// Suffix sums, accumulated from the last step backwards. Throws EmptySequence.
std::vector<double> compute_rtg(std::span<const double> rewards);

// Builds a trajectory and fills returns_to_go. Throws ShapeMismatch when the
// sequences disagree in length or an action is negative.
Trajectory make_trajectory(std::vector<BidState> states,
                           std::vector<double> actions,
                           std::vector<double> rewards, EpisodeMeta meta);

inline constexpr double kStdFloor = 1e-6;

struct NormStats {
  std::array<double, kStateDim> state_mean{};
  std::array<double, kStateDim> state_std{};
  double rtg_scale = 1.0;
  double action_low = 0.0;
  double action_high = 1.0;

  BidState normalize(const BidState& s) const;
  BidState denormalize(const BidState& z) const;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

// Per-feature mean and population std over every stored state (std floored at
// kStdFloor), rtg_scale = max episode return (1.0 when all returns are zero),
// action bounds = observed min / max. Throws EmptyDataset.
NormStats fit_norm_stats(std::span<const Trajectory> dataset);

// Normalized, left-padded context of k steps ending at step t. Position k-1
// is the query step; padding_mask marks real entries.
struct ContextWindow {
  std::vector<double> rtg;                           // k, divided by rtg_scale
  std::vector<std::array<double, kStateDim>> states; // k, normalized
  std::vector<double> actions;                       // k - 1, raw multipliers
  std::vector<int> timesteps;                        // k, absolute step index
  std::vector<bool> padding_mask;                    // k, true = real
  double target_action = 0.0;
  std::optional<std::array<double, kStateDim>> target_next_state;  // normalized

  std::size_t context() const { return rtg.size(); }
  friend bool operator==(const ContextWindow&, const ContextWindow&) = default;
};

// Throws IndexOutOfRange unless 0 <= t < T and k >= 1.
ContextWindow slice_window(const Trajectory& traj, int t, int k,
                           const NormStats& stats);

}  // namespace guide
