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

#include "guide/data/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "guide/common/errors.hpp"

namespace guide {

std::vector<double> compute_rtg(std::span<const double> rewards) {
  if (rewards.empty()) throw EmptySequence("compute_rtg: empty reward sequence");
  std::vector<double> rtg(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc += rewards[i];
    rtg[i] = acc;
  }
  return rtg;
}

Trajectory make_trajectory(std::vector<BidState> states,
                           std::vector<double> actions,
                           std::vector<double> rewards, EpisodeMeta meta) {
  if (states.size() != actions.size() || states.size() != rewards.size()) {
    throw ShapeMismatch("make_trajectory: states/actions/rewards lengths differ");
  }
  for (double a : actions) {
    if (!(a >= 0.0)) throw ShapeMismatch("make_trajectory: negative action");
  }
  Trajectory traj;
  traj.returns_to_go = compute_rtg(rewards);
  traj.states = std::move(states);
  traj.actions = std::move(actions);
  traj.rewards = std::move(rewards);
  traj.meta = meta;
  return traj;
}

BidState NormStats::normalize(const BidState& s) const {
  BidState z;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    z[i] = (s[i] - state_mean[i]) / state_std[i];
  }
  return z;
}

BidState NormStats::denormalize(const BidState& z) const {
  BidState s;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    s[i] = z[i] * state_std[i] + state_mean[i];
  }
  return s;
}

NormStats fit_norm_stats(std::span<const Trajectory> dataset) {
  if (dataset.empty()) throw EmptyDataset("fit_norm_stats: empty dataset");
  NormStats stats;
  std::array<double, kStateDim> sum{};
  std::size_t count = 0;
  double max_return = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& traj : dataset) {
    for (const auto& s : traj.states) {
      for (std::size_t i = 0; i < kStateDim; ++i) sum[i] += s[i];
    }
    count += traj.states.size();
    max_return = std::max(max_return, traj.episode_return());
    for (double a : traj.actions) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  if (count == 0) throw EmptyDataset("fit_norm_stats: no states");
  for (std::size_t i = 0; i < kStateDim; ++i) {
    stats.state_mean[i] = sum[i] / static_cast<double>(count);
  }
  std::array<double, kStateDim> sq{};
  for (const auto& traj : dataset) {
    for (const auto& s : traj.states) {
      for (std::size_t i = 0; i < kStateDim; ++i) {
        const double d = s[i] - stats.state_mean[i];
        sq[i] += d * d;
      }
    }
  }
  for (std::size_t i = 0; i < kStateDim; ++i) {
    stats.state_std[i] =
        std::max(kStdFloor, std::sqrt(sq[i] / static_cast<double>(count)));
  }
  stats.rtg_scale = max_return > 0.0 ? max_return : 1.0;
  stats.action_low = lo;
  stats.action_high = hi > 0.0 ? hi : 1.0;
  return stats;
}

ContextWindow slice_window(const Trajectory& traj, int t, int k,
                           const NormStats& stats) {
  const int T = static_cast<int>(traj.length());
  if (t < 0 || t >= T) {
    throw IndexOutOfRange("slice_window: t=" + std::to_string(t) +
                          " outside [0, " + std::to_string(T) + ")");
  }
  if (k < 1) throw IndexOutOfRange("slice_window: k must be >= 1");

  ContextWindow w;
  const auto n = static_cast<std::size_t>(k);
  w.rtg.assign(n, 0.0);
  w.states.assign(n, std::array<double, kStateDim>{});
  w.actions.assign(n - 1, 0.0);
  w.timesteps.assign(n, 0);
  w.padding_mask.assign(n, false);

  const int first = t - k + 1;
  for (int j = 0; j < k; ++j) {
    const int step = first + j;
    if (step < 0) continue;
    const auto pos = static_cast<std::size_t>(j);
    w.rtg[pos] = traj.returns_to_go[step] / stats.rtg_scale;
    w.states[pos] = stats.normalize(traj.states[step]).features;
    if (j < k - 1) w.actions[pos] = traj.actions[step];
    w.timesteps[pos] = step;
    w.padding_mask[pos] = true;
  }
  w.target_action = traj.actions[t];
  if (t + 1 < T) w.target_next_state = stats.normalize(traj.states[t + 1]).features;
  return w;
}

}  // namespace guide
