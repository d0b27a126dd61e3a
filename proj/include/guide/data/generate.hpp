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

#include "guide/data/trajectory.hpp"
#include "guide/env/auction_env.hpp"

namespace guide {

// Behavior-policy mix used to log offline trajectories. Every episode draws
// its budget as base.budget * U[budget_low, budget_high], one policy family by
// `weights` (constant, pid, cpa-capped pid, random walk) with randomized
// parameters, and multiplicative log-normal action noise.
struct BehaviorMix {
  double budget_low = 0.4;
  double budget_high = 1.6;
  double noise_sigma = 0.1;
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
};

// Deterministic in (base, num_episodes, seed, mix).
Dataset generate_dataset(const AuctionEpisodeConfig& base, int num_episodes,
                         std::uint64_t seed, const BehaviorMix& mix = {});

}  // namespace guide
