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

#include "guide/data/generate.hpp"

#include <algorithm>
#include <memory>
#include <random>

#include "guide/common/seeding.hpp"
#include "guide/policy/heuristics.hpp"

namespace guide {
namespace {

std::unique_ptr<BiddingPolicy> draw_behavior(const AuctionEpisodeConfig& config,
                                             const BehaviorMix& mix,
                                             std::mt19937_64& rng) {
  std::discrete_distribution<int> family(mix.weights.begin(), mix.weights.end());
  const auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const double C = config.cpa_limit;
  switch (family(rng)) {
    case 0:
      return std::make_unique<ConstantLambdaPolicy>(u(0.4, 1.2) * C);
    case 1:
      return std::make_unique<PidPacingPolicy>(PidGains{}, u(0.5, 1.5) * C,
                                               u(0.7, 1.1));
    case 2:
      return std::make_unique<PidPacingPolicy>(PidGains{}, u(0.5, 1.2) * C,
                                               u(0.8, 1.1), u(0.8, 1.0));
    default:
      return std::make_unique<RandomWalkPolicy>(u(0.4, 1.4) * C, 0.15, rng());
  }
}

}  // namespace

Dataset generate_dataset(const AuctionEpisodeConfig& base, int num_episodes,
                         std::uint64_t seed, const BehaviorMix& mix) {
  base.validate();
  Dataset out;
  out.reserve(static_cast<std::size_t>(std::max(num_episodes, 0)));
  for (int i = 0; i < num_episodes; ++i) {
    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    AuctionEpisodeConfig config = base;
    config.seed = derive_seed(seed, {static_cast<std::uint64_t>(i), 1});
    config.budget = base.budget * std::uniform_real_distribution<double>(
                                      mix.budget_low, mix.budget_high)(rng);
    auto inner = draw_behavior(config, mix, rng);
    NoisyPolicy policy(std::move(inner), mix.noise_sigma, rng());
    out.push_back(run_episode(config, policy).trajectory);
  }
  return out;
}

}  // namespace guide
