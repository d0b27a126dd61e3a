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

#include "guide/policy/bidding_policy.hpp"

#include <algorithm>

namespace guide {

EpisodeRecord run_episode(const AuctionEpisodeConfig& config,
                          BiddingPolicy& policy) {
  AuctionEpisode episode(config);
  policy.begin_episode(config);
  std::vector<BidState> states;
  std::vector<double> actions, rewards;
  states.reserve(static_cast<std::size_t>(config.steps));
  while (!episode.done()) {
    const BidState s = episode.state();
    const double lambda = std::max(0.0, policy.act(s, episode.ledger()));
    const StepOutcome out = episode.step(lambda);
    policy.observe(out);
    states.push_back(s);
    actions.push_back(lambda);
    rewards.push_back(out.value_won);
  }
  EpisodeRecord rec;
  rec.trajectory =
      make_trajectory(std::move(states), std::move(actions), std::move(rewards),
                      {config.budget, config.cpa_limit, config.seed});
  rec.ledger = episode.ledger();
  rec.offered_value_by_step = episode.offered_value_by_step();
  return rec;
}

}  // namespace guide
