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

#include "guide/data/log_ingest.hpp"

#include <cmath>
#include <string>

#include "guide/common/errors.hpp"

namespace guide {

Trajectory trajectory_from_log(std::span<const EpisodeLogRecord> records,
                               const AuctionEpisodeConfig& config) {
  config.validate();
  if (records.empty()) throw EmptyLog("episode log has no records");
  if (static_cast<int>(records.size()) > config.steps) {
    throw ShapeMismatch("episode log is longer than the horizon");
  }
  CampaignLedger ledger = make_ledger(config);
  std::vector<BidState> states;
  std::vector<double> actions, rewards;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.step != static_cast<int>(i)) {
      throw ShapeMismatch("episode log step " + std::to_string(r.step) +
                          " at position " + std::to_string(i));
    }
    states.push_back(make_state(ledger, config));
    actions.push_back(r.lambda);
    rewards.push_back(r.value);

    // Same accumulation order as step_episode.
    ledger.spent = ledger.spent + r.cost;
    ledger.value_acquired = ledger.value_acquired + r.value;
    ledger.cost_by_step.push_back(r.cost);
    ledger.conversions_value_by_step.push_back(r.value);
    ledger.wins_by_step.push_back(r.wins);
    ledger.impressions_by_step.push_back(r.impressions);
    ledger.lambda_by_step.push_back(r.lambda);
    ledger.step_index += 1;

    const double expected = ledger.budget_total - ledger.spent;
    if (std::abs(expected - r.budget_remaining) >
        1e-9 * std::max(1.0, std::abs(ledger.budget_total))) {
      throw VersionOrCorruption("episode log budget_remaining mismatch at step " +
                                std::to_string(r.step));
    }
  }
  return make_trajectory(std::move(states), std::move(actions), std::move(rewards),
                         {config.budget, config.cpa_limit, config.seed});
}

}  // namespace guide
