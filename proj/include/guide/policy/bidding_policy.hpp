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

#include <string>
#include <vector>

#include "guide/data/trajectory.hpp"
#include "guide/env/auction_env.hpp"

namespace guide {

// Closed-loop controller of the bid multiplier lambda_t.
class BiddingPolicy {
 public:
  virtual ~BiddingPolicy() = default;

  virtual std::string name() const = 0;
  virtual void begin_episode(const AuctionEpisodeConfig& config) = 0;
  virtual double act(const BidState& state, const CampaignLedger& ledger) = 0;
  // Realized result of the multiplier returned by the preceding act().
  virtual void observe(const StepOutcome& outcome) { (void)outcome; }
};

struct EpisodeRecord {
  Trajectory trajectory;
  CampaignLedger ledger;
  std::vector<double> offered_value_by_step;
};

// Runs all T steps; budget exhaustion does not end the episode early.
EpisodeRecord run_episode(const AuctionEpisodeConfig& config,
                          BiddingPolicy& policy);

}  // namespace guide
