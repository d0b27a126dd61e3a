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

#include "guide/policy/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "guide/common/seeding.hpp"
#include "guide/eval/metrics.hpp"

namespace guide {

void PidPacingPolicy::begin_episode(const AuctionEpisodeConfig& config) {
  steps_ = config.steps;
  start_ = lambda_0_ > 0.0 ? lambda_0_ : config.cpa_limit;
  cap_ = cpa_cap_ > 0.0 ? cpa_cap_ * config.cpa_limit
                        : std::numeric_limits<double>::infinity();
  integral_ = 0.0;
  prev_error_ = 0.0;
}

double PidPacingPolicy::act(const BidState&, const CampaignLedger& ledger) {
  const int t = ledger.step_index;
  double lambda = start_;
  if (t > 0) {
    const double per_step = spend_target_ * ledger.budget_total / steps_;
    const double error = (per_step * t - ledger.spent) / per_step;
    integral_ += error;
    const double derivative = error - prev_error_;
    prev_error_ = error;
    lambda = start_ * std::exp(gains_.kp * error + gains_.ki * integral_ +
                               gains_.kd * derivative);
  }
  return std::min(std::clamp(lambda, gains_.lambda_min, gains_.lambda_max), cap_);
}

void RandomWalkPolicy::begin_episode(const AuctionEpisodeConfig& config) {
  rng_.seed(derive_seed(seed_, {config.seed}));
  lambda_ = lambda_0_;
}

double RandomWalkPolicy::act(const BidState&, const CampaignLedger& ledger) {
  if (ledger.step_index > 0) {
    lambda_ *= std::exp(std::normal_distribution<double>(0.0, sigma_)(rng_));
    lambda_ = std::clamp(lambda_, 0.05, 4.0);
  }
  return lambda_;
}

void NoisyPolicy::begin_episode(const AuctionEpisodeConfig& config) {
  rng_.seed(derive_seed(seed_, {config.seed}));
  inner_->begin_episode(config);
}

double NoisyPolicy::act(const BidState& state, const CampaignLedger& ledger) {
  const double base = inner_->act(state, ledger);
  return base * std::exp(std::normal_distribution<double>(0.0, sigma_)(rng_));
}

double tune_constant_lambda(const AuctionEpisodeConfig& config,
                            std::span<const double> grid, int episodes,
                            std::uint64_t seed, double beta) {
  double best_lambda = grid.empty() ? config.cpa_limit : grid.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
      AuctionEpisodeConfig c = config;
      c.seed = derive_seed(seed, {static_cast<std::uint64_t>(e)});
      ConstantLambdaPolicy policy(lambda);
      const auto rec = run_episode(c, policy);
      total += compute_score(rec.ledger, c.cpa_limit, beta).score;
    }
    if (total > best_score) {
      best_score = total;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace guide
