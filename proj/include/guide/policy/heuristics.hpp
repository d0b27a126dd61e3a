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

#include <cstdint>
#include <memory>
#include <random>
#include <span>

#include "guide/policy/bidding_policy.hpp"

namespace guide {

class ConstantLambdaPolicy final : public BiddingPolicy {
 public:
  explicit ConstantLambdaPolicy(double lambda) : lambda_(lambda) {}

  std::string name() const override { return "constant"; }
  void begin_episode(const AuctionEpisodeConfig&) override {}
  double act(const BidState&, const CampaignLedger&) override { return lambda_; }

  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

// Gains of the pacing controller. The error at step t is the spend shortfall
// against a uniform plan, in units of one step's planned spend:
//   e_t = (target * B * t / T - spent) / (target * B / T)
// and lambda_t = lambda_0 * exp(kp * e_t + ki * sum(e) + kd * (e_t - e_{t-1}))
// clamped to [lambda_min, lambda_max].
struct PidGains {
  double kp = 0.08;
  double ki = 0.01;
  double kd = 0.02;
  double lambda_min = 0.05;
  double lambda_max = 4.0;
};

class PidPacingPolicy final : public BiddingPolicy {
 public:
  // lambda_0 <= 0 means "start at the episode's CPA limit".
  explicit PidPacingPolicy(PidGains gains = {}, double lambda_0 = 0.0,
                           double spend_target = 1.0, double cpa_cap = 0.0)
      : gains_(gains),
        lambda_0_(lambda_0),
        spend_target_(spend_target),
        cpa_cap_(cpa_cap) {}

  std::string name() const override { return "pid"; }
  void begin_episode(const AuctionEpisodeConfig& config) override;
  double act(const BidState& state, const CampaignLedger& ledger) override;

 private:
  PidGains gains_;
  double lambda_0_;
  double spend_target_;
  double cpa_cap_;  // when > 0, lambda is capped at cpa_cap * C
  int steps_ = 0;
  double start_ = 1.0;
  double cap_ = 0.0;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
};

// Geometric random walk of the multiplier; exploration-heavy behavior.
class RandomWalkPolicy final : public BiddingPolicy {
 public:
  RandomWalkPolicy(double lambda_0, double step_sigma, std::uint64_t seed)
      : lambda_0_(lambda_0), sigma_(step_sigma), seed_(seed) {}

  std::string name() const override { return "random_walk"; }
  void begin_episode(const AuctionEpisodeConfig& config) override;
  double act(const BidState& state, const CampaignLedger& ledger) override;

 private:
  double lambda_0_;
  double sigma_;
  std::uint64_t seed_;
  double lambda_ = 0.0;
  std::mt19937_64 rng_;
};

// Multiplies the wrapped policy's output by exp(N(0, sigma)).
class NoisyPolicy final : public BiddingPolicy {
 public:
  NoisyPolicy(std::unique_ptr<BiddingPolicy> inner, double sigma,
              std::uint64_t seed)
      : inner_(std::move(inner)), sigma_(sigma), seed_(seed) {}

  std::string name() const override { return inner_->name() + "+noise"; }
  void begin_episode(const AuctionEpisodeConfig& config) override;
  double act(const BidState& state, const CampaignLedger& ledger) override;
  void observe(const StepOutcome& outcome) override { inner_->observe(outcome); }

 private:
  std::unique_ptr<BiddingPolicy> inner_;
  double sigma_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

// Best multiplier of `grid` by mean score over `episodes` calibration
// episodes drawn from `config` (seeds derived from `seed`).
double tune_constant_lambda(const AuctionEpisodeConfig& config,
                            std::span<const double> grid, int episodes,
                            std::uint64_t seed, double beta = 2.0);

}  // namespace guide
