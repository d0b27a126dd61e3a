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

// Seedable multi-advertiser auction simulator.
//
// One controlled advertiser bids lambda_t * v_i on every impression of step t
// against a field of competitors. Each impression is a single-slot
// second-price auction in which the competitor wins ties. Spend is capped
// exactly at the budget: an impression whose clearing price does not fit in
// the remaining budget is forfeited.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "guide/env/bid_state.hpp"

namespace guide {

struct Impression {
  double value = 0.0;        // predicted conversion value v_i
  bool true_convert = false; // realized conversion draw (recorded only)
};

struct ValueDistribution {
  enum class Family { kLogNormal, kPointMass, kUniform };

  Family family = Family::kLogNormal;
  double a = 0.0;  // mu | point | low
  double b = 1.0;  // sigma | unused | high

  static ValueDistribution lognormal(double mu, double sigma) {
    return {Family::kLogNormal, mu, sigma};
  }
  static ValueDistribution point_mass(double v) {
    return {Family::kPointMass, v, 0.0};
  }
  static ValueDistribution uniform(double lo, double hi) {
    return {Family::kUniform, lo, hi};
  }

  double mean() const;
  double sample(std::mt19937_64& rng) const;
};

struct AuctionEpisodeConfig {
  double budget = 1200.0;     // B
  double cpa_limit = 1.0;    // C
  int steps = 48;            // T
  // Base impressions per step; the realized count follows a diurnal profile
  // 1 - amplitude * cos(2 pi t / T) scaled by a per-episode volume factor
  // drawn uniformly from [1 - volume_jitter, 1 + volume_jitter].
  int impressions_per_step = 200;
  double traffic_amplitude = 0.7;
  double volume_jitter = 0.25;
  ValueDistribution value_dist = ValueDistribution::lognormal(0.0, 1.0);
  double conversion_rate = 0.1;  // P(convert) = min(1, rate * v)

  // Competitor field: num_competitors bidders of which pid_competitors pace
  // a private budget; the rest bid a constant multiplier drawn per episode.
  int num_competitors = 4;
  int pid_competitors = 1;
  double competitor_lambda_low = 0.4;
  double competitor_lambda_high = 1.0;
  double competitor_value_noise = 1.0;  // lognormal sigma of private values
  double competitor_budget = 400.0;     // mean budget of a pacing competitor

  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Number of impressions arriving at `step` for this episode.
int impressions_at(const AuctionEpisodeConfig& config, int step);

// Deterministic for a fixed (config.seed, step).
std::vector<Impression> generate_impressions(const AuctionEpisodeConfig& config,
                                             int step);

struct AuctionResult {
  bool won = false;
  double cost = 0.0;
};

// Single-slot second price; ties go to the competitor.
AuctionResult run_auction(const Impression& impression, double agent_bid,
                          std::span<const double> competitor_bids);

// Bidders the controlled advertiser competes against.
class CompetitorField {
 public:
  virtual ~CompetitorField() = default;

  // Called once before the impressions of `step` are auctioned.
  virtual void begin_step(int step, std::size_t num_impressions) = 0;
  // Competitor bids on impression `index` of the current step. Must not
  // depend on the outcome of earlier auctions within the step.
  virtual std::span<const double> bids(std::size_t index,
                                       const Impression& impression) = 0;
  // Winner -1 means the controlled advertiser won or nobody bid.
  virtual void settle(int winner, double price) = 0;
};

// Prescribed bids per impression; used for hand-resolved scenarios.
class FixedCompetitorBids final : public CompetitorField {
 public:
  explicit FixedCompetitorBids(std::vector<std::vector<double>> per_impression)
      : bids_(std::move(per_impression)) {}

  void begin_step(int, std::size_t) override {}
  std::span<const double> bids(std::size_t index, const Impression&) override {
    return bids_.at(index);
  }
  void settle(int, double) override {}

 private:
  std::vector<std::vector<double>> bids_;
};

// Configured mix of constant-multiplier and budget-pacing competitors.
class MarketCompetitors final : public CompetitorField {
 public:
  explicit MarketCompetitors(const AuctionEpisodeConfig& config);

  void begin_step(int step, std::size_t num_impressions) override;
  std::span<const double> bids(std::size_t index,
                               const Impression& impression) override;
  void settle(int winner, double price) override;

  std::span<const double> lambdas() const { return lambdas_; }

 private:
  AuctionEpisodeConfig config_;
  std::vector<double> lambdas_;
  std::vector<double> budgets_;  // 0 for constant bidders
  std::vector<double> spent_;
  std::vector<double> noise_;    // num_impressions x num_competitors
  std::vector<double> scratch_;
  std::vector<bool> active_;
  int step_ = 0;
};

struct StepOutcome {
  int wins = 0;
  double value_won = 0.0;
  double cost = 0.0;
  int impressions_seen = 0;
};

struct CampaignLedger {
  double budget_total = 0.0;
  double spent = 0.0;
  double value_acquired = 0.0;
  std::vector<double> conversions_value_by_step;
  std::vector<double> cost_by_step;
  std::vector<int> wins_by_step;
  std::vector<int> impressions_by_step;
  std::vector<double> lambda_by_step;
  int step_index = 0;

  double budget_remaining() const { return budget_total - spent; }
  int total_wins() const;

  friend bool operator==(const CampaignLedger&, const CampaignLedger&) = default;
};

CampaignLedger make_ledger(const AuctionEpisodeConfig& config);

// Bids lambda_t * v_i on every impression and advances the ledger by a step.
StepOutcome step_episode(CampaignLedger& ledger, double lambda_t,
                         std::span<const Impression> impressions,
                         CompetitorField& competitors);

// spent / value_acquired; nullopt when no value was acquired.
std::optional<double> realized_cpa(const CampaignLedger& ledger);

BidState make_state(const CampaignLedger& ledger,
                    const AuctionEpisodeConfig& config);

// One closed-loop episode: owns the ledger, the competitor field and the
// impression stream.
class AuctionEpisode {
 public:
  explicit AuctionEpisode(AuctionEpisodeConfig config);

  const AuctionEpisodeConfig& config() const { return config_; }
  const CampaignLedger& ledger() const { return ledger_; }
  bool done() const { return ledger_.step_index >= config_.steps; }
  BidState state() const { return make_state(ledger_, config_); }
  // Traffic value offered at each completed step.
  const std::vector<double>& offered_value_by_step() const {
    return offered_value_;
  }

  StepOutcome step(double lambda_t);

 private:
  AuctionEpisodeConfig config_;
  CampaignLedger ledger_;
  MarketCompetitors competitors_;
  std::vector<double> offered_value_;
};

}  // namespace guide
