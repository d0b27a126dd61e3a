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

#include "guide/env/auction_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "guide/common/errors.hpp"
#include "guide/common/seeding.hpp"

namespace guide {
namespace {

constexpr std::uint64_t kImpressionTag = 0;
constexpr std::uint64_t kCompetitorNoiseTag = 1;
constexpr std::uint64_t kVolumeTag = 0x766f6c;
constexpr std::uint64_t kCompetitorSetupTag = 0x636f6d70;

// Multiplicative gain of the pacing competitors per step of spend error.
constexpr double kCompetitorPacingGain = 0.15;

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(std::string(field) + ": " + what);
}

double volume_factor(const AuctionEpisodeConfig& config) {
  if (config.volume_jitter == 0.0) return 1.0;
  std::mt19937_64 rng(derive_seed(config.seed, {kVolumeTag}));
  std::uniform_real_distribution<double> u(1.0 - config.volume_jitter,
                                           1.0 + config.volume_jitter);
  return u(rng);
}

}  // namespace

double ValueDistribution::mean() const {
  switch (family) {
    case Family::kLogNormal:
      return std::exp(a + 0.5 * b * b);
    case Family::kPointMass:
      return a;
    case Family::kUniform:
      return 0.5 * (a + b);
  }
  return 0.0;
}

double ValueDistribution::sample(std::mt19937_64& rng) const {
  switch (family) {
    case Family::kLogNormal:
      return std::lognormal_distribution<double>(a, b)(rng);
    case Family::kPointMass:
      return a;
    case Family::kUniform:
      return std::uniform_real_distribution<double>(a, b)(rng);
  }
  return 0.0;
}

void AuctionEpisodeConfig::validate() const {
  require(std::isfinite(budget) && budget > 0.0, "budget", "must be > 0");
  require(std::isfinite(cpa_limit) && cpa_limit > 0.0, "cpa_limit",
          "must be > 0");
  require(steps >= 1, "steps", "must be >= 1");
  require(impressions_per_step >= 1, "impressions_per_step", "must be >= 1");
  require(traffic_amplitude >= 0.0 && traffic_amplitude < 1.0,
          "traffic_amplitude", "must lie in [0, 1)");
  require(volume_jitter >= 0.0 && volume_jitter < 1.0, "volume_jitter",
          "must lie in [0, 1)");
  require(conversion_rate >= 0.0, "conversion_rate", "must be >= 0");
  require(num_competitors >= 1, "num_competitors", "must be >= 1");
  require(pid_competitors >= 0 && pid_competitors <= num_competitors,
          "pid_competitors", "must lie in [0, num_competitors]");
  require(competitor_lambda_low >= 0.0 &&
              competitor_lambda_high >= competitor_lambda_low,
          "competitor_lambda_high", "must be >= competitor_lambda_low >= 0");
  require(competitor_value_noise >= 0.0, "competitor_value_noise",
          "must be >= 0");
  require(competitor_budget > 0.0, "competitor_budget", "must be > 0");
  switch (value_dist.family) {
    case ValueDistribution::Family::kLogNormal:
      require(value_dist.b >= 0.0, "value_dist", "sigma must be >= 0");
      break;
    case ValueDistribution::Family::kPointMass:
      require(value_dist.a >= 0.0, "value_dist", "point must be >= 0");
      break;
    case ValueDistribution::Family::kUniform:
      require(value_dist.a >= 0.0 && value_dist.b >= value_dist.a,
              "value_dist", "need 0 <= low <= high");
      break;
  }
}

int impressions_at(const AuctionEpisodeConfig& config, int step) {
  const double phase = 2.0 * std::numbers::pi * step / config.steps;
  const double shape = 1.0 - config.traffic_amplitude * std::cos(phase);
  const double n = config.impressions_per_step * volume_factor(config) * shape;
  return std::max(1, static_cast<int>(std::lround(n)));
}

std::vector<Impression> generate_impressions(const AuctionEpisodeConfig& config,
                                             int step) {
  std::mt19937_64 rng(
      derive_seed(config.seed, {kImpressionTag, static_cast<std::uint64_t>(step)}));
  const int n = impressions_at(config, step);
  std::vector<Impression> out(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& imp : out) {
    imp.value = config.value_dist.sample(rng);
    imp.true_convert =
        unit(rng) < std::min(1.0, config.conversion_rate * imp.value);
  }
  return out;
}

AuctionResult run_auction(const Impression&, double agent_bid,
                          std::span<const double> competitor_bids) {
  double top = 0.0;
  for (double b : competitor_bids) top = std::max(top, b);
  if (agent_bid > top) return {true, top};
  return {false, 0.0};
}

MarketCompetitors::MarketCompetitors(const AuctionEpisodeConfig& config)
    : config_(config) {
  const auto n = static_cast<std::size_t>(config.num_competitors);
  lambdas_.resize(n);
  budgets_.assign(n, 0.0);
  spent_.assign(n, 0.0);
  scratch_.resize(n);
  active_.assign(n, true);
  std::mt19937_64 rng(derive_seed(config.seed, {kCompetitorSetupTag}));
  std::uniform_real_distribution<double> lam(config.competitor_lambda_low,
                                             config.competitor_lambda_high);
  std::uniform_real_distribution<double> budget(0.7, 1.3);
  for (std::size_t j = 0; j < n; ++j) {
    lambdas_[j] = lam(rng);
    // The pacing bidders occupy the tail of the field.
    if (j >= n - static_cast<std::size_t>(config.pid_competitors)) {
      budgets_[j] = config.competitor_budget * budget(rng);
    }
  }
}

void MarketCompetitors::begin_step(int step, std::size_t num_impressions) {
  step_ = step;
  const std::size_t n = lambdas_.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (budgets_[j] <= 0.0 || step == 0) continue;
    const double per_step = budgets_[j] / config_.steps;
    const double planned = budgets_[j] * step / config_.steps;
    const double error = std::clamp((planned - spent_[j]) / per_step, -3.0, 3.0);
    lambdas_[j] = std::clamp(lambdas_[j] * std::exp(kCompetitorPacingGain * error),
                             0.05, 4.0);
  }
  // Pacing bidders drop out for a whole step once their budget is gone, so
  // bids never depend on auctions resolved earlier in the same step.
  for (std::size_t j = 0; j < n; ++j) {
    active_[j] = budgets_[j] <= 0.0 || spent_[j] < budgets_[j];
  }
  std::mt19937_64 rng(derive_seed(
      config_.seed, {kCompetitorNoiseTag, static_cast<std::uint64_t>(step)}));
  std::lognormal_distribution<double> noise(0.0, config_.competitor_value_noise);
  noise_.resize(num_impressions * n);
  for (double& x : noise_) x = noise(rng);
}

std::span<const double> MarketCompetitors::bids(std::size_t index,
                                                const Impression& impression) {
  const std::size_t n = lambdas_.size();
  for (std::size_t j = 0; j < n; ++j) {
    scratch_[j] = active_[j] ? lambdas_[j] * impression.value * noise_[index * n + j]
                             : 0.0;
  }
  return scratch_;
}

void MarketCompetitors::settle(int winner, double price) {
  if (winner < 0) return;
  spent_[static_cast<std::size_t>(winner)] += price;
}

int CampaignLedger::total_wins() const {
  return std::accumulate(wins_by_step.begin(), wins_by_step.end(), 0);
}

CampaignLedger make_ledger(const AuctionEpisodeConfig& config) {
  CampaignLedger ledger;
  ledger.budget_total = config.budget;
  return ledger;
}

StepOutcome step_episode(CampaignLedger& ledger, double lambda_t,
                         std::span<const Impression> impressions,
                         CompetitorField& competitors) {
  if (!(lambda_t >= 0.0) || !std::isfinite(lambda_t)) {
    throw Error("step_episode: lambda must be finite and >= 0");
  }
  competitors.begin_step(ledger.step_index, impressions.size());

  StepOutcome out;
  out.impressions_seen = static_cast<int>(impressions.size());
  for (std::size_t i = 0; i < impressions.size(); ++i) {
    const Impression& imp = impressions[i];
    const std::span<const double> bids = competitors.bids(i, imp);
    const double agent_bid = lambda_t * imp.value;
    const AuctionResult result = run_auction(imp, agent_bid, bids);

    // Spend stays <= B exactly: the candidate total is computed with the
    // same association order that later produces ledger.spent.
    bool agent_takes = false;
    if (result.won) {
      const double candidate = ledger.spent + (out.cost + result.cost);
      agent_takes = candidate <= ledger.budget_total;
    }
    if (agent_takes) {
      out.wins += 1;
      out.cost += result.cost;
      out.value_won += imp.value;
      competitors.settle(-1, result.cost);
      continue;
    }

    // A competitor takes the slot (or the agent forfeited it).
    int top = -1;
    double top_bid = 0.0;
    double second = result.won ? 0.0 : agent_bid;
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (bids[j] > top_bid) {
        second = std::max(second, top_bid);
        top_bid = bids[j];
        top = static_cast<int>(j);
      } else {
        second = std::max(second, bids[j]);
      }
    }
    competitors.settle(top, top >= 0 ? second : 0.0);
  }

  ledger.spent = ledger.spent + out.cost;
  ledger.value_acquired = ledger.value_acquired + out.value_won;
  ledger.cost_by_step.push_back(out.cost);
  ledger.conversions_value_by_step.push_back(out.value_won);
  ledger.wins_by_step.push_back(out.wins);
  ledger.impressions_by_step.push_back(out.impressions_seen);
  ledger.lambda_by_step.push_back(lambda_t);
  ledger.step_index += 1;
  return out;
}

std::optional<double> realized_cpa(const CampaignLedger& ledger) {
  if (ledger.value_acquired == 0.0) return std::nullopt;
  return ledger.spent / ledger.value_acquired;
}

BidState make_state(const CampaignLedger& ledger,
                    const AuctionEpisodeConfig& config) {
  BidState s;
  const int t = ledger.step_index;
  const double B = ledger.budget_total;
  s[kTimeRemainingFrac] =
      std::clamp(static_cast<double>(config.steps - t) / config.steps, 0.0, 1.0);
  s[kBudgetRemainingFrac] = std::clamp((B - ledger.spent) / B, 0.0, 1.0);
  s[kSpendPace] =
      t > 0 ? (ledger.spent / B) / (static_cast<double>(t) / config.steps) : 0.0;
  if (const auto cpa = realized_cpa(ledger)) {
    s[kCpaRatio] = std::clamp(*cpa / config.cpa_limit, 0.0, 5.0);
  }
  s[kLastLambda] = t > 0 ? ledger.lambda_by_step[t - 1] : 0.0;

  // Step k counted back from the most recent one; zero before the episode.
  const auto win_rate = [&](int back) {
    const int i = t - 1 - back;
    if (i < 0 || ledger.impressions_by_step[i] == 0) return 0.0;
    return static_cast<double>(ledger.wins_by_step[i]) /
           ledger.impressions_by_step[i];
  };
  const auto cost = [&](int back) {
    const int i = t - 1 - back;
    return i < 0 ? 0.0 : ledger.cost_by_step[i] / B;
  };
  const auto value = [&](int back) {
    const int i = t - 1 - back;
    return i < 0 ? 0.0 : ledger.conversions_value_by_step[i] / B;
  };
  const auto fill = [&](std::size_t base, const auto& stat) {
    s[base] = stat(0);
    s[base + 1] = (stat(0) + stat(1) + stat(2)) / 3.0;
    s[base + 2] = stat(0) - stat(3);
  };
  fill(kWinRateLast, win_rate);
  fill(kCostLast, cost);
  fill(kValueLast, value);

  s[kLogTotalWins] = std::log1p(static_cast<double>(ledger.total_wins()));
  s[kLogTotalValue] = std::log1p(ledger.value_acquired);
  return s;
}

AuctionEpisode::AuctionEpisode(AuctionEpisodeConfig config)
    : config_((config.validate(), config)),
      ledger_(make_ledger(config_)),
      competitors_(config_) {}

StepOutcome AuctionEpisode::step(double lambda_t) {
  if (done()) throw IndexOutOfRange("AuctionEpisode::step: episode finished");
  const auto impressions = generate_impressions(config_, ledger_.step_index);
  double offered = 0.0;
  for (const auto& imp : impressions) offered += imp.value;
  offered_value_.push_back(offered);
  return step_episode(ledger_, lambda_t, impressions, competitors_);
}

}  // namespace guide
