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

#include <optional>
#include <span>
#include <vector>

#include "guide/env/auction_env.hpp"
#include "guide/policy/selection.hpp"

namespace guide {

inline constexpr double kDefaultBeta = 2.0;

struct ScoreReport {
  double raw_value = 0.0;
  std::optional<double> realized_cpa;
  double penalty = 1.0;
  double score = 0.0;
  double beta = kDefaultBeta;
  double cpa_limit = 0.0;
};

// min((C / cpa)^beta, 1). An undefined CPA is penalty-free when nothing was
// spent and fully penalized (0) when money was spent for no value.
// Throws InvalidConstraint when C <= 0 or beta <= 0.
double compute_penalty(std::optional<double> cpa, double cpa_limit, double beta,
                       double spent = 0.0);

ScoreReport compute_score(const CampaignLedger& ledger, double cpa_limit,
                          double beta = kDefaultBeta);

struct PreferenceShare {
  int episode = 0;
  double dt = 0.0;
  double idm = 0.0;
  int steps = 0;
};

// Share of steps choosing each source, per log. Throws EmptyLog.
std::vector<PreferenceShare> preference_analysis(
    std::span<const SelectionLog> logs);

struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n - 1); 0 for a single sample
  double std = 0.0;
  std::size_t count = 0;
};

SampleStats sample_stats(std::span<const double> xs);

struct VolatilityReport {
  SampleStats dt;
  SampleStats idm;
};

// Pools the a_dt and a_idm streams of every log. Throws EmptyLog.
VolatilityReport volatility_analysis(std::span<const SelectionLog> logs);

// Throws ShapeMismatch on unequal lengths or fewer than two points and
// DegenerateSeries when either series is constant.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Spending pattern proportional to the traffic offered at each step.
std::vector<double> ideal_cost_trajectory(std::span<const double> offered_value,
                                          double total_spend);

double cost_trajectory_correlation(std::span<const double> cost_by_step,
                                   std::span<const double> ideal_by_step);

enum class Tier { kLow, kMedium, kHigh };

// Bottom 30% low, middle 40% medium, top 30% high (rank-based).
std::vector<Tier> classify_tiers(std::span<const double> values);

}  // namespace guide
