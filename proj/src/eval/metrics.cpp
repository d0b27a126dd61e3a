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

#include "guide/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "guide/common/errors.hpp"

namespace guide {

double compute_penalty(std::optional<double> cpa, double cpa_limit, double beta,
                       double spent) {
  if (!(cpa_limit > 0.0)) throw InvalidConstraint("CPA limit must be > 0");
  if (!(beta > 0.0)) throw InvalidConstraint("beta must be > 0");
  if (!cpa) return spent > 0.0 ? 0.0 : 1.0;
  if (*cpa <= cpa_limit) return 1.0;
  return std::min(std::pow(cpa_limit / *cpa, beta), 1.0);
}

ScoreReport compute_score(const CampaignLedger& ledger, double cpa_limit,
                          double beta) {
  ScoreReport r;
  r.raw_value = ledger.value_acquired;
  r.realized_cpa = realized_cpa(ledger);
  r.penalty = compute_penalty(r.realized_cpa, cpa_limit, beta, ledger.spent);
  r.score = r.penalty * r.raw_value;
  r.beta = beta;
  r.cpa_limit = cpa_limit;
  return r;
}

std::vector<PreferenceShare> preference_analysis(
    std::span<const SelectionLog> logs) {
  if (logs.empty()) throw EmptyLog("preference_analysis: no logs");
  std::vector<PreferenceShare> out;
  out.reserve(logs.size());
  for (std::size_t e = 0; e < logs.size(); ++e) {
    const auto& log = logs[e];
    if (log.empty()) throw EmptyLog("preference_analysis: empty log");
    const auto dt = std::count_if(log.begin(), log.end(), [](const auto& r) {
      return r.chosen == ActionSource::kDt;
    });
    const auto n = static_cast<double>(log.size());
    PreferenceShare share;
    share.episode = static_cast<int>(e);
    share.steps = static_cast<int>(log.size());
    share.dt = static_cast<double>(dt) / n;
    share.idm = static_cast<double>(static_cast<long>(log.size()) - dt) / n;
    out.push_back(share);
  }
  return out;
}

SampleStats sample_stats(std::span<const double> xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(xs.size() - 1);
  }
  s.std = std::sqrt(s.variance);
  return s;
}

VolatilityReport volatility_analysis(std::span<const SelectionLog> logs) {
  std::vector<double> dt, idm;
  for (const auto& log : logs) {
    for (const auto& r : log) {
      dt.push_back(r.a_dt);
      idm.push_back(r.a_idm);
    }
  }
  if (dt.empty()) throw EmptyLog("volatility_analysis: no records");
  return {sample_stats(dt), sample_stats(idm)};
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ShapeMismatch("pearson: need two equal-length series of length >= 2");
  }
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateSeries("pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> ideal_cost_trajectory(std::span<const double> offered_value,
                                          double total_spend) {
  const double total =
      std::accumulate(offered_value.begin(), offered_value.end(), 0.0);
  std::vector<double> ideal(offered_value.size(), 0.0);
  if (total <= 0.0) return ideal;
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    ideal[i] = offered_value[i] / total * total_spend;
  }
  return ideal;
}

double cost_trajectory_correlation(std::span<const double> cost_by_step,
                                   std::span<const double> ideal_by_step) {
  return pearson(cost_by_step, ideal_by_step);
}

std::vector<Tier> classify_tiers(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<Tier> tiers(n, Tier::kMedium);
  const auto low_count = static_cast<std::size_t>(std::floor(0.3 * n));
  const auto high_count = static_cast<std::size_t>(std::floor(0.3 * n));
  for (std::size_t r = 0; r < n; ++r) {
    if (r < low_count) {
      tiers[order[r]] = Tier::kLow;
    } else if (r >= n - high_count) {
      tiers[order[r]] = Tier::kHigh;
    }
  }
  return tiers;
}

}  // namespace guide
