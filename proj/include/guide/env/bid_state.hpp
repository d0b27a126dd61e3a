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

#include <array>
#include <cstddef>
#include <span>

namespace guide {

inline constexpr std::size_t kStateDim = 16;

// Position of each feature inside BidState::features.
//
// The three per-step statistics (win rate, cost / B, value / B) each
// contribute the last observed step, the mean over the last three steps, and
// the change over three steps (last minus the value three steps earlier).
// Steps before the episode start count as zero.
enum Feature : std::size_t {
  kTimeRemainingFrac = 0,
  kBudgetRemainingFrac,
  kSpendPace,       // (spent / B) / (elapsed / T); 0 at the first step
  kCpaRatio,        // realized CPA / C clipped to [0, 5]; 0 when undefined
  kLastLambda,
  kWinRateLast,
  kWinRateMean3,
  kWinRateDelta3,
  kCostLast,
  kCostMean3,
  kCostDelta3,
  kValueLast,
  kValueMean3,
  kValueDelta3,
  kLogTotalWins,    // log1p(total wins)
  kLogTotalValue,   // log1p(total value)
  kFeatureCount
};
static_assert(kFeatureCount == kStateDim);

struct BidState {
  std::array<double, kStateDim> features{};

  double operator[](std::size_t i) const { return features[i]; }
  double& operator[](std::size_t i) { return features[i]; }
  std::span<const double> view() const { return features; }

  friend bool operator==(const BidState&, const BidState&) = default;
};

}  // namespace guide
