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
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>

#include "guide/eval/metrics.hpp"
#include "guide/model/networks.hpp"
#include "guide/policy/bidding_policy.hpp"
#include "guide/policy/selection.hpp"

namespace guide {

// Per-episode memory of the closed-loop policy.
struct PolicyState {
  int context_k = 1;
  std::deque<double> rtg;                               // normalized, past steps
  std::deque<std::array<double, kStateDim>> states;     // normalized, past steps
  std::deque<double> actions;                           // emitted, past steps
  int step = 0;
  double rtg_remaining = 0.0;
  std::deque<double> smoothing_window;
  SelectionLog selection_log;

  PolicyState(int k, double initial_rtg);

  // Appends the finished step and charges its reward against the target.
  void record_step(const std::array<double, kStateDim>& normalized_state,
                   double emitted, double reward, double rtg_scale);
};

// Left-padded window whose query position holds (rtg_remaining, s_t).
ContextWindow query_window(const PolicyState& ps, const NormStats& stats,
                           const BidState& s_t);

struct Proposal {
  double a_dt = 0.0;
  double a_idm = 0.0;
  std::array<double, kStateDim> s_next_pred{};  // normalized
};

// One sequence-model pass, then the IDM on (s_t, predicted s_{t+1}).
Proposal propose_actions(GuideModel& model, const PolicyState& ps,
                         const BidState& s_t);

// Q(s, a) at a normalized state and raw multiplier.
using CriticFn = std::function<double(std::span<const double> s, double a)>;

// Scores both candidates with min(Q1, Q2) and keeps the larger; DT on ties.
SelectionRecord select_action(const CriticFn& q1, const CriticFn& q2,
                              std::span<const double> s, double a_dt,
                              double a_idm, int step = 0);
// Same, with the model's live critics.
SelectionRecord select_action(GuideModel& model, std::span<const double> s,
                              double a_dt, double a_idm, int step = 0);

// blend * raw + (1 - blend) * mean(window) when the window holds anything,
// raw otherwise. The result enters the window, which keeps window_len items.
double smooth_action(PolicyState& ps, double raw, int window_len, double blend);

enum class SelectionMode { kArgmaxQ, kDtOnly, kIdmOnly, kCoin };

struct GuidePolicyOptions {
  SelectionMode mode = SelectionMode::kArgmaxQ;
  double rtg_multiplier = 1.0;  // initial target = multiplier * rtg_scale
  bool smoothing = false;
  int window_len = 4;
  double blend = 0.5;
  std::uint64_t coin_seed = 0;  // kCoin only
  std::string name = "guide";
};

class GuidePolicy : public BiddingPolicy {
 public:
  GuidePolicy(GuideModel model, GuidePolicyOptions options);

  std::string name() const override { return options_.name; }
  void begin_episode(const AuctionEpisodeConfig& config) override;
  double act(const BidState& state, const CampaignLedger& ledger) override;
  void observe(const StepOutcome& outcome) override;

  const SelectionLog& selection_log() const { return state_.selection_log; }

 private:
  GuideModel model_;
  GuidePolicyOptions options_;
  PolicyState state_;
  std::mt19937_64 coin_;
  std::array<double, kStateDim> pending_state_{};
  double pending_action_ = 0.0;
};

class BcPolicy : public BiddingPolicy {
 public:
  explicit BcPolicy(BcModel model) : model_(std::move(model)) {}

  std::string name() const override { return "bc"; }
  void begin_episode(const AuctionEpisodeConfig&) override {}
  double act(const BidState& state, const CampaignLedger&) override {
    return model_.act(state);
  }

 private:
  BcModel model_;
};

struct RolloutResult {
  Trajectory trajectory;
  SelectionLog selection_log;
  ScoreReport score;
  CampaignLedger ledger;
  std::vector<double> offered_value_by_step;
};

RolloutResult rollout(GuideModel& model, const AuctionEpisodeConfig& env,
                      const GuidePolicyOptions& options = {});

}  // namespace guide
