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

#include "guide/policy/guide_policy.hpp"

#include <algorithm>
#include <numeric>

#include "guide/common/errors.hpp"
#include "guide/common/seeding.hpp"

namespace guide {

PolicyState::PolicyState(int k, double initial_rtg)
    : context_k(k), rtg_remaining(std::max(0.0, initial_rtg)) {
  if (k < 1) throw ConfigError("context_k must be >= 1");
}

void PolicyState::record_step(const std::array<double, kStateDim>& normalized_state,
                              double emitted, double reward, double rtg_scale) {
  rtg.push_back(rtg_remaining / rtg_scale);
  states.push_back(normalized_state);
  actions.push_back(emitted);
  const auto keep = static_cast<std::size_t>(context_k - 1);
  while (rtg.size() > keep) {
    rtg.pop_front();
    states.pop_front();
    actions.pop_front();
  }
  rtg_remaining = std::max(0.0, rtg_remaining - reward);
  ++step;
}

ContextWindow query_window(const PolicyState& ps, const NormStats& stats,
                           const BidState& s_t) {
  const int k = ps.context_k;
  const int past = static_cast<int>(ps.rtg.size());
  const int pad = k - 1 - past;
  ContextWindow w;
  w.rtg.assign(k, 0.0);
  w.states.assign(k, {});
  w.actions.assign(k - 1, 0.0);
  w.timesteps.assign(k, 0);
  w.padding_mask.assign(k, false);
  for (int i = 0; i < past; ++i) {
    const int j = pad + i;
    w.rtg[j] = ps.rtg[i];
    w.states[j] = ps.states[i];
    w.actions[j] = ps.actions[i];
    w.timesteps[j] = ps.step - past + i;
    w.padding_mask[j] = true;
  }
  w.rtg[k - 1] = ps.rtg_remaining / stats.rtg_scale;
  w.states[k - 1] = stats.normalize(s_t).features;
  w.timesteps[k - 1] = ps.step;
  w.padding_mask[k - 1] = true;
  return w;
}

Proposal propose_actions(GuideModel& model, const PolicyState& ps,
                         const BidState& s_t) {
  if (ps.context_k != model.config.dt.context_k) {
    throw ShapeMismatch("policy context does not match the model");
  }
  const auto window = query_window(ps, model.stats, s_t);
  const auto out = dt_forward(model, window);
  Proposal p;
  p.a_dt = out.action_pred;
  p.s_next_pred = out.next_state_pred;
  p.a_idm = idm_forward(model, window.states.back(), p.s_next_pred);
  return p;
}

SelectionRecord select_action(const CriticFn& q1, const CriticFn& q2,
                              std::span<const double> s, double a_dt,
                              double a_idm, int step) {
  SelectionRecord r;
  r.step = step;
  r.a_dt = a_dt;
  r.a_idm = a_idm;
  r.q_dt = std::min(q1(s, a_dt), q2(s, a_dt));
  r.q_idm = std::min(q1(s, a_idm), q2(s, a_idm));
  r.chosen = r.q_dt >= r.q_idm ? ActionSource::kDt : ActionSource::kIdm;
  r.emitted = r.chosen == ActionSource::kDt ? a_dt : a_idm;
  return r;
}

SelectionRecord select_action(GuideModel& model, std::span<const double> s,
                              double a_dt, double a_idm, int step) {
  const CriticFn q1 = [&](std::span<const double> x, double a) {
    return q_forward(model.q1, model.stats, x, a);
  };
  const CriticFn q2 = [&](std::span<const double> x, double a) {
    return q_forward(model.q2, model.stats, x, a);
  };
  return select_action(q1, q2, s, a_dt, a_idm, step);
}

double smooth_action(PolicyState& ps, double raw, int window_len, double blend) {
  double emitted = raw;
  if (!ps.smoothing_window.empty()) {
    const double mean = std::accumulate(ps.smoothing_window.begin(),
                                        ps.smoothing_window.end(), 0.0) /
                        static_cast<double>(ps.smoothing_window.size());
    emitted = blend * raw + (1.0 - blend) * mean;
  }
  ps.smoothing_window.push_back(emitted);
  while (static_cast<int>(ps.smoothing_window.size()) > std::max(window_len, 0)) {
    ps.smoothing_window.pop_front();
  }
  return emitted;
}

// ---------------------------------------------------------------------------

GuidePolicy::GuidePolicy(GuideModel model, GuidePolicyOptions options)
    : model_(std::move(model)),
      options_(std::move(options)),
      state_(model_.config.dt.context_k, 0.0) {
  if (!(options_.rtg_multiplier >= 0.0)) {
    throw ConfigError("rtg_multiplier must be >= 0");
  }
  if (!(options_.blend >= 0.0 && options_.blend <= 1.0)) {
    throw ConfigError("smoothing blend must lie in [0, 1]");
  }
}

void GuidePolicy::begin_episode(const AuctionEpisodeConfig& config) {
  state_ = PolicyState(model_.config.dt.context_k,
                       options_.rtg_multiplier * model_.stats.rtg_scale);
  coin_.seed(derive_seed(options_.coin_seed, {config.seed}));
}

double GuidePolicy::act(const BidState& state, const CampaignLedger&) {
  const auto proposal = propose_actions(model_, state_, state);
  const auto z = model_.stats.normalize(state).features;
  auto record = select_action(model_, z, proposal.a_dt, proposal.a_idm, state_.step);
  switch (options_.mode) {
    case SelectionMode::kArgmaxQ:
      break;
    case SelectionMode::kDtOnly:
      record.chosen = ActionSource::kDt;
      break;
    case SelectionMode::kIdmOnly:
      record.chosen = ActionSource::kIdm;
      break;
    case SelectionMode::kCoin:
      record.chosen = std::bernoulli_distribution(0.5)(coin_) ? ActionSource::kDt
                                                              : ActionSource::kIdm;
      break;
  }
  const double raw = record.chosen == ActionSource::kDt ? record.a_dt : record.a_idm;
  record.emitted = options_.smoothing
                       ? smooth_action(state_, raw, options_.window_len, options_.blend)
                       : raw;
  state_.selection_log.push_back(record);
  pending_state_ = z;
  pending_action_ = record.emitted;
  return record.emitted;
}

void GuidePolicy::observe(const StepOutcome& outcome) {
  state_.record_step(pending_state_, pending_action_, outcome.value_won,
                     model_.stats.rtg_scale);
}

RolloutResult rollout(GuideModel& model, const AuctionEpisodeConfig& env,
                      const GuidePolicyOptions& options) {
  GuidePolicy policy(model, options);
  auto rec = run_episode(env, policy);
  RolloutResult r;
  r.score = compute_score(rec.ledger, env.cpa_limit);
  r.trajectory = std::move(rec.trajectory);
  r.selection_log = policy.selection_log();
  r.ledger = std::move(rec.ledger);
  r.offered_value_by_step = std::move(rec.offered_value_by_step);
  return r;
}

}  // namespace guide
