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

// Two-stage optimization: a separate stage where the IDM reads a detached
// next-state prediction, then a joint stage where IDM gradients reach the
// sequence model and the actor is pushed toward high conservative Q. Twin
// critics learn from logged transitions throughout.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "guide/data/trajectory.hpp"
#include "guide/model/checkpoint.hpp"
#include "guide/model/networks.hpp"

namespace guide {

struct TrainConfig {
  int phase1_steps = 600;
  int phase2_steps = 600;
  int batch_size = 32;
  int critic_batch_size = 256;
  int critic_updates_per_step = 1;
  double lr_actor = 1e-4;
  double lr_critic = 3e-4;
  double gamma = 1.0;
  double tau_ema = 0.005;
  double q_reg_weight = 1.0;
  std::uint64_t seed = 0;
  double grad_clip = 1.0;

  // Objective switches; baselines and ablations turn parts off.
  bool action_loss = true;
  bool state_loss = true;
  bool idm_loss = true;
  bool train_critics = true;

  void validate() const;
};

enum class Phase { kSeparate, kJoint };
const char* to_string(Phase phase);

struct LossReport {
  double l_dt_action = 0.0;
  double l_dt_state = 0.0;
  double l_idm = 0.0;
  double l_q_reg = 0.0;
  double l_critic = 0.0;
  std::int64_t step = 0;
  Phase phase = Phase::kSeparate;
};

// Sequence-model batch. Targets are aligned with the k state positions:
// position j predicts actions[j] and the state at j + 1.
struct WindowBatch {
  WindowTensors inputs;
  torch::Tensor target_actions;  // [B, k]
  torch::Tensor next_states;     // [B, k, S], zero where absent
  torch::Tensor next_mask;       // [B, k] bool

  std::int64_t size() const { return inputs.rtg.size(0); }
  WindowBatch to(torch::Dtype dtype) const;
};

WindowBatch make_window_batch(std::span<const ContextWindow> windows,
                              torch::Dtype dtype = torch::kFloat32);

// Critic batch over logged transitions. States are normalized, rewards are
// divided by rtg_scale, and a_next / s_next are zero where done = 1.
struct TransitionBatch {
  torch::Tensor s_t;     // [B, S]
  torch::Tensor a_t;     // [B]
  torch::Tensor r_t;     // [B]
  torch::Tensor s_next;  // [B, S]
  torch::Tensor a_next;  // [B]
  torch::Tensor done;    // [B], 1.0 iff t = T - 1

  std::int64_t size() const { return s_t.size(0); }
  TransitionBatch to(torch::Dtype dtype) const;
};

// Every window and transition of a dataset, precomputed for fast sampling.
class SampleStore {
 public:
  SampleStore(std::span<const Trajectory> dataset, const NormStats& stats, int k);

  WindowBatch sample_windows(int batch, std::mt19937_64& rng) const;
  TransitionBatch sample_transitions(int batch, std::mt19937_64& rng) const;
  std::int64_t size() const { return count_; }

 private:
  std::int64_t count_ = 0;
  WindowBatch windows_;
  TransitionBatch transitions_;
};

// Conservative value min(Q1, Q2) at normalized states s [N, S] and raw
// multipliers a [N]. Replaceable so tests can plug in analytic critics.
using QEvaluator = std::function<torch::Tensor(const torch::Tensor& s,
                                               const torch::Tensor& a)>;

QEvaluator live_critics(GuideModel& model);

struct ActorLosses {
  torch::Tensor action;  // masked MSE of the action head
  torch::Tensor state;   // masked MSE of the next-state head, mean over dims
  torch::Tensor idm;     // MSE of the IDM on predicted next states
  torch::Tensor q_reg;   // -min Q(s, a_hat) / mean |min Q|
  torch::Tensor total;
};

// Phase kSeparate feeds the IDM a detached next-state prediction; phase
// kJoint lets its gradient reach the sequence model and adds the Q term.
// q_scale fixes the Q normalizer (otherwise the detached batch mean |Q|).
ActorLosses actor_losses(GuideModel& model, const WindowBatch& batch,
                         const TrainConfig& config, Phase phase,
                         const QEvaluator& q_eval,
                         std::optional<double> q_scale = std::nullopt);

// y = r + gamma (1 - d) min(Q1_target, Q2_target)(s', a'), no gradient.
torch::Tensor td_target(GuideModel& model, const TransitionBatch& batch,
                        double gamma);

// Sum of both critics' MSE to the TD target.
torch::Tensor critic_loss(GuideModel& model, const TransitionBatch& batch,
                          double gamma);

class Trainer {
 public:
  Trainer(GuideModel& model, TrainConfig config);

  // Regresses both critics on the TD target, then soft-updates the targets.
  LossReport critic_update(const TransitionBatch& batch);
  LossReport actor_update_phase1(const WindowBatch& batch);
  LossReport actor_update_phase2(const WindowBatch& batch);

  void set_q_evaluator(QEvaluator q_eval) { q_eval_ = std::move(q_eval); }
  const TrainConfig& config() const { return config_; }

 private:
  LossReport actor_update(const WindowBatch& batch, Phase phase);

  GuideModel& model_;
  TrainConfig config_;
  QEvaluator q_eval_;
  torch::optim::Adam actor_opt_;
  torch::optim::Adam critic_opt_;
};

struct TrainOptions {
  std::filesystem::path checkpoint_dir;  // empty: no periodic checkpoints
  int checkpoint_every = 0;
  std::string variant = "full";
};

struct TrainResult {
  GuideModel model;
  std::vector<LossReport> history;
};

// Runs the two-phase schedule. Step s draws its batches and dropout masks
// from seeds derived from (config.seed, s), so a resumed run picks up the
// same data stream at the same step number. Throws EmptyDataset and
// NonFiniteLoss; checkpoints written before a failure are kept.
TrainResult train(std::span<const Trajectory> dataset, const TrainConfig& config,
                  const ModelConfig& model_config, const TrainOptions& options = {});

// Continues a checkpoint from its stored step to the end of the schedule.
// Optimizer moments restart from zero.
TrainResult resume_training(std::span<const Trajectory> dataset,
                            const TrainConfig& config, LoadedModel start,
                            const TrainOptions& options = {});

struct BcTrainResult {
  BcModel model;
  std::vector<LossReport> history;
};

// Behavior cloning s -> a for phase1_steps + phase2_steps steps.
BcTrainResult train_bc(std::span<const Trajectory> dataset,
                       const TrainConfig& config, const ModelConfig& model_config);

void write_loss_csv(std::span<const LossReport> history,
                    const std::filesystem::path& path);

}  // namespace guide
