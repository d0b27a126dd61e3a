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

// The three learnable cores: a causal sequence model over (RTG, state,
// action) tokens with an action head and a next-state head, the inverse
// dynamics MLP, and twin critics with EMA target copies.
//
// All networks work in normalized state space (NormStats). Actions enter and
// leave the sequence model and the IDM as raw multipliers; the critics see
// them scaled by 1 / action_high.

#include <torch/torch.h>

#include <array>
#include <span>
#include <vector>

#include "guide/data/trajectory.hpp"

namespace guide {

struct DtConfig {
  int layers = 3;
  int heads = 4;
  int hidden_dim = 128;
  int context_k = 20;
  double dropout = 0.1;
  int max_timestep = 64;  // size of the absolute timestep embedding

  void validate() const;
};

struct ModelConfig {
  DtConfig dt;
  int mlp_hidden = 128;  // IDM and critic width
  int mlp_layers = 2;    // hidden layers of the IDM and critics

  void validate() const;

  // Transformer 6 x 8 heads x 512, MLP width 256.
  static ModelConfig production();
};

// Pre-LayerNorm transformer block with strictly causal self-attention.
class CausalBlockImpl : public torch::nn::Cloneable<CausalBlockImpl> {
 public:
  CausalBlockImpl(int hidden_dim, int heads, double dropout);

  void reset() override;
  // x: [B, L, H]; attn_bias: [B, 1, L, L] additive (0 or -inf).
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& attn_bias);

 private:
  int hidden_dim_;
  int heads_;
  double dropout_;
  torch::nn::LayerNorm ln1_{nullptr}, ln2_{nullptr};
  torch::nn::Linear qkv_{nullptr}, proj_{nullptr}, fc1_{nullptr}, fc2_{nullptr};
  torch::nn::Dropout drop_{nullptr};
};
TORCH_MODULE(CausalBlock);

// Predictions read at every state-token position of a window.
struct DtPredictions {
  torch::Tensor action;      // [B, k], >= 0 (softplus)
  torch::Tensor next_state;  // [B, k, S], normalized
};

// Tensor form of a batch of context windows.
struct WindowTensors {
  torch::Tensor rtg;        // [B, k]
  torch::Tensor states;     // [B, k, S]
  torch::Tensor actions;    // [B, k-1]
  torch::Tensor timesteps;  // [B, k] int64
  torch::Tensor mask;       // [B, k] bool, true = real
};

class DecisionTransformerImpl
    : public torch::nn::Cloneable<DecisionTransformerImpl> {
 public:
  explicit DecisionTransformerImpl(DtConfig config);

  void reset() override;
  DtPredictions forward(const WindowTensors& w);

  const DtConfig& config() const { return config_; }

 private:
  DtConfig config_;
  torch::nn::Linear embed_rtg_{nullptr}, embed_state_{nullptr},
      embed_action_{nullptr};
  torch::nn::Embedding embed_timestep_{nullptr};
  torch::nn::LayerNorm embed_ln_{nullptr}, final_ln_{nullptr};
  torch::nn::Dropout embed_drop_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
  torch::nn::Linear action_head_{nullptr}, state_head_{nullptr};
};
TORCH_MODULE(DecisionTransformer);

// Fully connected ReLU network with optional softplus output.
class MlpImpl : public torch::nn::Cloneable<MlpImpl> {
 public:
  MlpImpl(int in_dim, int hidden, int hidden_layers, bool softplus_output);

  void reset() override;
  torch::Tensor forward(torch::Tensor x);  // [..., in] -> [...]

 private:
  int in_dim_, hidden_, hidden_layers_;
  bool softplus_output_;
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(Mlp);

// Parameter bundle of the full model plus the statistics it was trained with.
struct GuideModel {
  ModelConfig config;
  NormStats stats;
  DecisionTransformer dt{nullptr};
  Mlp idm{nullptr};
  Mlp q1{nullptr}, q2{nullptr};
  Mlp q1_target{nullptr}, q2_target{nullptr};

  // Fresh parameters (drawn from the current torch seed); targets start as
  // exact copies of their critics.
  GuideModel(ModelConfig config, NormStats stats);

  GuideModel deep_copy() const;
  void train(bool on);
  void to(torch::Dtype dtype);

  std::vector<torch::Tensor> actor_parameters() const;   // dt + idm
  std::vector<torch::Tensor> critic_parameters() const;  // q1 + q2
  std::vector<torch::Tensor> dt_parameters() const;

 private:
  GuideModel() = default;
};

// Behavior-cloning baseline: normalized state -> multiplier, no return
// conditioning.
struct BcModel {
  ModelConfig config;
  NormStats stats;
  Mlp net{nullptr};

  BcModel(ModelConfig config, NormStats stats);
  double act(const BidState& raw_state);
};

// Batch-1 forward on a single window; prediction at the query position.
struct DtOutput {
  double action_pred = 0.0;
  std::array<double, kStateDim> next_state_pred{};
};

WindowTensors to_tensors(std::span<const ContextWindow> windows,
                         torch::Dtype dtype = torch::kFloat32);

// Throws ShapeMismatch when the window length differs from context_k.
DtOutput dt_forward(GuideModel& model, const ContextWindow& window);

// IDM action for normalized (s_t, s_next).
double idm_forward(GuideModel& model, std::span<const double> s_t,
                   std::span<const double> s_next);

// Critic value at normalized state s and raw multiplier a.
double q_forward(Mlp& critic, const NormStats& stats, std::span<const double> s,
                 double a);

// Critic input: [normalized state, a / action_high]. s: [B, S], a: [B].
torch::Tensor critic_input(const torch::Tensor& s, const torch::Tensor& a,
                           double action_high);
// IDM input: [s_t, s_next], both [B, S].
torch::Tensor idm_input(const torch::Tensor& s_t, const torch::Tensor& s_next);

// target <- (1 - tau) * target + tau * source, elementwise.
// Throws ShapeMismatch when the parameter lists do not mirror each other.
void ema_update(const torch::nn::Module& source, torch::nn::Module& target,
                double tau);

}  // namespace guide
