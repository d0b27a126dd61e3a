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

#include "guide/model/networks.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "guide/common/errors.hpp"

namespace guide {
namespace {

namespace F = torch::nn::functional;

// Restores the training flag of a module on scope exit.
class EvalScope {
 public:
  explicit EvalScope(torch::nn::Module& m) : m_(m), was_training_(m.is_training()) {
    m_.eval();
  }
  ~EvalScope() { m_.train(was_training_); }

 private:
  torch::nn::Module& m_;
  bool was_training_;
};

torch::Dtype param_dtype(const torch::nn::Module& m) {
  const auto params = m.parameters();
  return params.empty() ? torch::kFloat32
                        : params.front().scalar_type();
}

torch::Tensor vector_tensor(std::span<const double> v, torch::Dtype dtype) {
  return torch::tensor(std::vector<double>(v.begin(), v.end()),
                       torch::kFloat64)
      .to(dtype);
}

}  // namespace

void DtConfig::validate() const {
  if (layers < 1) throw ConfigError("dt.layers must be >= 1");
  if (heads < 1) throw ConfigError("dt.heads must be >= 1");
  if (hidden_dim < 1 || hidden_dim % heads != 0) {
    throw ConfigError("dt.hidden_dim must be a positive multiple of dt.heads");
  }
  if (context_k < 1) throw ConfigError("dt.context_k must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dt.dropout must lie in [0, 1)");
  }
  if (max_timestep < 1) throw ConfigError("dt.max_timestep must be >= 1");
}

void ModelConfig::validate() const {
  dt.validate();
  if (mlp_hidden < 1) throw ConfigError("model.mlp_hidden must be >= 1");
  if (mlp_layers < 1) throw ConfigError("model.mlp_layers must be >= 1");
}

ModelConfig ModelConfig::production() {
  ModelConfig c;
  c.dt.layers = 6;
  c.dt.heads = 8;
  c.dt.hidden_dim = 512;
  c.mlp_hidden = 256;
  return c;
}

// ---------------------------------------------------------------------------

CausalBlockImpl::CausalBlockImpl(int hidden_dim, int heads, double dropout)
    : hidden_dim_(hidden_dim), heads_(heads), dropout_(dropout) {
  reset();
}

void CausalBlockImpl::reset() {
  const std::int64_t h = hidden_dim_;
  ln1_ = register_module("ln1", torch::nn::LayerNorm(
                                    torch::nn::LayerNormOptions({h})));
  ln2_ = register_module("ln2", torch::nn::LayerNorm(
                                    torch::nn::LayerNormOptions({h})));
  qkv_ = register_module("qkv", torch::nn::Linear(h, 3 * h));
  proj_ = register_module("proj", torch::nn::Linear(h, h));
  fc1_ = register_module("fc1", torch::nn::Linear(h, 4 * h));
  fc2_ = register_module("fc2", torch::nn::Linear(4 * h, h));
  drop_ = register_module("drop", torch::nn::Dropout(dropout_));
}

torch::Tensor CausalBlockImpl::forward(const torch::Tensor& x,
                                       const torch::Tensor& attn_bias) {
  const auto batch = x.size(0);
  const auto len = x.size(1);
  const auto head_dim = hidden_dim_ / heads_;

  auto qkv = qkv_(ln1_(x)).view({batch, len, 3, heads_, head_dim});
  qkv = qkv.permute({2, 0, 3, 1, 4});  // [3, B, heads, L, dh]
  const auto q = qkv[0];
  const auto k = qkv[1];
  const auto v = qkv[2];

  auto scores = torch::matmul(q, k.transpose(-2, -1)) /
                std::sqrt(static_cast<double>(head_dim));
  scores = scores + attn_bias;
  auto weights = drop_(torch::softmax(scores, -1));
  auto attended = torch::matmul(weights, v)
                      .transpose(1, 2)
                      .contiguous()
                      .view({batch, len, hidden_dim_});
  auto h = x + drop_(proj_(attended));
  return h + drop_(fc2_(torch::gelu(fc1_(ln2_(h)))));
}

// ---------------------------------------------------------------------------

DecisionTransformerImpl::DecisionTransformerImpl(DtConfig config)
    : config_(config) {
  config_.validate();
  reset();
}

void DecisionTransformerImpl::reset() {
  const std::int64_t h = config_.hidden_dim;
  embed_rtg_ = register_module("embed_rtg", torch::nn::Linear(1, h));
  embed_state_ = register_module("embed_state", torch::nn::Linear(kStateDim, h));
  embed_action_ = register_module("embed_action", torch::nn::Linear(1, h));
  embed_timestep_ = register_module(
      "embed_timestep", torch::nn::Embedding(config_.max_timestep, h));
  embed_ln_ = register_module(
      "embed_ln", torch::nn::LayerNorm(torch::nn::LayerNormOptions({h})));
  embed_drop_ = register_module("embed_drop", torch::nn::Dropout(config_.dropout));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  for (int i = 0; i < config_.layers; ++i) {
    blocks_->push_back(CausalBlock(config_.hidden_dim, config_.heads, config_.dropout));
  }
  final_ln_ = register_module(
      "final_ln", torch::nn::LayerNorm(torch::nn::LayerNormOptions({h})));
  action_head_ = register_module("action_head", torch::nn::Linear(h, 1));
  state_head_ = register_module("state_head", torch::nn::Linear(h, kStateDim));
}

DtPredictions DecisionTransformerImpl::forward(const WindowTensors& w) {
  const auto batch = w.rtg.size(0);
  const auto k = w.rtg.size(1);
  if (k != config_.context_k || w.states.size(1) != k ||
      w.states.size(2) != kStateDim || w.actions.size(1) != k - 1 ||
      w.timesteps.size(1) != k || w.mask.size(1) != k) {
    throw ShapeMismatch("window does not match context_k = " +
                        std::to_string(config_.context_k));
  }
  const auto h = config_.hidden_dim;
  const auto len = 3 * k - 1;

  // The query step has no action token; a zero placeholder is dropped below.
  auto actions = torch::cat({w.actions, torch::zeros({batch, 1}, w.actions.options())}, 1);
  auto time = embed_timestep_(w.timesteps.clamp(0, config_.max_timestep - 1));
  auto r_tok = embed_rtg_(w.rtg.unsqueeze(-1)) + time;
  auto s_tok = embed_state_(w.states) + time;
  auto a_tok = embed_action_(actions.unsqueeze(-1)) + time;

  auto tokens = torch::stack({r_tok, s_tok, a_tok}, 2)
                    .reshape({batch, 3 * k, h})
                    .narrow(1, 0, len);
  auto real = w.mask.unsqueeze(-1).expand({batch, k, 3}).reshape({batch, 3 * k})
                  .narrow(1, 0, len);

  // Padded tokens are zeroed so their content can never leak, and every row
  // keeps at least its own key so padded rows stay finite.
  auto x = embed_drop_(embed_ln_(tokens)) * real.unsqueeze(-1).to(tokens.dtype());
  auto causal = torch::ones({len, len}, torch::kBool).tril();
  auto self = torch::eye(len, torch::kBool);
  auto allowed = causal.unsqueeze(0) & (real.unsqueeze(1) | self.unsqueeze(0));
  auto bias = torch::zeros({batch, 1, len, len}, tokens.options())
                  .masked_fill(~allowed.unsqueeze(1),
                               -std::numeric_limits<double>::infinity());

  for (const auto& block : *blocks_) {
    x = block->as<CausalBlock>()->forward(x, bias);
  }
  x = final_ln_(x);

  auto state_pos = torch::arange(k, torch::kLong) * 3 + 1;
  auto at_state = x.index_select(1, state_pos);  // [B, k, H]
  DtPredictions out;
  out.action = F::softplus(action_head_(at_state).squeeze(-1));
  out.next_state = state_head_(at_state);
  return out;
}

// ---------------------------------------------------------------------------

MlpImpl::MlpImpl(int in_dim, int hidden, int hidden_layers, bool softplus_output)
    : in_dim_(in_dim),
      hidden_(hidden),
      hidden_layers_(hidden_layers),
      softplus_output_(softplus_output) {
  reset();
}

void MlpImpl::reset() {
  net_ = torch::nn::Sequential();
  int width = in_dim_;
  for (int i = 0; i < hidden_layers_; ++i) {
    net_->push_back(torch::nn::Linear(width, hidden_));
    net_->push_back(torch::nn::ReLU());
    width = hidden_;
  }
  net_->push_back(torch::nn::Linear(width, 1));
  net_ = register_module("net", net_);
}

torch::Tensor MlpImpl::forward(torch::Tensor x) {
  if (x.size(-1) != in_dim_) {
    throw ShapeMismatch("MLP expects input width " + std::to_string(in_dim_));
  }
  auto y = net_->forward(x).squeeze(-1);
  return softplus_output_ ? F::softplus(y) : y;
}

// ---------------------------------------------------------------------------

GuideModel::GuideModel(ModelConfig cfg, NormStats norm)
    : config(cfg), stats(norm) {
  config.validate();
  dt = DecisionTransformer(config.dt);
  idm = Mlp(2 * kStateDim, config.mlp_hidden, config.mlp_layers, true);
  q1 = Mlp(kStateDim + 1, config.mlp_hidden, config.mlp_layers, false);
  q2 = Mlp(kStateDim + 1, config.mlp_hidden, config.mlp_layers, false);
  q1_target = Mlp(std::dynamic_pointer_cast<MlpImpl>(q1->clone()));
  q2_target = Mlp(std::dynamic_pointer_cast<MlpImpl>(q2->clone()));
}

GuideModel GuideModel::deep_copy() const {
  GuideModel m;
  m.config = config;
  m.stats = stats;
  m.dt = DecisionTransformer(
      std::dynamic_pointer_cast<DecisionTransformerImpl>(dt->clone()));
  m.idm = Mlp(std::dynamic_pointer_cast<MlpImpl>(idm->clone()));
  m.q1 = Mlp(std::dynamic_pointer_cast<MlpImpl>(q1->clone()));
  m.q2 = Mlp(std::dynamic_pointer_cast<MlpImpl>(q2->clone()));
  m.q1_target = Mlp(std::dynamic_pointer_cast<MlpImpl>(q1_target->clone()));
  m.q2_target = Mlp(std::dynamic_pointer_cast<MlpImpl>(q2_target->clone()));
  return m;
}

void GuideModel::train(bool on) {
  dt->train(on);
  idm->train(on);
  q1->train(on);
  q2->train(on);
  q1_target->train(on);
  q2_target->train(on);
}

void GuideModel::to(torch::Dtype dtype) {
  dt->to(dtype);
  idm->to(dtype);
  q1->to(dtype);
  q2->to(dtype);
  q1_target->to(dtype);
  q2_target->to(dtype);
}

std::vector<torch::Tensor> GuideModel::actor_parameters() const {
  auto p = dt->parameters();
  for (auto& t : idm->parameters()) p.push_back(t);
  return p;
}

std::vector<torch::Tensor> GuideModel::critic_parameters() const {
  auto p = q1->parameters();
  for (auto& t : q2->parameters()) p.push_back(t);
  return p;
}

std::vector<torch::Tensor> GuideModel::dt_parameters() const {
  return dt->parameters();
}

BcModel::BcModel(ModelConfig cfg, NormStats norm) : config(cfg), stats(norm) {
  config.validate();
  net = Mlp(kStateDim, config.mlp_hidden, config.mlp_layers, true);
}

double BcModel::act(const BidState& raw_state) {
  torch::NoGradGuard no_grad;
  EvalScope eval(*net);
  const auto z = stats.normalize(raw_state);
  return net->forward(vector_tensor(z.features, param_dtype(*net))).item<double>();
}

// ---------------------------------------------------------------------------

WindowTensors to_tensors(std::span<const ContextWindow> windows,
                         torch::Dtype dtype) {
  if (windows.empty()) throw ShapeMismatch("to_tensors: no windows");
  const auto k = static_cast<std::int64_t>(windows.front().context());
  const auto batch = static_cast<std::int64_t>(windows.size());
  std::vector<double> rtg, states, actions;
  std::vector<std::int64_t> timesteps;
  std::vector<std::uint8_t> mask;
  rtg.reserve(batch * k);
  states.reserve(batch * k * kStateDim);
  actions.reserve(batch * (k - 1));
  for (const auto& w : windows) {
    if (static_cast<std::int64_t>(w.rtg.size()) != k ||
        static_cast<std::int64_t>(w.states.size()) != k ||
        static_cast<std::int64_t>(w.actions.size()) != k - 1 ||
        static_cast<std::int64_t>(w.timesteps.size()) != k ||
        static_cast<std::int64_t>(w.padding_mask.size()) != k) {
      throw ShapeMismatch("to_tensors: inconsistent window lengths");
    }
    rtg.insert(rtg.end(), w.rtg.begin(), w.rtg.end());
    for (const auto& s : w.states) states.insert(states.end(), s.begin(), s.end());
    actions.insert(actions.end(), w.actions.begin(), w.actions.end());
    timesteps.insert(timesteps.end(), w.timesteps.begin(), w.timesteps.end());
    for (bool m : w.padding_mask) mask.push_back(m ? 1 : 0);
  }
  const auto f64 = torch::TensorOptions().dtype(torch::kFloat64);
  WindowTensors t;
  t.rtg = torch::from_blob(rtg.data(), {batch, k}, f64).to(dtype, false, true);
  t.states = torch::from_blob(states.data(), {batch, k, kStateDim}, f64).to(dtype, false, true);
  t.actions = torch::from_blob(actions.data(), {batch, k - 1}, f64).to(dtype, false, true);
  t.timesteps = torch::from_blob(timesteps.data(), {batch, k}, torch::kInt64).clone();
  t.mask = torch::from_blob(mask.data(), {batch, k}, torch::kUInt8).to(torch::kBool);
  return t;
}

DtOutput dt_forward(GuideModel& model, const ContextWindow& window) {
  if (static_cast<int>(window.context()) != model.config.dt.context_k) {
    throw ShapeMismatch("dt_forward: window length " +
                        std::to_string(window.context()) + " != context_k " +
                        std::to_string(model.config.dt.context_k));
  }
  torch::NoGradGuard no_grad;
  EvalScope eval(*model.dt);
  const auto pred =
      model.dt->forward(to_tensors(std::span(&window, 1), param_dtype(*model.dt)));
  const auto last = model.config.dt.context_k - 1;
  DtOutput out;
  out.action_pred = pred.action[0][last].item<double>();
  auto ns = pred.next_state[0][last].to(torch::kFloat64).contiguous();
  std::copy_n(ns.data_ptr<double>(), kStateDim, out.next_state_pred.begin());
  return out;
}

torch::Tensor critic_input(const torch::Tensor& s, const torch::Tensor& a,
                           double action_high) {
  return torch::cat({s, (a / action_high).unsqueeze(-1)}, -1);
}

torch::Tensor idm_input(const torch::Tensor& s_t, const torch::Tensor& s_next) {
  return torch::cat({s_t, s_next}, -1);
}

double idm_forward(GuideModel& model, std::span<const double> s_t,
                   std::span<const double> s_next) {
  if (s_t.size() != kStateDim || s_next.size() != kStateDim) {
    throw ShapeMismatch("idm_forward: both states need " +
                        std::to_string(kStateDim) + " features");
  }
  torch::NoGradGuard no_grad;
  EvalScope eval(*model.idm);
  const auto dtype = param_dtype(*model.idm);
  return model.idm
      ->forward(idm_input(vector_tensor(s_t, dtype), vector_tensor(s_next, dtype)))
      .item<double>();
}

double q_forward(Mlp& critic, const NormStats& stats, std::span<const double> s,
                 double a) {
  if (s.size() != kStateDim) {
    throw ShapeMismatch("q_forward: state needs " + std::to_string(kStateDim) +
                        " features");
  }
  torch::NoGradGuard no_grad;
  EvalScope eval(*critic);
  const auto dtype = param_dtype(*critic);
  const auto action = torch::tensor(a, torch::kFloat64).to(dtype);
  return critic->forward(critic_input(vector_tensor(s, dtype), action,
                                      stats.action_high))
      .item<double>();
}

void ema_update(const torch::nn::Module& source, torch::nn::Module& target,
                double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  const auto src = source.parameters();
  auto dst = target.parameters();
  if (src.size() != dst.size()) {
    throw ShapeMismatch("ema_update: parameter counts differ");
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!src[i].sizes().equals(dst[i].sizes())) {
      throw ShapeMismatch("ema_update: parameter " + std::to_string(i) +
                          " shapes differ");
    }
  }
  torch::NoGradGuard no_grad;
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i].mul_(1.0 - tau).add_(src[i], tau);
  }
}

}  // namespace guide
