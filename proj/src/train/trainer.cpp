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

#include "guide/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "guide/common/binary_io.hpp"
#include "guide/common/errors.hpp"
#include "guide/common/seeding.hpp"

namespace guide {
namespace {

constexpr double kQScaleEps = 1e-6;

// Turns off gradient tracking for a parameter set for the lifetime of the
// guard, so reading the critics inside the actor step leaves them untouched.
class FrozenParams {
 public:
  explicit FrozenParams(std::vector<torch::Tensor> params)
      : params_(std::move(params)) {
    for (auto& p : params_) p.requires_grad_(false);
  }
  ~FrozenParams() {
    for (auto& p : params_) p.requires_grad_(true);
  }

 private:
  std::vector<torch::Tensor> params_;
};

void check_finite(double value, const char* what, Phase phase) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " became non-finite (" << value << ") in phase "
        << to_string(phase);
    throw NonFiniteLoss(msg.str());
  }
}

torch::Tensor masked_mean(const torch::Tensor& values, const torch::Tensor& mask) {
  const auto m = mask.to(values.dtype());
  return (values * m).sum() / m.sum().clamp_min(1.0);
}

std::vector<torch::Tensor> index_rows(std::int64_t count, int batch,
                                      std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> pick(0, count - 1);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(batch));
  for (auto& i : idx) i = pick(rng);
  return {torch::tensor(idx, torch::kInt64)};
}

TrainResult run_schedule(std::span<const Trajectory> dataset,
                         const TrainConfig& config, GuideModel model,
                         std::int64_t start_step, const TrainOptions& options) {
  config.validate();
  if (dataset.empty()) throw EmptyDataset("train: dataset is empty");

  const SampleStore store(dataset, model.stats, model.config.dt.context_k);
  Trainer trainer(model, config);
  const std::int64_t total = config.phase1_steps + config.phase2_steps;

  TrainResult result{model, {}};
  for (std::int64_t s = start_step; s < total; ++s) {
    const Phase phase = s < config.phase1_steps ? Phase::kSeparate : Phase::kJoint;
    std::mt19937_64 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(s)}));
    torch::manual_seed(derive_seed(config.seed, {static_cast<std::uint64_t>(s), 1}));

    LossReport report;
    LossReport actor;
    try {
      if (config.train_critics) {
        for (int c = 0; c < config.critic_updates_per_step; ++c) {
          report.l_critic =
              trainer
                  .critic_update(store.sample_transitions(config.critic_batch_size, rng))
                  .l_critic;
        }
      }
      const auto windows = store.sample_windows(config.batch_size, rng);
      actor = phase == Phase::kSeparate ? trainer.actor_update_phase1(windows)
                                        : trainer.actor_update_phase2(windows);
    } catch (const NonFiniteLoss& e) {
      throw NonFiniteLoss(std::string(e.what()) + " at step " + std::to_string(s));
    }
    report.l_dt_action = actor.l_dt_action;
    report.l_dt_state = actor.l_dt_state;
    report.l_idm = actor.l_idm;
    report.l_q_reg = actor.l_q_reg;
    report.step = s;
    report.phase = phase;
    result.history.push_back(report);

    if (options.checkpoint_every > 0 && !options.checkpoint_dir.empty() &&
        (s + 1) % options.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06lld.ckpt",
                    static_cast<long long>(s + 1));
      save_checkpoint(model, {s + 1, options.variant}, options.checkpoint_dir / name);
    }
  }
  model.train(false);
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (phase1_steps < 0) throw ConfigError("train.phase1_steps must be >= 0");
  if (phase2_steps < 0) throw ConfigError("train.phase2_steps must be >= 0");
  if (phase1_steps == 0 && phase2_steps == 0) {
    throw ConfigError("train.phase1_steps and train.phase2_steps are both 0");
  }
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (critic_batch_size < 1) throw ConfigError("train.critic_batch_size must be >= 1");
  if (critic_updates_per_step < 1) {
    throw ConfigError("train.critic_updates_per_step must be >= 1");
  }
  if (!(lr_actor > 0.0)) throw ConfigError("train.lr_actor must be > 0");
  if (!(lr_critic > 0.0)) throw ConfigError("train.lr_critic must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("train.gamma must lie in [0, 1]");
  if (!(tau_ema > 0.0 && tau_ema <= 1.0)) {
    throw ConfigError("train.tau_ema must lie in (0, 1]");
  }
  if (!(q_reg_weight >= 0.0)) throw ConfigError("train.q_reg_weight must be >= 0");
  if (!(grad_clip > 0.0)) throw ConfigError("train.grad_clip must be > 0");
}

const char* to_string(Phase phase) {
  return phase == Phase::kSeparate ? "separate" : "joint";
}

// ---------------------------------------------------------------------------

WindowBatch WindowBatch::to(torch::Dtype dtype) const {
  WindowBatch b = *this;
  b.inputs.rtg = inputs.rtg.to(dtype);
  b.inputs.states = inputs.states.to(dtype);
  b.inputs.actions = inputs.actions.to(dtype);
  b.target_actions = target_actions.to(dtype);
  b.next_states = next_states.to(dtype);
  return b;
}

TransitionBatch TransitionBatch::to(torch::Dtype dtype) const {
  return {s_t.to(dtype),    a_t.to(dtype),    r_t.to(dtype),
          s_next.to(dtype), a_next.to(dtype), done.to(dtype)};
}

WindowBatch make_window_batch(std::span<const ContextWindow> windows,
                              torch::Dtype dtype) {
  WindowBatch b;
  b.inputs = to_tensors(windows, dtype);
  const auto batch = b.inputs.rtg.size(0);
  const auto k = b.inputs.rtg.size(1);
  std::vector<double> targets, next;
  std::vector<std::uint8_t> next_mask;
  targets.reserve(batch * k);
  next.reserve(batch * k * kStateDim);
  for (const auto& w : windows) {
    for (std::int64_t j = 0; j < k; ++j) {
      const bool last = j == k - 1;
      targets.push_back(last ? w.target_action : w.actions[j]);
      const std::array<double, kStateDim>* ns = nullptr;
      if (!last && w.padding_mask[j]) ns = &w.states[j + 1];
      if (last && w.target_next_state) ns = &*w.target_next_state;
      if (ns) {
        next.insert(next.end(), ns->begin(), ns->end());
      } else {
        next.insert(next.end(), kStateDim, 0.0);
      }
      next_mask.push_back(ns ? 1 : 0);
    }
  }
  const auto f64 = torch::TensorOptions().dtype(torch::kFloat64);
  b.target_actions = torch::from_blob(targets.data(), {batch, k}, f64).to(dtype, false, true);
  b.next_states =
      torch::from_blob(next.data(), {batch, k, kStateDim}, f64).to(dtype, false, true);
  b.next_mask =
      torch::from_blob(next_mask.data(), {batch, k}, torch::kUInt8).to(torch::kBool);
  return b;
}

SampleStore::SampleStore(std::span<const Trajectory> dataset,
                         const NormStats& stats, int k) {
  if (dataset.empty()) throw EmptyDataset("SampleStore: dataset is empty");
  std::vector<WindowBatch> chunks;
  std::vector<double> s, a, r, sn, an, d;
  for (const auto& traj : dataset) {
    const int len = static_cast<int>(traj.length());
    std::vector<ContextWindow> windows;
    windows.reserve(len);
    for (int t = 0; t < len; ++t) {
      windows.push_back(slice_window(traj, t, k, stats));
      const auto z = stats.normalize(traj.states[t]);
      s.insert(s.end(), z.features.begin(), z.features.end());
      a.push_back(traj.actions[t]);
      r.push_back(traj.rewards[t] / stats.rtg_scale);
      const bool terminal = t == len - 1;
      if (terminal) {
        sn.insert(sn.end(), kStateDim, 0.0);
        an.push_back(0.0);
      } else {
        const auto zn = stats.normalize(traj.states[t + 1]);
        sn.insert(sn.end(), zn.features.begin(), zn.features.end());
        an.push_back(traj.actions[t + 1]);
      }
      d.push_back(terminal ? 1.0 : 0.0);
    }
    if (!windows.empty()) chunks.push_back(make_window_batch(windows));
  }
  count_ = static_cast<std::int64_t>(a.size());
  if (count_ == 0) throw EmptyDataset("SampleStore: dataset has no steps");

  auto cat = [&](auto field) {
    std::vector<torch::Tensor> parts;
    for (const auto& c : chunks) parts.push_back(field(c));
    return torch::cat(parts, 0);
  };
  windows_.inputs.rtg = cat([](const WindowBatch& c) { return c.inputs.rtg; });
  windows_.inputs.states = cat([](const WindowBatch& c) { return c.inputs.states; });
  windows_.inputs.actions = cat([](const WindowBatch& c) { return c.inputs.actions; });
  windows_.inputs.timesteps = cat([](const WindowBatch& c) { return c.inputs.timesteps; });
  windows_.inputs.mask = cat([](const WindowBatch& c) { return c.inputs.mask; });
  windows_.target_actions = cat([](const WindowBatch& c) { return c.target_actions; });
  windows_.next_states = cat([](const WindowBatch& c) { return c.next_states; });
  windows_.next_mask = cat([](const WindowBatch& c) { return c.next_mask; });

  const auto n = count_;
  auto as_tensor = [](std::vector<double>& v, std::vector<std::int64_t> shape) {
    return torch::from_blob(v.data(), shape, torch::kFloat64).to(torch::kFloat32, false, true);
  };
  transitions_.s_t = as_tensor(s, {n, kStateDim});
  transitions_.a_t = as_tensor(a, {n});
  transitions_.r_t = as_tensor(r, {n});
  transitions_.s_next = as_tensor(sn, {n, kStateDim});
  transitions_.a_next = as_tensor(an, {n});
  transitions_.done = as_tensor(d, {n});
}

WindowBatch SampleStore::sample_windows(int batch, std::mt19937_64& rng) const {
  const auto idx = index_rows(count_, batch, rng).front();
  WindowBatch b;
  b.inputs.rtg = windows_.inputs.rtg.index_select(0, idx);
  b.inputs.states = windows_.inputs.states.index_select(0, idx);
  b.inputs.actions = windows_.inputs.actions.index_select(0, idx);
  b.inputs.timesteps = windows_.inputs.timesteps.index_select(0, idx);
  b.inputs.mask = windows_.inputs.mask.index_select(0, idx);
  b.target_actions = windows_.target_actions.index_select(0, idx);
  b.next_states = windows_.next_states.index_select(0, idx);
  b.next_mask = windows_.next_mask.index_select(0, idx);
  return b;
}

TransitionBatch SampleStore::sample_transitions(int batch,
                                                std::mt19937_64& rng) const {
  const auto idx = index_rows(count_, batch, rng).front();
  return {transitions_.s_t.index_select(0, idx),
          transitions_.a_t.index_select(0, idx),
          transitions_.r_t.index_select(0, idx),
          transitions_.s_next.index_select(0, idx),
          transitions_.a_next.index_select(0, idx),
          transitions_.done.index_select(0, idx)};
}

// ---------------------------------------------------------------------------

QEvaluator live_critics(GuideModel& model) {
  return [&model](const torch::Tensor& s, const torch::Tensor& a) {
    const auto x = critic_input(s, a, model.stats.action_high);
    return torch::min(model.q1->forward(x), model.q2->forward(x));
  };
}

ActorLosses actor_losses(GuideModel& model, const WindowBatch& batch,
                         const TrainConfig& config, Phase phase,
                         const QEvaluator& q_eval, std::optional<double> q_scale) {
  const auto pred = model.dt->forward(batch.inputs);
  const auto& mask = batch.inputs.mask;
  const auto zero = torch::zeros({}, pred.action.options());

  ActorLosses out;
  out.action = masked_mean((pred.action - batch.target_actions).pow(2), mask);
  out.state = masked_mean((pred.next_state - batch.next_states).pow(2).mean(-1),
                          batch.next_mask);

  const auto s_hat =
      phase == Phase::kSeparate ? pred.next_state.detach() : pred.next_state;
  const auto a_idm = model.idm->forward(idm_input(batch.inputs.states, s_hat));
  out.idm = masked_mean((a_idm - batch.target_actions).pow(2), mask);

  out.q_reg = zero;
  const bool use_q = phase == Phase::kJoint && config.train_critics &&
                     config.q_reg_weight > 0.0 && config.action_loss;
  if (use_q) {
    const auto real = mask.reshape({-1}).nonzero().squeeze(-1);
    const auto s = batch.inputs.states.reshape({-1, kStateDim}).index_select(0, real);
    const auto a = pred.action.reshape({-1}).index_select(0, real);
    const auto q = q_eval(s, a);
    const double scale =
        q_scale ? *q_scale : q.detach().abs().mean().item<double>() + kQScaleEps;
    out.q_reg = -q.mean() / scale;
  }

  out.total = zero;
  if (config.action_loss) out.total = out.total + out.action;
  if (config.state_loss) out.total = out.total + out.state;
  if (config.idm_loss) out.total = out.total + out.idm;
  if (use_q) out.total = out.total + config.q_reg_weight * out.q_reg;
  return out;
}

torch::Tensor td_target(GuideModel& model, const TransitionBatch& batch,
                        double gamma) {
  torch::NoGradGuard no_grad;
  const auto x = critic_input(batch.s_next, batch.a_next, model.stats.action_high);
  const auto q_next =
      torch::min(model.q1_target->forward(x), model.q2_target->forward(x));
  return batch.r_t + gamma * (1.0 - batch.done) * q_next;
}

torch::Tensor critic_loss(GuideModel& model, const TransitionBatch& batch,
                          double gamma) {
  const auto y = td_target(model, batch, gamma);
  const auto x = critic_input(batch.s_t, batch.a_t, model.stats.action_high);
  return torch::mse_loss(model.q1->forward(x), y) +
         torch::mse_loss(model.q2->forward(x), y);
}

// ---------------------------------------------------------------------------

Trainer::Trainer(GuideModel& model, TrainConfig config)
    : model_(model),
      config_(config),
      q_eval_(live_critics(model)),
      actor_opt_(model.actor_parameters(), torch::optim::AdamOptions(config.lr_actor)),
      critic_opt_(model.critic_parameters(),
                  torch::optim::AdamOptions(config.lr_critic)) {
  config_.validate();
}

LossReport Trainer::critic_update(const TransitionBatch& batch) {
  if (batch.size() == 0) throw EmptyDataset("critic_update: empty batch");
  model_.q1->train();
  model_.q2->train();
  critic_opt_.zero_grad();
  auto loss = critic_loss(model_, batch, config_.gamma);
  LossReport report;
  report.l_critic = loss.item<double>();
  check_finite(report.l_critic, "critic loss", Phase::kSeparate);
  loss.backward();
  torch::nn::utils::clip_grad_norm_(model_.critic_parameters(), config_.grad_clip);
  critic_opt_.step();
  ema_update(*model_.q1, *model_.q1_target, config_.tau_ema);
  ema_update(*model_.q2, *model_.q2_target, config_.tau_ema);
  return report;
}

LossReport Trainer::actor_update_phase1(const WindowBatch& batch) {
  return actor_update(batch, Phase::kSeparate);
}

LossReport Trainer::actor_update_phase2(const WindowBatch& batch) {
  return actor_update(batch, Phase::kJoint);
}

LossReport Trainer::actor_update(const WindowBatch& batch, Phase phase) {
  if (batch.size() == 0) throw EmptyDataset("actor update: empty batch");
  model_.dt->train();
  model_.idm->train();
  FrozenParams frozen(model_.critic_parameters());
  actor_opt_.zero_grad();
  const auto losses = actor_losses(model_, batch, config_, phase, q_eval_);

  LossReport report;
  report.phase = phase;
  report.l_dt_action = losses.action.item<double>();
  report.l_dt_state = losses.state.item<double>();
  report.l_idm = losses.idm.item<double>();
  report.l_q_reg = losses.q_reg.item<double>();
  check_finite(losses.total.item<double>(), "actor loss", phase);
  if (losses.total.requires_grad()) {
    losses.total.backward();
    torch::nn::utils::clip_grad_norm_(model_.actor_parameters(), config_.grad_clip);
    actor_opt_.step();
  }
  return report;
}

// ---------------------------------------------------------------------------

TrainResult train(std::span<const Trajectory> dataset, const TrainConfig& config,
                  const ModelConfig& model_config, const TrainOptions& options) {
  config.validate();
  if (dataset.empty()) throw EmptyDataset("train: dataset is empty");
  torch::manual_seed(substream(config.seed, "init"));
  GuideModel model(model_config, fit_norm_stats(dataset));
  return run_schedule(dataset, config, std::move(model), 0, options);
}

TrainResult resume_training(std::span<const Trajectory> dataset,
                            const TrainConfig& config, LoadedModel start,
                            const TrainOptions& options) {
  return run_schedule(dataset, config, std::move(start.model),
                      start.meta.train_step, options);
}

BcTrainResult train_bc(std::span<const Trajectory> dataset,
                       const TrainConfig& config, const ModelConfig& model_config) {
  config.validate();
  if (dataset.empty()) throw EmptyDataset("train_bc: dataset is empty");
  torch::manual_seed(substream(config.seed, "init"));
  BcModel model(model_config, fit_norm_stats(dataset));
  const SampleStore store(dataset, model.stats, 1);
  torch::optim::Adam opt(model.net->parameters(),
                         torch::optim::AdamOptions(config.lr_actor));
  BcTrainResult result{model, {}};
  model.net->train();
  const std::int64_t total = config.phase1_steps + config.phase2_steps;
  for (std::int64_t s = 0; s < total; ++s) {
    std::mt19937_64 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(s)}));
    const auto batch = store.sample_transitions(config.critic_batch_size, rng);
    opt.zero_grad();
    auto loss = torch::mse_loss(model.net->forward(batch.s_t), batch.a_t);
    LossReport report;
    report.step = s;
    report.l_dt_action = loss.item<double>();
    check_finite(report.l_dt_action, "behavior cloning loss", Phase::kSeparate);
    loss.backward();
    torch::nn::utils::clip_grad_norm_(model.net->parameters(), config.grad_clip);
    opt.step();
    result.history.push_back(report);
  }
  model.net->eval();
  return result;
}

void write_loss_csv(std::span<const LossReport> history,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  out << std::setprecision(9);
  out << "step,phase,l_dt_action,l_dt_state,l_idm,l_q_reg,l_critic\n";
  for (const auto& r : history) {
    out << r.step << ',' << to_string(r.phase) << ',' << r.l_dt_action << ','
        << r.l_dt_state << ',' << r.l_idm << ',' << r.l_q_reg << ',' << r.l_critic
        << '\n';
  }
  const std::string text = out.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

}  // namespace guide
