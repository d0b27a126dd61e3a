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

// Independent oracles shared by the training suite and the acceptance run:
// finite-difference gradients and exact policy evaluation on tiny MDPs.

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>
#include <vector>

#include <torch/torch.h>

#include "guide/train/trainer.hpp"
#include "test_support.hpp"

namespace guide::testing {

inline std::vector<double> grads_of(const std::vector<torch::Tensor>& params) {
  std::vector<double> out;
  for (const auto& p : params) {
    const auto g = p.grad().defined() ? p.grad() : torch::zeros_like(p);
    const auto flat = g.reshape({-1}).to(torch::kFloat64).contiguous();
    out.insert(out.end(), flat.data_ptr<double>(), flat.data_ptr<double>() + flat.numel());
  }
  return out;
}

inline void zero_grads(const std::vector<torch::Tensor>& params) {
  for (auto p : params) {
    if (p.grad().defined()) p.mutable_grad() = torch::Tensor();
  }
}

// Central differences in double precision on `samples` random scalars of
// `params`; returns the worst relative error.
template <typename LossFn>
inline double worst_fd_error(LossFn&& loss_fn, const std::vector<torch::Tensor>& params,
                             int samples, std::uint64_t seed) {
  zero_grads(params);
  loss_fn().backward();
  std::vector<torch::Tensor> grads;
  std::vector<std::int64_t> sizes;
  std::int64_t total = 0;
  for (const auto& p : params) {
    grads.push_back(p.grad().defined() ? p.grad().clone() : torch::zeros_like(p));
    sizes.push_back(p.numel());
    total += p.numel();
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, total - 1);
  const double eps = 1e-6;
  double worst = 0.0;
  torch::NoGradGuard g;
  for (int i = 0; i < samples; ++i) {
    std::int64_t flat = pick(rng);
    std::size_t t = 0;
    while (flat >= sizes[t]) flat -= sizes[t++];
    double* x = params[t].data_ptr<double>() + flat;
    const double orig = *x;
    *x = orig + eps;
    const double up = loss_fn().template item<double>();
    *x = orig - eps;
    const double down = loss_fn().template item<double>();
    *x = orig;
    const double numeric = (up - down) / (2 * eps);
    const double analytic = grads[t].reshape({-1})[flat].template item<double>();
    // Floor keeps exact-zero gradients from dividing by zero.
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

// Policy evaluation of a deterministic MDP by fixed-point iteration; this is
// the oracle the critic must approach. next[i] < 0 marks a terminal step.
inline std::vector<double> evaluate_chain(const std::vector<int>& next,
                                          const std::vector<double>& r, double gamma) {
  std::vector<double> q(r.size(), 0.0);
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = r[i] + (next[i] < 0 ? 0.0 : gamma * q[next[i]]);
    }
  }
  return q;
}

// Trains twin critics on the two transitions of a 2-state MDP and returns
// min(Q1, Q2) at each logged (state, action).
inline std::vector<double> fit_two_state_critic(const std::vector<int>& next,
                                                const std::vector<double>& r, double gamma) {
  auto model = make_model(18);
  const std::vector<double> actions{0.5, 1.5};
  TransitionBatch b;
  b.s_t = torch::zeros({2, kStateDim});
  b.s_t[0].fill_(1.0);
  b.s_t[1].fill_(-1.0);
  b.a_t = torch::tensor({actions[0], actions[1]}, torch::kFloat32);
  b.r_t = torch::tensor({r[0], r[1]}, torch::kFloat32);
  b.s_next = torch::zeros({2, kStateDim});
  b.a_next = torch::zeros({2});
  b.done = torch::zeros({2});
  for (int i = 0; i < 2; ++i) {
    if (next[i] < 0) {
      b.done[i] = 1.0;
    } else {
      b.s_next[i] = b.s_t[next[i]];
      b.a_next[i] = actions[next[i]];
    }
  }
  TrainConfig tc;
  tc.lr_critic = 1e-3;
  tc.tau_ema = 0.05;
  tc.gamma = gamma;
  Trainer trainer(model, tc);
  for (int step = 0; step < 4000; ++step) trainer.critic_update(b);
  std::vector<double> q;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> s(kStateDim, i == 0 ? 1.0 : -1.0);
    q.push_back(std::min(q_forward(model.q1, model.stats, s, actions[i]),
                         q_forward(model.q2, model.stats, s, actions[i])));
  }
  return q;
}

}  // namespace guide::testing
