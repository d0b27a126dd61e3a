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


#include <cmath>
#include <random>
#include <vector>

#include "guide/common/binary_io.hpp"
#include "guide/common/errors.hpp"
#include "guide/common/seeding.hpp"
#include "guide/model/checkpoint.hpp"
#include "guide/model/networks.hpp"
#include "test_support.hpp"
#include "torch_doctest.hpp"

namespace guide {
namespace {

using testing::make_model;
using testing::random_window;
using testing::tiny_config;
using testing::unit_stats;

bool same_tensor(const torch::Tensor& a, const torch::Tensor& b) {
  return a.sizes() == b.sizes() && torch::equal(a, b);
}

bool same_parameters(const torch::nn::Module& a, const torch::nn::Module& b) {
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!same_tensor(pa[i], pb[i])) return false;
  }
  return true;
}

TEST_CASE("configuration validation") {
  auto c = tiny_config();
  c.dt.hidden_dim = 15;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny_config();
  c.dt.layers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny_config();
  c.dt.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  const auto prod = ModelConfig::production();
  CHECK(prod.dt.layers == 6);
  CHECK(prod.dt.heads == 8);
  CHECK(prod.dt.hidden_dim == 512);
  CHECK(prod.mlp_hidden == 256);
  CHECK_NOTHROW(prod.validate());
}

TEST_CASE("predictions have the documented shapes and ranges") {
  auto model = make_model(1);
  model.train(false);
  std::mt19937_64 rng(2);
  std::vector<ContextWindow> ws;
  for (int b = 0; b < 6; ++b) ws.push_back(random_window(rng, 5, 1 + b % 5, 10));
  const auto pred = model.dt->forward(to_tensors(ws));
  CHECK(pred.action.sizes() == torch::IntArrayRef{6, 5});
  CHECK(pred.next_state.sizes() == torch::IntArrayRef{6, 5, kStateDim});
  CHECK(pred.action.min().item<double>() >= 0.0);
  CHECK(torch::isfinite(pred.next_state).all().item<bool>());

  const auto out = dt_forward(model, ws[0]);
  CHECK(out.action_pred >= 0.0);
  for (double x : out.next_state_pred) CHECK(std::isfinite(x));
  CHECK(out.action_pred == dt_forward(model, ws[0]).action_pred);

  auto wrong = random_window(rng, 4, 4, 10);
  CHECK_THROWS_AS(dt_forward(model, wrong), ShapeMismatch);
}

TEST_CASE("action outputs stay nonnegative under extreme parameters") {
  auto model = make_model(3);
  {
    torch::NoGradGuard g;
    for (auto& p : model.dt->parameters()) p.mul_(25.0);
    for (auto& p : model.idm->parameters()) p.mul_(25.0);
  }
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto w = random_window(rng, 5, 5, 20);
    CHECK(dt_forward(model, w).action_pred >= 0.0);
    CHECK(idm_forward(model, w.states[3], w.states[4]) >= 0.0);
  }
}

TEST_CASE("padded slots never influence the prediction") {
  auto model = make_model(5);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int real = 1 + trial % 4;
    auto a = random_window(rng, 5, real, 3 + trial % 4);
    auto b = a;
    std::normal_distribution<double> n(0.0, 5.0);
    for (int j = 0; j < 5 - real; ++j) {
      b.rtg[j] = n(rng);
      for (double& x : b.states[j]) x = n(rng);
      b.actions[j] = std::abs(n(rng));
      b.timesteps[j] = 7;
    }
    const auto oa = dt_forward(model, a);
    const auto ob = dt_forward(model, b);
    CHECK(oa.action_pred == ob.action_pred);
    CHECK(oa.next_state_pred == ob.next_state_pred);
  }
}

TEST_CASE("earlier positions ignore later tokens") {
  auto model = make_model(7, tiny_config(6));
  model.train(false);
  torch::NoGradGuard g;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = random_window(rng, 6, 6, 30);
    std::uniform_int_distribution<int> cut_d(0, 4);
    const int cut = cut_d(rng);  // positions <= cut must not change
    auto v = w;
    v.actions[cut] += 1.0 + std::abs(n(rng));
    for (int j = cut + 1; j < 6; ++j) {
      v.rtg[j] = n(rng);
      for (double& x : v.states[j]) x = n(rng);
      if (j < 5) v.actions[j] = std::abs(n(rng));
    }
    const auto pw = model.dt->forward(to_tensors(std::vector{w}));
    const auto pv = model.dt->forward(to_tensors(std::vector{v}));
    CHECK(same_tensor(pw.action.narrow(1, 0, cut + 1), pv.action.narrow(1, 0, cut + 1)));
    CHECK(same_tensor(pw.next_state.narrow(1, 0, cut + 1),
                      pv.next_state.narrow(1, 0, cut + 1)));
    // Sanity: the perturbation is visible after the cut.
    checked += !same_tensor(pw.action.narrow(1, cut + 1, 5 - cut),
                            pv.action.narrow(1, cut + 1, 5 - cut));
  }
  CHECK(checked == 100);
}

TEST_CASE("evaluation mode is deterministic, training mode uses dropout") {
  auto model = make_model(9);
  std::mt19937_64 rng(10);
  const std::vector<ContextWindow> ws{random_window(rng, 5, 5, 10)};
  const auto t = to_tensors(ws);
  model.train(false);
  const auto a = model.dt->forward(t).action;
  const auto b = model.dt->forward(t).action;
  CHECK(same_tensor(a, b));
  model.train(true);
  torch::manual_seed(1);
  const auto c = model.dt->forward(t).action;
  torch::manual_seed(2);
  const auto d = model.dt->forward(t).action;
  CHECK_FALSE(same_tensor(c, d));
}

TEST_CASE("inverse dynamics and critic forwards") {
  auto model = make_model(11);
  std::vector<double> s(kStateDim, 0.3), s2(kStateDim, -0.2);
  const double a1 = idm_forward(model, s, s2);
  CHECK(a1 >= 0.0);
  CHECK(a1 == idm_forward(model, s, s2));
  CHECK_THROWS_AS(idm_forward(model, std::vector<double>(3), s2), ShapeMismatch);

  const double q = q_forward(model.q1, model.stats, s, 1.0);
  CHECK(std::isfinite(q));
  CHECK(q == q_forward(model.q1, model.stats, s, 1.0));
  CHECK_THROWS_AS(q_forward(model.q1, model.stats, std::vector<double>(2), 1.0),
                  ShapeMismatch);

  // Critic input scales the action by the dataset maximum.
  const auto in = critic_input(torch::zeros({1, kStateDim}), torch::full({1}, 3.0), 2.0);
  CHECK(in.size(1) == kStateDim + 1);
  CHECK(in[0][kStateDim].item<double>() == 1.5);
}

TEST_CASE("targets start as copies of their critics") {
  auto model = make_model(12);
  CHECK(same_parameters(*model.q1, *model.q1_target));
  CHECK(same_parameters(*model.q2, *model.q2_target));
  CHECK_FALSE(same_parameters(*model.q1, *model.q2));
}

TEST_CASE("soft target updates") {
  auto model = make_model(13);
  {
    torch::NoGradGuard g;
    for (auto& p : model.q1->parameters()) p.add_(0.5);
  }
  SUBCASE("tau = 0 leaves the target unchanged") {
    auto before = model.deep_copy();
    ema_update(*model.q1, *model.q1_target, 0.0);
    CHECK(same_parameters(*model.q1_target, *before.q1_target));
  }
  SUBCASE("tau = 1 copies the source") {
    ema_update(*model.q1, *model.q1_target, 1.0);
    CHECK(same_parameters(*model.q1, *model.q1_target));
  }
  SUBCASE("elementwise average") {
    torch::NoGradGuard g;
    for (auto& p : model.q1->parameters()) p.zero_();
    for (auto& p : model.q1_target->parameters()) p.fill_(1.0);
    ema_update(*model.q1, *model.q1_target, 0.5);
    for (const auto& p : model.q1_target->parameters()) {
      CHECK(torch::all(p == 0.5).item<bool>());
    }
  }
  SUBCASE("distance to the source never grows") {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      ema_update(*model.q1, *model.q1_target, 0.1);
      double dist = 0.0;
      const auto src = model.q1->parameters();
      const auto dst = model.q1_target->parameters();
      for (std::size_t j = 0; j < src.size(); ++j) {
        CHECK(src[j].sizes() == dst[j].sizes());
        dist += (src[j] - dst[j]).pow(2).sum().item<double>();
      }
      CHECK(dist <= prev);
      prev = dist;
    }
  }
  SUBCASE("mismatched modules and bad tau") {
    CHECK_THROWS_AS(ema_update(*model.q1, *model.idm, 0.5), ShapeMismatch);
    CHECK_THROWS_AS(ema_update(*model.q1, *model.q1_target, 1.5), ConfigError);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto dir = testing::scratch_dir("checkpoints");
  auto model = make_model(14);
  save_checkpoint(model, {123, "full"}, dir / "m.ckpt");
  auto loaded = load_checkpoint(dir / "m.ckpt");
  CHECK(loaded.meta.train_step == 123);
  CHECK(loaded.meta.variant == "full");
  CHECK(loaded.model.stats == model.stats);
  CHECK(loaded.model.config.dt.context_k == model.config.dt.context_k);
  CHECK(same_parameters(*loaded.model.dt, *model.dt));
  CHECK(same_parameters(*loaded.model.idm, *model.idm));
  CHECK(same_parameters(*loaded.model.q2_target, *model.q2_target));

  // Saving the loaded model reproduces the file byte for byte.
  save_checkpoint(loaded.model, loaded.meta, dir / "again.ckpt");
  CHECK(read_file(dir / "m.ckpt") == read_file(dir / "again.ckpt"));

  SUBCASE("missing and corrupted files") {
    CHECK_THROWS_AS(load_checkpoint(dir / "absent.ckpt"), MissingCheckpoint);
    auto bytes = read_file(dir / "m.ckpt");
    bytes[bytes.size() / 2] ^= 0x01;
    write_file(dir / "flip.ckpt", bytes);
    CHECK_THROWS_AS(load_checkpoint(dir / "flip.ckpt"), VersionOrCorruption);
    bytes = read_file(dir / "m.ckpt");
    bytes.resize(bytes.size() - 100);
    write_file(dir / "cut.ckpt", bytes);
    CHECK_THROWS_AS(load_checkpoint(dir / "cut.ckpt"), VersionOrCorruption);
    bytes = read_file(dir / "m.ckpt");
    bytes[8] = 99;  // version field
    write_file(dir / "ver.ckpt", bytes);
    CHECK_THROWS_AS(load_checkpoint(dir / "ver.ckpt"), VersionOrCorruption);
  }

  SUBCASE("tensors that disagree with the stored config") {
    // Two checkpoints that differ only in the critic width; graft the wider
    // config onto the narrower tensors and re-seal the checksum.
    auto narrow_cfg = tiny_config();
    auto wide_cfg = tiny_config();
    wide_cfg.mlp_hidden = 32;
    save_checkpoint(make_model(15, narrow_cfg), {}, dir / "narrow.ckpt");
    save_checkpoint(make_model(15, wide_cfg), {}, dir / "wide.ckpt");
    auto narrow = read_file(dir / "narrow.ckpt");
    const auto wide = read_file(dir / "wide.ckpt");
    std::size_t i = 0;
    while (narrow[i] == wide[i]) ++i;
    narrow[i] = wide[i];
    const std::size_t body = narrow.size() - 8;
    const std::uint64_t sum = fnv1a64(std::string_view(
        reinterpret_cast<const char*>(narrow.data()), body));
    std::memcpy(narrow.data() + body, &sum, 8);
    write_file(dir / "graft.ckpt", narrow);
    CHECK_THROWS_AS(load_checkpoint(dir / "graft.ckpt"), ShapeMismatch);
  }
}

TEST_CASE("behavior cloning model") {
  const auto dir = testing::scratch_dir("bc_checkpoints");
  torch::manual_seed(16);
  BcModel bc(tiny_config(), unit_stats());
  BidState s;
  s.features.fill(0.2);
  const double a = bc.act(s);
  CHECK(a >= 0.0);
  save_bc_checkpoint(bc, {7, "bc"}, dir / "bc.ckpt");
  auto loaded = load_bc_checkpoint(dir / "bc.ckpt");
  CHECK(loaded.model.act(s) == a);
  CHECK(loaded.meta.train_step == 7);
  save_checkpoint(make_model(17), {}, dir / "guide.ckpt");
  CHECK_THROWS_AS(load_bc_checkpoint(dir / "guide.ckpt"), VersionOrCorruption);
}

}  // namespace
}  // namespace guide
