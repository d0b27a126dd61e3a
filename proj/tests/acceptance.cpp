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


// Acceptance run: one PASS/FAIL line per criterion. The exact criteria run
// on small fixtures; the ordering criteria train the benchmark models with
// the default run config and score them on seeded evaluation episodes.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <torch/torch.h>

#include "CLI11.hpp"
#include "guide/cli/run_config.hpp"
#include "guide/common/binary_io.hpp"
#include "guide/data/dataset_io.hpp"
#include "guide/data/generate.hpp"
#include "guide/eval/benchmark.hpp"
#include "guide/model/checkpoint.hpp"
#include "guide/policy/guide_policy.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace guide {
namespace {

namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 1) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << x;
  return out.str();
}

// Collects failed sub-checks so a criterion reports what went wrong.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  Verdict verdict(const std::string& summary) const {
    if (failures_.empty()) return {true, summary + " (" + std::to_string(checks_) + " checks)"};
    std::string d = std::to_string(failures_.size()) + " of " + std::to_string(checks_) +
                    " checks failed: " + failures_.front();
    if (failures_.size() > 1) d += "; ...";
    return {false, d};
  }

 private:
  int checks_ = 0;
  std::vector<std::string> failures_;
};

// --- 1 --------------------------------------------------------------------

Verdict formula_suite() {
  Tally t;
  t.expect(compute_penalty(1.0, 1.0, 2.0) == 1.0, "penalty at cpa = C");
  t.expect(compute_penalty(2.0, 1.0, 2.0) == 0.25, "penalty at cpa = 2C");
  t.expect(compute_penalty(0.5, 1.0, 2.0) == 1.0, "penalty below C");

  CampaignLedger ledger;
  ledger.budget_total = 100.0;
  ledger.spent = 32.0;
  ledger.value_acquired = 8.0;  // cpa 4 at C = 2: penalty 1/4
  const auto score = compute_score(ledger, 2.0);
  t.expect(score.score == 0.25 * 8.0 && score.penalty == 0.25, "score = penalty * value");

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> eighths(0, 80);
  std::uniform_int_distribution<int> length(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    // Multiples of 1/8 keep every partial sum exact, whatever the order.
    std::vector<double> r(length(rng));
    for (double& x : r) x = eighths(rng) / 8.0;
    std::vector<double> oracle(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = i; j < r.size(); ++j) s += r[j];
      oracle[i] = s;
    }
    if (compute_rtg(r) != oracle) {
      t.expect(false, "rtg trial " + std::to_string(trial));
      break;
    }
  }

  auto model = testing::make_model(2);
  torch::manual_seed(3);
  TransitionBatch b;
  b.s_t = torch::randn({16, kStateDim});
  b.a_t = torch::rand({16});
  b.r_t = torch::rand({16});
  b.s_next = torch::randn({16, kStateDim});
  b.a_next = torch::rand({16});
  b.done = torch::ones({16});
  t.expect(torch::equal(td_target(model, b, 0.9), b.r_t), "td target with d = 1");
  b.done = torch::zeros({16});
  t.expect(torch::equal(td_target(model, b, 0.0), b.r_t), "td target with gamma = 0");

  {
    torch::NoGradGuard g;
    for (auto& p : model.q1->parameters()) p.add_(0.3);
  }
  auto before = model.deep_copy();
  ema_update(*model.q1, *model.q1_target, 0.0);
  const auto same = [](const torch::nn::Module& a, const torch::nn::Module& c) {
    const auto pa = a.parameters(), pc = c.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (!torch::equal(pa[i], pc[i])) return false;
    }
    return true;
  };
  t.expect(same(*model.q1_target, *before.q1_target), "ema with tau = 0");
  ema_update(*model.q1, *model.q1_target, 1.0);
  t.expect(same(*model.q1_target, *model.q1), "ema with tau = 1");
  return t.verdict("penalty, score, rtg, td target and ema match their oracles");
}

// --- 2 --------------------------------------------------------------------

Verdict stop_gradient_suite() {
  auto model = testing::make_model(4, ModelConfig{});
  model.train(false);
  std::mt19937_64 rng(5);
  std::vector<ContextWindow> windows;
  for (int i = 0; i < 8; ++i) {
    windows.push_back(testing::random_window(rng, model.config.dt.context_k, 3 + 2 * i, 40));
  }
  const auto batch = make_window_batch(windows);
  const auto dt_params = model.dt_parameters();
  TrainConfig tc;

  testing::zero_grads(model.actor_parameters());
  actor_losses(model, batch, tc, Phase::kSeparate, live_critics(model)).idm.backward();
  std::size_t nonzero_phase1 = 0;
  for (double g : testing::grads_of(dt_params)) nonzero_phase1 += g != 0.0;

  testing::zero_grads(model.actor_parameters());
  actor_losses(model, batch, tc, Phase::kJoint, live_critics(model)).idm.backward();
  double norm_phase2 = 0.0;
  for (double g : testing::grads_of(dt_params)) norm_phase2 += g * g;

  Tally t;
  t.expect(nonzero_phase1 == 0, std::to_string(nonzero_phase1) + " nonzero grads in phase 1");
  t.expect(norm_phase2 > 0.0, "zero grad in phase 2");
  return t.verdict("phase 1 grad identically 0, phase 2 grad norm " +
                   fmt(std::sqrt(norm_phase2), 4));
}

// --- 3 --------------------------------------------------------------------

Verdict gradient_suite() {
  auto model = testing::make_model(8, ModelConfig{});
  model.to(torch::kFloat64);
  model.train(false);
  std::mt19937_64 rng(9);
  std::vector<ContextWindow> windows;
  for (int i = 0; i < 4; ++i) {
    windows.push_back(testing::random_window(rng, model.config.dt.context_k, 6 + 4 * i, 30));
  }
  const auto batch = make_window_batch(windows, torch::kFloat64);
  torch::manual_seed(10);
  TransitionBatch trans;
  trans.s_t = torch::randn({32, kStateDim}, torch::kFloat64);
  trans.a_t = torch::rand({32}, torch::kFloat64) * 2;
  trans.r_t = torch::rand({32}, torch::kFloat64);
  trans.s_next = torch::randn({32, kStateDim}, torch::kFloat64);
  trans.a_next = torch::rand({32}, torch::kFloat64) * 2;
  trans.done = (torch::rand({32}) < 0.3).to(torch::kFloat64);
  TrainConfig tc;
  const auto q = live_critics(model);

  const double dt = testing::worst_fd_error(
      [&] {
        const auto l = actor_losses(model, batch, tc, Phase::kSeparate, q);
        return l.action + l.state;
      },
      model.dt_parameters(), 120, 1);
  const double idm = testing::worst_fd_error(
      [&] { return actor_losses(model, batch, tc, Phase::kJoint, q).idm; },
      model.actor_parameters(), 120, 2);
  const double critic = testing::worst_fd_error(
      [&] { return critic_loss(model, trans, 0.9); }, model.critic_parameters(), 120, 3);
  // A fixed Q normalizer makes the regularized loss a plain function of the
  // parameters.
  const double total = testing::worst_fd_error(
      [&] { return actor_losses(model, batch, tc, Phase::kJoint, q, 0.7).total; },
      model.actor_parameters(), 120, 4);

  Tally t;
  t.expect(dt < 1e-3, "L_dt rel err " + fmt(dt, 6));
  t.expect(idm < 1e-3, "L_idm rel err " + fmt(idm, 6));
  t.expect(critic < 1e-3, "L_critic rel err " + fmt(critic, 6));
  t.expect(total < 1e-3, "Q-regularized rel err " + fmt(total, 6));
  std::ostringstream d;
  d << std::scientific << std::setprecision(1) << "worst rel err dt " << dt << ", idm "
    << idm << ", critic " << critic << ", actor " << total << " over 120 params each";
  return t.verdict(d.str());
}

// --- 4 --------------------------------------------------------------------

Verdict causality_suite() {
  auto model = testing::make_model(7, ModelConfig{});
  model.train(false);
  torch::NoGradGuard g;
  const int k = model.config.dt.context_k;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_int_distribution<int> cut_d(0, k - 2);
  Tally t;
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = testing::random_window(rng, k, k, 40);
    const int cut = cut_d(rng);
    auto v = w;
    v.actions[cut] += 1.0 + std::abs(n(rng));
    for (int j = cut + 1; j < k; ++j) {
      v.rtg[j] = n(rng);
      for (double& x : v.states[j]) x = n(rng);
      if (j < k - 1) v.actions[j] = std::abs(n(rng));
    }
    const auto pw = model.dt->forward(to_tensors(std::vector{w}));
    const auto pv = model.dt->forward(to_tensors(std::vector{v}));
    t.expect(torch::equal(pw.action.narrow(1, 0, cut + 1), pv.action.narrow(1, 0, cut + 1)) &&
                 torch::equal(pw.next_state.narrow(1, 0, cut + 1),
                              pv.next_state.narrow(1, 0, cut + 1)),
             "window " + std::to_string(trial));
  }
  return t.verdict("earlier outputs bit-identical under future edits in 100 windows");
}

// --- 5 --------------------------------------------------------------------

Verdict tabular_suite() {
  Tally t;
  std::ostringstream d;
  const std::vector<std::pair<std::vector<int>, std::vector<double>>> mdps{
      {{1, -1}, {1.0, 0.0}}, {{1, 0}, {1.0, 0.25}}};
  for (const auto& [next, r] : mdps) {
    const auto oracle = testing::evaluate_chain(next, r, 0.9);
    const auto q = testing::fit_two_state_critic(next, r, 0.9);
    for (int i = 0; i < 2; ++i) {
      const double tol = 0.05 * std::max(std::abs(oracle[i]), 1.0);
      t.expect(std::abs(q[i] - oracle[i]) <= tol,
               "Q" + std::to_string(i) + " " + fmt(q[i], 3) + " vs " + fmt(oracle[i], 3));
      d << "Q" << i << " " << fmt(q[i], 3) << "/" << fmt(oracle[i], 3) << " ";
    }
  }
  return t.verdict("learned/exact: " + d.str());
}

// --- 6 --------------------------------------------------------------------

Verdict selection_suite() {
  const CriticFn bowl = [](std::span<const double>, double a) { return -(a - 1.3) * (a - 1.3); };
  const CriticFn tilt = [](std::span<const double>, double a) { return 0.2 - 0.3 * a; };
  const CriticFn flat = [](std::span<const double>, double) { return 1.0; };
  const std::vector<double> s(kStateDim, 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Tally t;
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const double qa = std::min(-(a - 1.3) * (a - 1.3), 0.2 - 0.3 * a);
    const double qb = std::min(-(b - 1.3) * (b - 1.3), 0.2 - 0.3 * b);
    mismatches += select_action(bowl, tilt, s, a, b).emitted != (qa >= qb ? a : b);
  }
  t.expect(mismatches == 0, std::to_string(mismatches) + " mismatches");
  const auto tie = select_action(flat, flat, s, 0.4, 1.9);
  t.expect(tie.chosen == ActionSource::kDt && tie.emitted == 0.4, "tie not resolved to DT");
  return t.verdict("1000 random pairs match the brute-force argmax, ties go to DT");
}

// --- 11 -------------------------------------------------------------------

Verdict pearson_suite() {
  const std::vector<double> x{1.0, 4.0, 2.0, 8.0, 5.0};
  std::vector<double> neg, affine;
  for (double v : x) {
    neg.push_back(-v);
    affine.push_back(3.0 * v - 7.0);
  }
  Tally t;
  t.expect(pearson(x, x) == 1.0, "identical " + fmt(pearson(x, x), 17));
  t.expect(pearson(x, neg) == -1.0, "negated " + fmt(pearson(x, neg), 17));
  t.expect(pearson(x, affine) == 1.0, "affine " + fmt(pearson(x, affine), 17));
  return t.verdict("identical 1, negated -1, affine 1");
}

// --- 10 -------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GUIDE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict determinism_suite(const fs::path& work) {
  nlohmann::json doc = to_json(default_run_config());
  doc["env"]["steps"] = 12;
  doc["env"]["impressions_per_step"] = 60;
  doc["env"]["budget"] = 300.0;
  doc["env"]["competitor_budget"] = 100.0;
  doc["data"]["num_episodes"] = 8;
  doc["train"]["phase1_steps"] = 5;
  doc["train"]["phase2_steps"] = 5;
  doc["train"]["batch_size"] = 8;
  doc["train"]["critic_batch_size"] = 32;
  doc["model"] = {{"layers", 1}, {"heads", 2}, {"hidden_dim", 16}, {"context_k", 4},
                  {"dropout", 0.1}, {"max_timestep", 16}, {"mlp_hidden", 16},
                  {"mlp_layers", 2}};
  doc["eval"]["episodes_per_cell"] = 2;
  doc["eval"]["ablation_episodes"] = 2;
  doc["eval"]["calibration_episodes"] = 2;
  const fs::path root = work / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "config.json") << doc.dump(2);
  const std::string cfg = " -c " + (root / "config.json").string();

  Tally t;
  std::map<std::string, std::vector<std::uint8_t>> runs[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path out = root / ("run" + std::to_string(r));
    const std::vector<std::string> commands{
        "gen-data" + cfg + " -o " + (out / "data").string(),
        "train" + cfg + " -d " + (out / "data/dataset.bin").string() +
            " --variant all --checkpoint-every 5 -o " + (out / "models").string(),
        "evaluate" + cfg + " --checkpoints " + (out / "models").string() +
            " --sweep --ablate --analyze -o " + (out / "eval").string(),
        "rollout" + cfg + " --checkpoint " + (out / "models/guide.ckpt").string() +
            " --fraction 1.25 --episode 2 -o " + (out / "rollout").string()};
    for (const auto& c : commands) t.expect(run_cli(c) == 0, "command failed: " + c);
    for (const auto& e : fs::recursive_directory_iterator(out)) {
      if (e.is_regular_file()) runs[r][fs::relative(e.path(), out).string()] = read_file(e.path());
    }
  }
  t.expect(runs[0].size() == runs[1].size(), "different file sets");
  int differing = 0;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) {
      ++differing;
      t.expect(false, name + " differs");
    }
  }
  return t.verdict(std::to_string(runs[0].size()) +
                   " files (dataset, checkpoints, CSVs, logs) byte-identical across reruns");
}

// --- benchmark ------------------------------------------------------------

struct Benchmark {
  RunConfig config;
  fs::path dir;
  std::vector<SweepResult> sweep;
  std::map<AblationVariant, AblationResult> ablation;
  BehaviorAnalysis behavior;
};

void log_line(const std::string& s) { std::cerr << "  .. " << s << std::endl; }

Benchmark run_benchmark(const fs::path& dir, bool reuse) {
  Benchmark b;
  b.config = default_run_config();
  b.dir = dir;
  fs::create_directories(dir);
  const auto& cfg = b.config;
  save_run_config(cfg, dir / "config.json");

  const std::vector<ModelKind> kinds{ModelKind::kGuide, ModelKind::kNoQOptimization,
                                     ModelKind::kVanillaDt};
  bool need_training = !reuse;
  for (auto kind : kinds) need_training |= !fs::exists(dir / checkpoint_file_name(kind));
  if (need_training) {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset data = generate_dataset(cfg.env, cfg.data.num_episodes, cfg.data_seed(),
                                          cfg.data.mix);
    log_line("generated " + std::to_string(data.size()) + " trajectories");
    for (auto kind : kinds) {
      const auto tc = training_config_for(kind, cfg.train_config());
      TrainOptions options;
      options.variant = std::string(to_string(kind));
      const auto result = train(data, tc, cfg.model, options);
      save_checkpoint(result.model, {tc.phase1_steps + tc.phase2_steps, options.variant},
                      dir / checkpoint_file_name(kind));
      write_loss_csv(result.history, dir / (options.variant + "_loss.csv"));
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_line("trained " + options.variant + " (" + fmt(secs, 0) + " s elapsed)");
    }
  } else {
    log_line("reusing checkpoints in " + dir.string());
  }

  CheckpointSet checkpoints(dir);
  const auto policy = cfg.eval.policy();
  BaselineOptions baseline;
  baseline.calibration_episodes = cfg.eval.calibration_episodes;
  baseline.policy = policy;
  const auto methods = standard_methods(checkpoints, cfg.env, cfg.eval_seed(), baseline);
  b.sweep = run_sweep(methods, cfg.env, cfg.eval.fractions, cfg.eval.episodes_per_cell,
                      cfg.eval_seed());
  write_sweep_csv(b.sweep, dir / "sweep_mean.csv", dir / "sweep_std.csv");
  write_sweep_episodes_csv(b.sweep, dir / "sweep_episodes.csv");
  log_line("budget sweep done");

  std::vector<AblationResult> rows;
  for (auto v : kAllVariants) {
    if (v == AblationVariant::kNoActionModeling) continue;  // not part of the ordering
    rows.push_back(run_ablation(ablation_spec(v), checkpoints, cfg.env, cfg.eval_seed(),
                                cfg.eval.ablation_episodes, policy));
    b.ablation[v] = rows.back();
  }
  write_ablation_csv(rows, dir / "ablation.csv");
  log_line("ablations done");

  b.behavior = analyze_behavior(checkpoints.model(ModelKind::kGuide), cfg.env,
                                cfg.eval.fractions, cfg.eval.episodes_per_cell,
                                cfg.eval_seed(), policy);
  write_behavior_reports(b.behavior, dir / "behavior");
  return b;
}

const SweepResult& row(const Benchmark& b, const std::string& method) {
  for (const auto& r : b.sweep) {
    if (r.method == method) return r;
  }
  throw std::runtime_error("no sweep row " + method);
}

// --- 7 --------------------------------------------------------------------

Verdict ordering_suite(const Benchmark& b) {
  const auto& guide = row(b, "guide");
  const auto& dt = row(b, "dt");
  const auto& constant = row(b, "constant");
  const auto& pid = row(b, "pid");
  int over_dt = 0;
  Tally t;
  std::ostringstream d;
  for (std::size_t c = 0; c < guide.cells.size(); ++c) {
    const double g = guide.cells[c].stats.mean;
    over_dt += g >= dt.cells[c].stats.mean;
    t.expect(g >= constant.cells[c].stats.mean,
             "below constant at fraction " + fmt(guide.cells[c].fraction, 2));
    t.expect(g >= pid.cells[c].stats.mean,
             "below pid at fraction " + fmt(guide.cells[c].fraction, 2));
    d << " " << fmt(guide.cells[c].fraction, 2) << ": " << fmt(g) << "/"
      << fmt(dt.cells[c].stats.mean) << "/" << fmt(constant.cells[c].stats.mean) << "/"
      << fmt(pid.cells[c].stats.mean);
  }
  t.expect(over_dt >= 4, "above DT in only " + std::to_string(over_dt) + " of 5 fractions");
  return t.verdict("guide/dt/constant/pid means," + d.str() + "; guide >= dt in " +
                   std::to_string(over_dt) + " of 5, " +
                   std::to_string(guide.cells.front().scores.size()) + " episodes per cell");
}

// --- 8 --------------------------------------------------------------------

Verdict ablation_suite(const Benchmark& b) {
  const auto mean = [&](AblationVariant v) { return b.ablation.at(v).stats.mean; };
  const double full = mean(AblationVariant::kFull);
  const double no_q = mean(AblationVariant::kNoQOptimization);
  const double orig = mean(AblationVariant::kOriginalDt);
  const double coin = mean(AblationVariant::kNoQSelection);
  const double no_idm = mean(AblationVariant::kNoIdmAction);
  const double no_dt = mean(AblationVariant::kNoDtAction);
  const double pooled = pooled_std(b.ablation.at(AblationVariant::kNoIdmAction).stats,
                                   b.ablation.at(AblationVariant::kNoDtAction).stats);
  const double lo = std::min(no_idm, no_dt) - pooled;
  const double hi = std::max(no_idm, no_dt) + pooled;
  Tally t;
  t.expect(full >= no_q, "Full " + fmt(full) + " < NoQOptimization " + fmt(no_q));
  t.expect(no_q >= orig, "NoQOptimization " + fmt(no_q) + " < OriginalDT " + fmt(orig));
  t.expect(coin >= lo && coin <= hi, "NoQSelection " + fmt(coin) + " outside [" + fmt(lo) +
                                         ", " + fmt(hi) + "]");
  return t.verdict("Full " + fmt(full) + " >= NoQOpt " + fmt(no_q) + " >= OriginalDT " +
                   fmt(orig) + "; NoQSelection " + fmt(coin) + " in [" + fmt(lo) + ", " +
                   fmt(hi) + "] over " +
                   std::to_string(b.ablation.at(AblationVariant::kFull).scores.size()) +
                   " seeds");
}

// --- 9 --------------------------------------------------------------------

Verdict behavior_suite(const Benchmark& b, std::string& note) {
  Tally t;
  int dt_steps = 0, idm_steps = 0;
  for (const auto& p : b.behavior.preference) {
    t.expect(std::abs(p.dt + p.idm - 1.0) < 1e-12,
             "shares of episode " + std::to_string(p.episode) + " do not sum to 1");
  }
  for (const auto& log : b.behavior.logs) {
    for (const auto& r : log) (r.chosen == ActionSource::kDt ? dt_steps : idm_steps)++;
  }
  t.expect(dt_steps > 0 && idm_steps > 0, "one source never selected");
  const SelectionLog hand{{0, 0.0, 0.0, 0, 0, ActionSource::kDt, 0.0},
                          {1, 2.0, 2.0, 0, 0, ActionSource::kDt, 2.0}};
  const auto vol = volatility_analysis(std::vector<SelectionLog>{hand});
  t.expect(vol.dt.variance == 2.0 && vol.dt.mean == 1.0 && vol.dt.count == 2,
           "[0, 2] variance " + fmt(vol.dt.variance, 6));
  const auto& v = b.behavior.volatility;
  note = "std(a_idm) " + fmt(v.idm.std, 4) + (v.idm.std <= v.dt.std ? " <= " : " > ") +
         "std(a_dt) " + fmt(v.dt.std, 4) + " (reported, non-blocking)";
  return t.verdict("DT chosen " + std::to_string(dt_steps) + " steps, IDM " +
                   std::to_string(idm_steps) + "; " + note);
}

}  // namespace
}  // namespace guide

int main(int argc, char** argv) {
  using namespace guide;
  CLI::App app{"Acceptance run: one line per criterion"};
  std::string work = (fs::temp_directory_path() / "guide_acceptance").string();
  bool reuse = false;
  bool skip_benchmark = false;
  app.add_option("--work-dir", work, "Where models and reports are written");
  app.add_flag("--reuse", reuse, "Reuse benchmark checkpoints already in the work dir");
  app.add_flag("--skip-benchmark", skip_benchmark,
               "Run only the criteria that need no trained benchmark");
  CLI11_PARSE(app, argc, argv);
  torch::set_num_threads(1);
  fs::create_directories(work);

  struct Line {
    int id;
    std::string name;
    Verdict verdict;
    double seconds;
  };
  std::vector<Line> lines;
  auto run = [&](int id, const std::string& name, const std::function<Verdict()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    lines.push_back({id, name, v, secs});
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << std::setw(2) << id << " " << name
              << ": " << v.detail << " [" << fmt(secs, 1) << " s]" << std::endl;
  };

  run(1, "formula suite", formula_suite);
  run(2, "stop-gradient", stop_gradient_suite);
  run(3, "gradient correctness", gradient_suite);
  run(4, "causality", causality_suite);
  run(5, "tabular critic oracle", tabular_suite);
  run(6, "selection correctness", selection_suite);

  std::optional<Benchmark> bench;
  if (!skip_benchmark) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      bench = run_benchmark(fs::path(work) / "benchmark", reuse);
    } catch (const std::exception& e) {
      std::cerr << "benchmark failed: " << e.what() << std::endl;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "  .. benchmark pipeline " << fmt(secs, 0) << " s" << std::endl;
  }
  auto need = [&](const std::function<Verdict(const Benchmark&)>& fn) {
    return [&bench, fn]() -> Verdict {
      if (!bench) return {false, "benchmark unavailable"};
      return fn(*bench);
    };
  };
  if (!skip_benchmark) {
    std::string note;
    run(7, "end-to-end ordering", need(ordering_suite));
    run(8, "ablation ordering", need(ablation_suite));
    run(9, "behavioral analyses",
        need([&note](const Benchmark& b) { return behavior_suite(b, note); }));
  }
  run(10, "determinism", [&] { return determinism_suite(work); });
  run(11, "pearson", pearson_suite);

  int failed = 0;
  for (const auto& l : lines) failed += !l.verdict.pass;
  std::cout << (lines.size() - failed) << "/" << lines.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
