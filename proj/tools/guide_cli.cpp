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

// guide: data generation, training, evaluation and rollouts.
//
// Relative --out-dir paths resolve under $GUIDE_OUTPUT_ROOT when it is set.
// Every output directory gets a summary.json with the config hash and the
// seeds that produced it, plus a copy of the resolved config.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "CLI11.hpp"
#include "guide/cli/run_config.hpp"
#include "guide/common/errors.hpp"
#include "guide/common/seeding.hpp"
#include "guide/data/dataset_io.hpp"
#include "guide/data/generate.hpp"
#include "guide/env/episode_log.hpp"
#include "guide/eval/benchmark.hpp"
#include "guide/model/checkpoint.hpp"
#include "guide/policy/guide_policy.hpp"
#include "guide/train/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace guide {
namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path,
                  "Run config (JSON); defaults to the built-in benchmark preset");
  cmd->add_option("--seed", args.seed, "Overrides the config's top-level seed");
  cmd->add_option("-o,--out-dir", args.out_dir, "Output directory")->required();
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config =
      args.config_path.empty() ? default_run_config() : load_run_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  config.validate();
  return config;
}

fs::path resolve_out_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("GUIDE_OUTPUT_ROOT"); root && *root) {
      p = fs::path(root) / p;
    }
  }
  fs::create_directories(p);
  return p;
}

json seed_block(const RunConfig& config) {
  return {{"seed", config.seed},
          {"env", config.env_seed()},
          {"data", config.data_seed()},
          {"train", config.train_seed()},
          {"eval", config.eval_seed()}};
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_summary(const fs::path& dir, const std::string& command,
                   const RunConfig& config, json extra) {
  json doc = {{"command", command},
              {"config_hash", config_hash(config)},
              {"seeds", seed_block(config)}};
  doc.update(extra);
  write_json(doc, dir / "summary.json");
  save_run_config(config, dir / "config.json");
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  CommonArgs common;
  std::optional<int> episodes;
};

void cmd_gen_data(const GenDataArgs& args) {
  RunConfig config = resolve_config(args.common);
  if (args.episodes) {
    if (*args.episodes < 0) throw ConfigError("--episodes must be >= 0");
    config.data.num_episodes = *args.episodes;
  }
  const fs::path dir = resolve_out_dir(args.common.out_dir);
  const Dataset data = generate_dataset(config.env, config.data.num_episodes,
                                        config.data_seed(), config.data.mix);
  save_dataset(data, dir / "dataset.bin", static_cast<std::uint32_t>(config.env.steps));
  std::optional<NormStats> stats;
  if (!data.empty()) stats = fit_norm_stats(data);
  write_manifest(data, stats ? &*stats : nullptr, dir / "manifest.txt");

  json episode_seeds = json::array();
  for (const auto& t : data) episode_seeds.push_back(t.meta.seed);
  write_summary(dir, "gen-data", config,
                {{"episodes", data.size()}, {"episode_seeds", episode_seeds}});
  std::cout << "wrote " << data.size() << " trajectories to "
            << (dir / "dataset.bin").string() << '\n';
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  CommonArgs common;
  std::string data_path;
  std::vector<std::string> variants{"guide"};
  std::string resume;
  int checkpoint_every = 0;
};

void cmd_train(const TrainArgs& args) {
  const RunConfig config = resolve_config(args.common);
  if (!fs::exists(args.data_path)) {
    throw IoError("data file not found: " + args.data_path);
  }
  const Dataset data = load_dataset(args.data_path);

  std::vector<ModelKind> kinds;
  for (const auto& v : args.variants) {
    if (v == "all") {
      kinds.assign(kAllModelKinds.begin(), kAllModelKinds.end());
      break;
    }
    kinds.push_back(parse_model_kind(v));
  }
  if (!args.resume.empty() && kinds.size() != 1) {
    throw ConfigError("--resume needs exactly one --variant");
  }

  const fs::path dir = resolve_out_dir(args.common.out_dir);
  json trained = json::object();
  for (ModelKind kind : kinds) {
    const std::string name(to_string(kind));
    const TrainConfig tc = training_config_for(kind, config.train_config());
    const fs::path ckpt = dir / checkpoint_file_name(kind);
    std::vector<LossReport> history;
    std::int64_t final_step = 0;
    if (kind == ModelKind::kBc) {
      if (!args.resume.empty()) throw ConfigError("--resume is not supported for bc");
      auto result = train_bc(data, tc, config.model);
      final_step = tc.phase1_steps + tc.phase2_steps;
      save_bc_checkpoint(result.model, {final_step, name}, ckpt);
      history = std::move(result.history);
    } else {
      TrainOptions options;
      options.variant = name;
      if (args.checkpoint_every > 0) {
        options.checkpoint_dir = dir / (name + "_steps");
        options.checkpoint_every = args.checkpoint_every;
      }
      TrainResult result =
          args.resume.empty()
              ? train(data, tc, config.model, options)
              : resume_training(data, tc, load_checkpoint(args.resume), options);
      final_step = tc.phase1_steps + tc.phase2_steps;
      save_checkpoint(result.model, {final_step, name}, ckpt);
      history = std::move(result.history);
    }
    write_loss_csv(history, dir / (name + "_loss.csv"));
    trained[name] = {{"checkpoint", ckpt.filename().string()},
                     {"steps_run", history.size()},
                     {"final_step", final_step}};
    std::cout << "trained " << name << " -> " << ckpt.string() << '\n';
  }
  write_summary(dir, "train", config,
                {{"data", fs::path(args.data_path).filename().string()},
                 {"resumed_from", args.resume},
                 {"models", trained}});
}

// ---------------------------------------------------------------------------
// evaluate / ablate

struct EvalArgs {
  CommonArgs common;
  std::string checkpoint_dir;
  std::string guide_checkpoint;
  bool sweep = false;
  bool ablate = false;
  bool analyze = false;
};

json seeds_of(const std::vector<std::uint64_t>& seeds) { return json(seeds); }

void cmd_evaluate(EvalArgs args, const std::string& command) {
  const RunConfig config = resolve_config(args.common);
  if (!args.sweep && !args.ablate && !args.analyze) args.sweep = true;
  if (args.checkpoint_dir.empty() && args.guide_checkpoint.empty()) {
    throw ConfigError("--checkpoints or --checkpoint is required");
  }
  CheckpointSet checkpoints(args.checkpoint_dir.empty()
                                ? fs::path(args.guide_checkpoint).parent_path()
                                : fs::path(args.checkpoint_dir));
  if (!args.guide_checkpoint.empty()) {
    checkpoints.set_path(ModelKind::kGuide, args.guide_checkpoint);
  }
  if (!checkpoints.has(ModelKind::kGuide)) {
    throw MissingCheckpoint("missing checkpoint " +
                            checkpoints.path(ModelKind::kGuide).string());
  }

  const fs::path dir = resolve_out_dir(args.common.out_dir);
  const GuidePolicyOptions policy = config.eval.policy();
  const std::uint64_t seed = config.eval_seed();
  json reports = json::array();
  json extra = json::object();

  if (args.sweep) {
    BaselineOptions baseline;
    baseline.calibration_episodes = config.eval.calibration_episodes;
    baseline.policy = policy;
    const auto methods = standard_methods(checkpoints, config.env, seed, baseline);
    const auto rows = run_sweep(methods, config.env, config.eval.fractions,
                                config.eval.episodes_per_cell, seed);
    write_sweep_csv(rows, dir / "sweep_mean.csv", dir / "sweep_std.csv");
    write_sweep_episodes_csv(rows, dir / "sweep_episodes.csv");
    reports.insert(reports.end(), {"sweep_mean.csv", "sweep_std.csv", "sweep_episodes.csv"});
    json cells = json::array();
    for (const auto& cell : rows.front().cells) {
      cells.push_back({{"fraction", cell.fraction}, {"seeds", seeds_of(cell.seeds)}});
    }
    extra["sweep"] = {{"methods", json::array()}, {"cells", cells}};
    for (const auto& m : methods) extra["sweep"]["methods"].push_back(m.name);
    extra["sweep"]["constant_lambda"] = tuned_constant_lambda(config.env, seed, baseline);
    extra["sweep"]["calibration_seed"] = substream(seed, "calibration");
  }

  if (args.ablate) {
    std::vector<AblationResult> results;
    for (AblationVariant v : kAllVariants) {
      results.push_back(run_ablation(ablation_spec(v), checkpoints, config.env, seed,
                                     config.eval.ablation_episodes, policy));
    }
    write_ablation_csv(results, dir / "ablation.csv");
    write_ablation_episodes_csv(results, dir / "ablation_episodes.csv");
    reports.insert(reports.end(), {"ablation.csv", "ablation_episodes.csv"});
    extra["ablation"] = {{"variants", json::array()},
                         {"seeds", seeds_of(results.front().seeds)}};
    for (const auto& r : results) {
      extra["ablation"]["variants"].push_back(std::string(to_string(r.variant)));
    }
  }

  if (args.analyze) {
    const auto analysis =
        analyze_behavior(checkpoints.model(ModelKind::kGuide), config.env,
                         config.eval.fractions, config.eval.episodes_per_cell, seed,
                         policy);
    const fs::path sub = dir / "behavior";
    fs::create_directories(sub);
    write_behavior_reports(analysis, sub);
    for (const char* f : {"preference.csv", "volatility.csv", "selection.csv",
                          "cost_correlation.csv"}) {
      reports.push_back(std::string("behavior/") + f);
    }
  }

  extra["reports"] = reports;
  extra["checkpoint"] = checkpoints.path(ModelKind::kGuide).filename().string();
  write_summary(dir, command, config, extra);
  for (const auto& r : reports) {
    std::cout << "wrote " << (dir / r.get<std::string>()).string() << '\n';
  }
}

// ---------------------------------------------------------------------------
// rollout

struct RolloutArgs {
  CommonArgs common;
  std::string checkpoint;
  double fraction = 1.0;
  int episode = 0;
  std::string mode = "argmax";
};

SelectionMode parse_mode(const std::string& mode) {
  if (mode == "argmax") return SelectionMode::kArgmaxQ;
  if (mode == "dt") return SelectionMode::kDtOnly;
  if (mode == "idm") return SelectionMode::kIdmOnly;
  if (mode == "coin") return SelectionMode::kCoin;
  throw ConfigError("--mode: expected argmax, dt, idm or coin, got '" + mode + "'");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void cmd_rollout(const RolloutArgs& args) {
  const RunConfig config = resolve_config(args.common);
  if (!(args.fraction > 0.0)) throw ConfigError("--fraction must be > 0");
  if (args.episode < 0) throw ConfigError("--episode must be >= 0");
  GuideModel model = load_checkpoint(args.checkpoint).model;
  GuidePolicyOptions options = config.eval.policy();
  options.mode = parse_mode(args.mode);
  options.coin_seed = substream(config.eval_seed(), "coin");

  // Rollouts use a cell id outside the sweep's range.
  constexpr std::size_t kRolloutCell = 2000;
  const AuctionEpisodeConfig env = cell_episode(
      config.env, args.fraction, config.eval_seed(), kRolloutCell, args.episode);
  const RolloutResult r = rollout(model, env, options);

  const fs::path dir = resolve_out_dir(args.common.out_dir);
  write_episode_log(r.ledger, dir / "episode_log.jsonl");
  write_selection_csv(std::vector<SelectionLog>{r.selection_log}, dir / "selection.csv");
  {
    std::ofstream out(dir / "rollout.csv");
    out << "step,lambda,reward,cost,wins,impressions,offered_value\n";
    for (int t = 0; t < r.ledger.step_index; ++t) {
      out << t << ',' << fmt(r.ledger.lambda_by_step[t]) << ','
          << fmt(r.trajectory.rewards[t]) << ',' << fmt(r.ledger.cost_by_step[t]) << ','
          << r.ledger.wins_by_step[t] << ',' << r.ledger.impressions_by_step[t] << ','
          << fmt(r.offered_value_by_step[t]) << '\n';
    }
    if (!out) throw IoError("write failed for rollout.csv");
  }
  json score = {{"score", r.score.score},
                {"raw_value", r.score.raw_value},
                {"penalty", r.score.penalty},
                {"cpa_limit", r.score.cpa_limit},
                {"realized_cpa", r.score.realized_cpa ? json(*r.score.realized_cpa)
                                                      : json(nullptr)}};
  write_summary(dir, "rollout", config,
                {{"checkpoint", fs::path(args.checkpoint).filename().string()},
                 {"fraction", args.fraction},
                 {"episode", args.episode},
                 {"episode_seed", env.seed},
                 {"mode", args.mode},
                 {"score", score}});
  std::cout << "score " << fmt(r.score.score) << " (raw " << fmt(r.score.raw_value)
            << ", penalty " << fmt(r.score.penalty) << ")\n";
}

}  // namespace
}  // namespace guide

int main(int argc, char** argv) {
  using namespace guide;
  torch::set_num_threads(1);

  CLI::App app{"Offline auto-bidding workbench"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Log behavior-policy trajectories");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("-n,--episodes", gen.episodes,
                      "Number of episodes (default: data.num_episodes)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train models on a dataset");
  add_common(train_cmd, tr.common);
  train_cmd->add_option("-d,--data", tr.data_path, "Dataset file")->required();
  train_cmd->add_option("--variant", tr.variants,
                        "guide, no_q_opt, no_action, dt, bc or all (repeatable)");
  train_cmd->add_option("--resume", tr.resume, "Checkpoint to continue from");
  train_cmd->add_option("--checkpoint-every", tr.checkpoint_every,
                        "Write step_NNNNNN.ckpt every N steps");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Budget sweep, ablations, analyses");
  add_common(eval_cmd, ev.common);
  eval_cmd->add_option("--checkpoints", ev.checkpoint_dir,
                       "Directory holding <variant>.ckpt files");
  eval_cmd->add_option("--checkpoint", ev.guide_checkpoint,
                       "GUIDE checkpoint (overrides <checkpoints>/guide.ckpt)");
  eval_cmd->add_flag("--sweep", ev.sweep, "Budget-fraction table (default)");
  eval_cmd->add_flag("--ablate", ev.ablate, "All seven ablation variants");
  eval_cmd->add_flag("--analyze", ev.analyze, "Preference, volatility, cost correlation");

  EvalArgs ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Same as evaluate --ablate");
  add_common(ablate_cmd, ab.common);
  ablate_cmd->add_option("--checkpoints", ab.checkpoint_dir,
                         "Directory holding <variant>.ckpt files");
  ablate_cmd->add_option("--checkpoint", ab.guide_checkpoint, "GUIDE checkpoint");

  RolloutArgs ro;
  auto* rollout_cmd = app.add_subcommand("rollout", "One closed-loop GUIDE episode");
  add_common(rollout_cmd, ro.common);
  rollout_cmd->add_option("--checkpoint", ro.checkpoint, "GUIDE checkpoint")->required();
  rollout_cmd->add_option("--fraction", ro.fraction, "Budget fraction of env.budget");
  rollout_cmd->add_option("--episode", ro.episode, "Episode index");
  rollout_cmd->add_option("--mode", ro.mode, "argmax, dt, idm or coin");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) cmd_gen_data(gen);
    if (*train_cmd) cmd_train(tr);
    if (*eval_cmd) cmd_evaluate(ev, "evaluate");
    if (*ablate_cmd) {
      ab.ablate = true;
      cmd_evaluate(ab, "ablate");
    }
    if (*rollout_cmd) cmd_rollout(ro);
  } catch (const guide::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
