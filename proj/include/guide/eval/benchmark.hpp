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

// Budget sweep, baselines and ablation harness.
//
// Every evaluation episode is addressed by (seed, cell, index): cell c of a
// sweep runs its i-th episode with env seed derive_seed(seed, {c, i}), so
// adding episodes or methods never changes the episodes already scored.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guide/env/auction_env.hpp"
#include "guide/eval/metrics.hpp"
#include "guide/model/checkpoint.hpp"
#include "guide/policy/bidding_policy.hpp"
#include "guide/policy/guide_policy.hpp"
#include "guide/train/trainer.hpp"

namespace guide {

inline constexpr std::array<double, 5> kBudgetFractions{0.5, 0.75, 1.0, 1.25, 1.5};
inline constexpr int kDefaultEpisodesPerCell = 20;

// The models a full benchmark trains, each a documented delta on TrainConfig.
enum class ModelKind { kGuide, kNoQOptimization, kNoActionModeling, kVanillaDt, kBc };

inline constexpr std::array<ModelKind, 5> kAllModelKinds{
    ModelKind::kGuide, ModelKind::kNoQOptimization, ModelKind::kNoActionModeling,
    ModelKind::kVanillaDt, ModelKind::kBc};

std::string_view to_string(ModelKind kind);
// Parses the names produced by to_string. Throws ConfigError.
ModelKind parse_model_kind(std::string_view name);
std::string checkpoint_file_name(ModelKind kind);

// kNoQOptimization: q_reg_weight = 0.
// kNoActionModeling: no action loss, q_reg_weight = 0 (IDM acts alone).
// kVanillaDt: action loss only, no state head loss, IDM or critics.
// kBc and kGuide: unchanged.
TrainConfig training_config_for(ModelKind kind, TrainConfig base);

// Resolves model checkpoints inside one directory, loading each at most once.
class CheckpointSet {
 public:
  explicit CheckpointSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  // Overrides the file used for one kind.
  void set_path(ModelKind kind, std::filesystem::path path);
  std::filesystem::path path(ModelKind kind) const;
  bool has(ModelKind kind) const;

  // Throw MissingCheckpoint when the file does not exist.
  const GuideModel& model(ModelKind kind);
  const BcModel& bc();

 private:
  std::filesystem::path dir_;
  std::map<ModelKind, std::filesystem::path> overrides_;
  std::map<ModelKind, GuideModel> models_;
  std::optional<BcModel> bc_;
};

struct MethodSpec {
  std::string name;
  std::function<std::unique_ptr<BiddingPolicy>()> make;
};

struct SweepCell {
  double fraction = 1.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> scores;
  SampleStats stats;
};

struct SweepResult {
  std::string method;
  std::vector<SweepCell> cells;
};

// Env config of episode `index` in cell `cell`.
AuctionEpisodeConfig cell_episode(const AuctionEpisodeConfig& base, double fraction,
                                  std::uint64_t seed, std::size_t cell, int index);

// Rows in method order, cells in fraction order. If logs is non-null, the
// selection logs of GuidePolicy-based methods are appended per episode.
std::vector<SweepResult> run_sweep(
    std::span<const MethodSpec> methods, const AuctionEpisodeConfig& base,
    std::span<const double> fractions, int episodes_per_cell, std::uint64_t seed,
    std::map<std::string, std::vector<SelectionLog>>* logs = nullptr);

// method,<fraction>... with cell means; a second file holds the std.
void write_sweep_csv(std::span<const SweepResult> rows,
                     const std::filesystem::path& mean_path,
                     const std::filesystem::path& std_path);
// method,fraction,episode,seed,score
void write_sweep_episodes_csv(std::span<const SweepResult> rows,
                              const std::filesystem::path& path);

struct BaselineOptions {
  std::vector<double> lambda_grid;  // empty: 0.3 .. 2.0 in steps of 0.05
  int calibration_episodes = 20;
  GuidePolicyOptions policy;        // shared by the sequence-model methods
};

// Constant multiplier tuned at the base config on calibration episodes whose
// seeds are derived from substream(seed, "calibration"), disjoint from the
// sweep episodes.
double tuned_constant_lambda(const AuctionEpisodeConfig& base, std::uint64_t seed,
                             const BaselineOptions& options);

// guide, dt, bc (when their checkpoints exist; guide is required), constant
// and pid.
std::vector<MethodSpec> standard_methods(CheckpointSet& checkpoints,
                                         const AuctionEpisodeConfig& base,
                                         std::uint64_t seed,
                                         const BaselineOptions& options);

enum class AblationVariant {
  kFull,
  kNoIdmAction,
  kNoDtAction,
  kNoQOptimization,
  kNoQSelection,
  kNoActionModeling,
  kOriginalDt,
};

inline constexpr std::array<AblationVariant, 7> kAllVariants{
    AblationVariant::kFull,           AblationVariant::kNoIdmAction,
    AblationVariant::kNoDtAction,     AblationVariant::kNoQOptimization,
    AblationVariant::kNoQSelection,   AblationVariant::kNoActionModeling,
    AblationVariant::kOriginalDt};

std::string_view to_string(AblationVariant v);

struct AblationSpec {
  AblationVariant variant = AblationVariant::kFull;
  ModelKind model = ModelKind::kGuide;  // which trained model it runs
  SelectionMode mode = SelectionMode::kArgmaxQ;
};

AblationSpec ablation_spec(AblationVariant variant);

struct AblationResult {
  AblationVariant variant = AblationVariant::kFull;
  std::vector<std::uint64_t> seeds;
  std::vector<double> scores;
  SampleStats stats;
};

// Runs `episodes` seeded episodes of the variant at the base config. Every
// variant sees the same episode seeds. Throws MissingCheckpoint.
AblationResult run_ablation(const AblationSpec& spec, CheckpointSet& checkpoints,
                            const AuctionEpisodeConfig& base, std::uint64_t seed,
                            int episodes, const GuidePolicyOptions& policy = {});

// variant,mean,std,episodes
void write_ablation_csv(std::span<const AblationResult> results,
                        const std::filesystem::path& path);
// variant,episode,seed,score
void write_ablation_episodes_csv(std::span<const AblationResult> results,
                                 const std::filesystem::path& path);

// Pooled standard deviation of two samples.
double pooled_std(const SampleStats& a, const SampleStats& b);

struct BehaviorAnalysis {
  std::vector<SelectionLog> logs;
  std::vector<PreferenceShare> preference;
  VolatilityReport volatility;
  std::vector<double> cost_correlation;  // per episode; NaN if degenerate
  std::vector<double> budgets;
  std::vector<Tier> budget_tiers;
};

// GUIDE rollouts over every sweep cell with the sweep's episode seeds.
BehaviorAnalysis analyze_behavior(const GuideModel& model,
                                  const AuctionEpisodeConfig& base,
                                  std::span<const double> fractions,
                                  int episodes_per_cell, std::uint64_t seed,
                                  const GuidePolicyOptions& policy = {});

// preference.csv, volatility.csv, selection.csv, cost_correlation.csv.
void write_behavior_reports(const BehaviorAnalysis& analysis,
                            const std::filesystem::path& dir);

}  // namespace guide
