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

#include "guide/eval/benchmark.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "guide/common/binary_io.hpp"
#include "guide/common/errors.hpp"
#include "guide/common/seeding.hpp"
#include "guide/policy/heuristics.hpp"

namespace guide {
namespace {

// Coordinates reserved for non-sweep episode families.
constexpr std::uint64_t kAblationCell = 1000;

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

std::ostringstream csv_stream() {
  std::ostringstream out;
  out << std::setprecision(17);
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGuide: return "guide";
    case ModelKind::kNoQOptimization: return "no_q_opt";
    case ModelKind::kNoActionModeling: return "no_action";
    case ModelKind::kVanillaDt: return "dt";
    case ModelKind::kBc: return "bc";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto kind : kAllModelKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown model kind '" + std::string(name) +
                    "' (expected guide, no_q_opt, no_action, dt or bc)");
}

std::string checkpoint_file_name(ModelKind kind) {
  return std::string(to_string(kind)) + ".ckpt";
}

TrainConfig training_config_for(ModelKind kind, TrainConfig base) {
  switch (kind) {
    case ModelKind::kGuide:
    case ModelKind::kBc:
      break;
    case ModelKind::kNoQOptimization:
      base.q_reg_weight = 0.0;
      break;
    case ModelKind::kNoActionModeling:
      base.action_loss = false;
      base.q_reg_weight = 0.0;
      break;
    case ModelKind::kVanillaDt:
      base.state_loss = false;
      base.idm_loss = false;
      base.train_critics = false;
      base.q_reg_weight = 0.0;
      break;
  }
  return base;
}

// ---------------------------------------------------------------------------

void CheckpointSet::set_path(ModelKind kind, std::filesystem::path path) {
  overrides_[kind] = std::move(path);
  models_.erase(kind);
  if (kind == ModelKind::kBc) bc_.reset();
}

std::filesystem::path CheckpointSet::path(ModelKind kind) const {
  if (auto it = overrides_.find(kind); it != overrides_.end()) return it->second;
  return dir_ / checkpoint_file_name(kind);
}

bool CheckpointSet::has(ModelKind kind) const {
  return std::filesystem::exists(path(kind));
}

const GuideModel& CheckpointSet::model(ModelKind kind) {
  if (kind == ModelKind::kBc) {
    throw ConfigError("bc checkpoints hold no sequence model");
  }
  auto it = models_.find(kind);
  if (it == models_.end()) {
    it = models_.emplace(kind, load_checkpoint(path(kind)).model).first;
  }
  return it->second;
}

const BcModel& CheckpointSet::bc() {
  if (!bc_) bc_.emplace(load_bc_checkpoint(path(ModelKind::kBc)).model);
  return *bc_;
}

// ---------------------------------------------------------------------------

AuctionEpisodeConfig cell_episode(const AuctionEpisodeConfig& base, double fraction,
                                  std::uint64_t seed, std::size_t cell, int index) {
  AuctionEpisodeConfig c = base;
  c.budget = base.budget * fraction;
  c.seed = derive_seed(seed, {static_cast<std::uint64_t>(cell),
                              static_cast<std::uint64_t>(index)});
  return c;
}

std::vector<SweepResult> run_sweep(
    std::span<const MethodSpec> methods, const AuctionEpisodeConfig& base,
    std::span<const double> fractions, int episodes_per_cell, std::uint64_t seed,
    std::map<std::string, std::vector<SelectionLog>>* logs) {
  if (episodes_per_cell < 1) throw ConfigError("episodes_per_cell must be >= 1");
  std::vector<SweepResult> rows;
  for (const auto& method : methods) {
    SweepResult row;
    row.method = method.name;
    for (std::size_t c = 0; c < fractions.size(); ++c) {
      SweepCell cell;
      cell.fraction = fractions[c];
      for (int i = 0; i < episodes_per_cell; ++i) {
        const auto env = cell_episode(base, fractions[c], seed, c, i);
        auto policy = method.make();
        const auto rec = run_episode(env, *policy);
        cell.seeds.push_back(env.seed);
        cell.scores.push_back(compute_score(rec.ledger, env.cpa_limit).score);
        if (logs) {
          if (const auto* g = dynamic_cast<const GuidePolicy*>(policy.get())) {
            (*logs)[method.name].push_back(g->selection_log());
          }
        }
      }
      cell.stats = sample_stats(cell.scores);
      row.cells.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::span<const SweepResult> rows,
                     const std::filesystem::path& mean_path,
                     const std::filesystem::path& std_path) {
  auto mean = csv_stream();
  auto spread = csv_stream();
  mean << "method";
  spread << "method";
  if (!rows.empty()) {
    for (const auto& cell : rows.front().cells) {
      mean << ',' << cell.fraction;
      spread << ',' << cell.fraction;
    }
  }
  mean << '\n';
  spread << '\n';
  for (const auto& row : rows) {
    mean << row.method;
    spread << row.method;
    for (const auto& cell : row.cells) {
      mean << ',' << cell.stats.mean;
      spread << ',' << cell.stats.std;
    }
    mean << '\n';
    spread << '\n';
  }
  write_text(mean_path, mean.str());
  write_text(std_path, spread.str());
}

void write_sweep_episodes_csv(std::span<const SweepResult> rows,
                              const std::filesystem::path& path) {
  auto out = csv_stream();
  out << "method,fraction,episode,seed,score\n";
  for (const auto& row : rows) {
    for (const auto& cell : row.cells) {
      for (std::size_t i = 0; i < cell.scores.size(); ++i) {
        out << row.method << ',' << cell.fraction << ',' << i << ',' << cell.seeds[i]
            << ',' << cell.scores[i] << '\n';
      }
    }
  }
  write_text(path, out.str());
}

// ---------------------------------------------------------------------------

double tuned_constant_lambda(const AuctionEpisodeConfig& base, std::uint64_t seed,
                             const BaselineOptions& options) {
  std::vector<double> grid = options.lambda_grid;
  if (grid.empty()) {
    for (int i = 0; i <= 34; ++i) grid.push_back(0.3 + 0.05 * i);
  }
  return tune_constant_lambda(base, grid, options.calibration_episodes,
                              substream(seed, "calibration"));
}

std::vector<MethodSpec> standard_methods(CheckpointSet& checkpoints,
                                         const AuctionEpisodeConfig& base,
                                         std::uint64_t seed,
                                         const BaselineOptions& options) {
  std::vector<MethodSpec> methods;
  {
    const GuideModel& model = checkpoints.model(ModelKind::kGuide);
    GuidePolicyOptions o = options.policy;
    o.mode = SelectionMode::kArgmaxQ;
    o.name = "guide";
    methods.push_back({"guide", [&model, o] {
                         return std::make_unique<GuidePolicy>(model, o);
                       }});
  }
  if (checkpoints.has(ModelKind::kVanillaDt)) {
    const GuideModel& model = checkpoints.model(ModelKind::kVanillaDt);
    GuidePolicyOptions o = options.policy;
    o.mode = SelectionMode::kDtOnly;
    o.name = "dt";
    methods.push_back({"dt", [&model, o] {
                         return std::make_unique<GuidePolicy>(model, o);
                       }});
  }
  if (checkpoints.has(ModelKind::kBc)) {
    const BcModel& model = checkpoints.bc();
    methods.push_back({"bc", [&model] { return std::make_unique<BcPolicy>(model); }});
  }
  const double lambda = tuned_constant_lambda(base, seed, options);
  methods.push_back({"constant", [lambda] {
                       return std::make_unique<ConstantLambdaPolicy>(lambda);
                     }});
  methods.push_back({"pid", [] { return std::make_unique<PidPacingPolicy>(); }});
  return methods;
}

// ---------------------------------------------------------------------------

std::string_view to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::kFull: return "full";
    case AblationVariant::kNoIdmAction: return "no_idm_action";
    case AblationVariant::kNoDtAction: return "no_dt_action";
    case AblationVariant::kNoQOptimization: return "no_q_optimization";
    case AblationVariant::kNoQSelection: return "no_q_selection";
    case AblationVariant::kNoActionModeling: return "no_action_modeling";
    case AblationVariant::kOriginalDt: return "original_dt";
  }
  return "unknown";
}

AblationSpec ablation_spec(AblationVariant variant) {
  AblationSpec s;
  s.variant = variant;
  switch (variant) {
    case AblationVariant::kFull:
      break;
    case AblationVariant::kNoIdmAction:
      s.mode = SelectionMode::kDtOnly;
      break;
    case AblationVariant::kNoDtAction:
      s.mode = SelectionMode::kIdmOnly;
      break;
    case AblationVariant::kNoQOptimization:
      s.model = ModelKind::kNoQOptimization;
      break;
    case AblationVariant::kNoQSelection:
      s.mode = SelectionMode::kCoin;
      break;
    case AblationVariant::kNoActionModeling:
      s.model = ModelKind::kNoActionModeling;
      s.mode = SelectionMode::kIdmOnly;
      break;
    case AblationVariant::kOriginalDt:
      s.model = ModelKind::kVanillaDt;
      s.mode = SelectionMode::kDtOnly;
      break;
  }
  return s;
}

AblationResult run_ablation(const AblationSpec& spec, CheckpointSet& checkpoints,
                            const AuctionEpisodeConfig& base, std::uint64_t seed,
                            int episodes, const GuidePolicyOptions& policy) {
  if (episodes < 1) throw ConfigError("ablation episodes must be >= 1");
  const GuideModel& model = checkpoints.model(spec.model);
  GuidePolicyOptions o = policy;
  o.mode = spec.mode;
  o.name = std::string(to_string(spec.variant));
  o.coin_seed = substream(seed, "coin");
  AblationResult result;
  result.variant = spec.variant;
  for (int i = 0; i < episodes; ++i) {
    const auto env = cell_episode(base, 1.0, seed, kAblationCell, i);
    GuidePolicy p(model, o);
    const auto rec = run_episode(env, p);
    result.seeds.push_back(env.seed);
    result.scores.push_back(compute_score(rec.ledger, env.cpa_limit).score);
  }
  result.stats = sample_stats(result.scores);
  return result;
}

void write_ablation_csv(std::span<const AblationResult> results,
                        const std::filesystem::path& path) {
  auto out = csv_stream();
  out << "variant,mean,std,episodes\n";
  for (const auto& r : results) {
    out << to_string(r.variant) << ',' << r.stats.mean << ',' << r.stats.std << ','
        << r.stats.count << '\n';
  }
  write_text(path, out.str());
}

void write_ablation_episodes_csv(std::span<const AblationResult> results,
                                 const std::filesystem::path& path) {
  auto out = csv_stream();
  out << "variant,episode,seed,score\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
      out << to_string(r.variant) << ',' << i << ',' << r.seeds[i] << ','
          << r.scores[i] << '\n';
    }
  }
  write_text(path, out.str());
}

double pooled_std(const SampleStats& a, const SampleStats& b) {
  const double dof = static_cast<double>(a.count + b.count) - 2.0;
  if (dof <= 0.0) return 0.0;
  return std::sqrt(((static_cast<double>(a.count) - 1.0) * a.variance +
                    (static_cast<double>(b.count) - 1.0) * b.variance) /
                   dof);
}

// ---------------------------------------------------------------------------

BehaviorAnalysis analyze_behavior(const GuideModel& model,
                                  const AuctionEpisodeConfig& base,
                                  std::span<const double> fractions,
                                  int episodes_per_cell, std::uint64_t seed,
                                  const GuidePolicyOptions& policy) {
  BehaviorAnalysis a;
  GuidePolicyOptions o = policy;
  o.mode = SelectionMode::kArgmaxQ;
  for (std::size_t c = 0; c < fractions.size(); ++c) {
    for (int i = 0; i < episodes_per_cell; ++i) {
      const auto env = cell_episode(base, fractions[c], seed, c, i);
      GuidePolicy p(model, o);
      const auto rec = run_episode(env, p);
      a.logs.push_back(p.selection_log());
      a.budgets.push_back(env.budget);
      double r = std::numeric_limits<double>::quiet_NaN();
      try {
        const auto ideal =
            ideal_cost_trajectory(rec.offered_value_by_step, rec.ledger.spent);
        r = cost_trajectory_correlation(rec.ledger.cost_by_step, ideal);
      } catch (const DegenerateSeries&) {
      }
      a.cost_correlation.push_back(r);
    }
  }
  a.preference = preference_analysis(a.logs);
  a.volatility = volatility_analysis(a.logs);
  a.budget_tiers = classify_tiers(a.budgets);
  return a;
}

void write_behavior_reports(const BehaviorAnalysis& analysis,
                            const std::filesystem::path& dir) {
  auto pref = csv_stream();
  pref << "episode,budget,budget_tier,dt_share,idm_share,steps\n";
  for (const auto& p : analysis.preference) {
    const auto tier = analysis.budget_tiers[static_cast<std::size_t>(p.episode)];
    pref << p.episode << ',' << analysis.budgets[static_cast<std::size_t>(p.episode)]
         << ',' << (tier == Tier::kLow ? "low" : tier == Tier::kHigh ? "high" : "medium")
         << ',' << p.dt << ',' << p.idm << ',' << p.steps << '\n';
  }
  write_text(dir / "preference.csv", pref.str());

  auto vol = csv_stream();
  vol << "source,mean,variance,std,count\n";
  const auto row = [&](const char* name, const SampleStats& s) {
    vol << name << ',' << s.mean << ',' << s.variance << ',' << s.std << ','
        << s.count << '\n';
  };
  row("dt", analysis.volatility.dt);
  row("idm", analysis.volatility.idm);
  write_text(dir / "volatility.csv", vol.str());

  write_selection_csv(analysis.logs, dir / "selection.csv");

  auto corr = csv_stream();
  corr << "episode,budget,pearson\n";
  for (std::size_t i = 0; i < analysis.cost_correlation.size(); ++i) {
    corr << i << ',' << analysis.budgets[i] << ',' << analysis.cost_correlation[i]
         << '\n';
  }
  write_text(dir / "cost_correlation.csv", corr.str());
}

}  // namespace guide
