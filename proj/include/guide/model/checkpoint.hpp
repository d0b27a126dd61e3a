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

// Checkpoint container.
//
//   "GUIDECKP" | u32 version | str kind | model config | NormStats
//   | i64 train_step | str variant | u32 group_count
//   | per group: str name | u32 tensor_count
//       | per tensor: str name | u32 ndim | i64 dims[ndim] | f32 data
//   | u64 FNV-1a checksum of everything before it
//
// kind is "guide" (groups dt, idm, q1, q2, q1_target, q2_target) or "bc"
// (group bc). Loading rebuilds the networks from the stored config and
// rejects any tensor whose name or shape disagrees.

#include <cstdint>
#include <filesystem>
#include <string>

#include "guide/model/networks.hpp"

namespace guide {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::int64_t train_step = 0;
  std::string variant = "full";
};

void save_checkpoint(const GuideModel& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

struct LoadedModel {
  GuideModel model;
  CheckpointMeta meta;
};

// Throws MissingCheckpoint when the file is absent, VersionOrCorruption on a
// bad container and ShapeMismatch when a tensor disagrees with the config.
LoadedModel load_checkpoint(const std::filesystem::path& path);

void save_bc_checkpoint(const BcModel& model, const CheckpointMeta& meta,
                        const std::filesystem::path& path);

struct LoadedBc {
  BcModel model;
  CheckpointMeta meta;
};

LoadedBc load_bc_checkpoint(const std::filesystem::path& path);

}  // namespace guide
