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

// Versioned binary dataset container (all integers and reals little-endian):
//
//   header   "GUIDEDAT" | u32 version | u32 state_dim | u32 steps | u32 0
//            | u64 trajectory_count
//   record   u64 payload_bytes | payload
//   payload  f64 budget | f64 cpa_limit | u64 seed | u32 length
//            | f64 states[length * state_dim] | f64 actions[length]
//            | f64 rewards[length] | f64 returns_to_go[length]
//   footer   u64 FNV-1a of every preceding byte
//
// Any mismatch on load raises VersionOrCorruption.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "guide/data/trajectory.hpp"

namespace guide {

inline constexpr std::uint32_t kDatasetVersion = 1;

struct DatasetFile {
  Dataset trajectories;
  std::uint32_t steps = 0;  // declared episode length; 0 for an empty file
};

std::vector<std::uint8_t> encode_dataset(const Dataset& dataset,
                                         std::uint32_t steps);
DatasetFile decode_dataset(std::span<const std::uint8_t> bytes);

// `steps` defaults to the length of the first trajectory.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  std::optional<std::uint32_t> steps = std::nullopt);
Dataset load_dataset(const std::filesystem::path& path);

// Human-readable companion listing counts, T, state_dim and norm stats.
void write_manifest(const Dataset& dataset, const NormStats* stats,
                    const std::filesystem::path& path);

}  // namespace guide
