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

// Line-delimited JSON episode logs, one object per step:
//   {"step":0,"lambda":0.8,"wins":12,"impressions":61,"cost":9.5,
//    "value":14.2,"budget_remaining":1190.5}

#include <filesystem>
#include <string>
#include <vector>

#include "guide/env/auction_env.hpp"

namespace guide {

struct EpisodeLogRecord {
  int step = 0;
  double lambda = 0.0;
  int wins = 0;
  int impressions = 0;
  double cost = 0.0;
  double value = 0.0;
  double budget_remaining = 0.0;

  friend bool operator==(const EpisodeLogRecord&, const EpisodeLogRecord&) = default;
};

std::vector<EpisodeLogRecord> episode_log(const CampaignLedger& ledger);

std::string encode_episode_log(const std::vector<EpisodeLogRecord>& records);
// Throws VersionOrCorruption naming the first malformed line.
std::vector<EpisodeLogRecord> decode_episode_log(const std::string& text);

void write_episode_log(const CampaignLedger& ledger,
                       const std::filesystem::path& path);
std::vector<EpisodeLogRecord> read_episode_log(const std::filesystem::path& path);

}  // namespace guide
