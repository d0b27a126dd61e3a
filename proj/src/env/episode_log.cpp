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

#include "guide/env/episode_log.hpp"

#include <sstream>

#include "guide/common/binary_io.hpp"
#include "guide/common/errors.hpp"
#include "json.hpp"

namespace guide {

std::vector<EpisodeLogRecord> episode_log(const CampaignLedger& ledger) {
  std::vector<EpisodeLogRecord> out;
  double spent = 0.0;
  for (int t = 0; t < ledger.step_index; ++t) {
    spent = spent + ledger.cost_by_step[t];
    EpisodeLogRecord r;
    r.step = t;
    r.lambda = ledger.lambda_by_step[t];
    r.wins = ledger.wins_by_step[t];
    r.impressions = ledger.impressions_by_step[t];
    r.cost = ledger.cost_by_step[t];
    r.value = ledger.conversions_value_by_step[t];
    r.budget_remaining = ledger.budget_total - spent;
    out.push_back(r);
  }
  return out;
}

std::string encode_episode_log(const std::vector<EpisodeLogRecord>& records) {
  std::string text;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["lambda"] = r.lambda;
    j["wins"] = r.wins;
    j["impressions"] = r.impressions;
    j["cost"] = r.cost;
    j["value"] = r.value;
    j["budget_remaining"] = r.budget_remaining;
    text += j.dump();
    text += '\n';
  }
  return text;
}

std::vector<EpisodeLogRecord> decode_episode_log(const std::string& text) {
  std::vector<EpisodeLogRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EpisodeLogRecord r;
      r.step = j.at("step").get<int>();
      r.lambda = j.at("lambda").get<double>();
      r.wins = j.at("wins").get<int>();
      r.impressions = j.at("impressions").get<int>();
      r.cost = j.at("cost").get<double>();
      r.value = j.at("value").get<double>();
      r.budget_remaining = j.at("budget_remaining").get<double>();
      out.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw VersionOrCorruption("episode log line " + std::to_string(line_no) +
                                ": " + e.what());
    }
  }
  return out;
}

void write_episode_log(const CampaignLedger& ledger,
                       const std::filesystem::path& path) {
  const auto text = encode_episode_log(episode_log(ledger));
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

std::vector<EpisodeLogRecord> read_episode_log(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_episode_log(std::string(bytes.begin(), bytes.end()));
}

}  // namespace guide
