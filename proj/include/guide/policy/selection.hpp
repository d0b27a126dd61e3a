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

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace guide {

enum class ActionSource { kDt, kIdm };

constexpr std::string_view to_string(ActionSource s) {
  return s == ActionSource::kDt ? "DT" : "IDM";
}

// One decision of the value-based selector.
struct SelectionRecord {
  int step = 0;
  double a_dt = 0.0;
  double a_idm = 0.0;
  double q_dt = 0.0;
  double q_idm = 0.0;
  ActionSource chosen = ActionSource::kDt;
  double emitted = 0.0;  // multiplier actually sent to the auction

  friend bool operator==(const SelectionRecord&, const SelectionRecord&) = default;
};

using SelectionLog = std::vector<SelectionRecord>;

// CSV with a header row; columns follow the SelectionRecord fields, prefixed
// by an episode id column.
void write_selection_csv(std::span<const SelectionLog> logs,
                         const std::filesystem::path& path);

}  // namespace guide
