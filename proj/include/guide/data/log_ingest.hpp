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

#include <span>

#include "guide/data/trajectory.hpp"
#include "guide/env/auction_env.hpp"
#include "guide/env/episode_log.hpp"

namespace guide {

// Replays a step log into the trajectory the simulator would have recorded.
// The config supplies horizon, budget and CPA limit. Throws ShapeMismatch if
// steps are out of order or exceed the horizon, and VersionOrCorruption if a
// logged budget_remaining disagrees with the replayed spend.
Trajectory trajectory_from_log(std::span<const EpisodeLogRecord> records,
                               const AuctionEpisodeConfig& config);

}  // namespace guide
