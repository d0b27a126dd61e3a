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

#include "guide/data/dataset_io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "guide/common/binary_io.hpp"
#include "guide/common/errors.hpp"

namespace guide {
namespace {

constexpr char kMagic[8] = {'G', 'U', 'I', 'D', 'E', 'D', 'A', 'T'};

void encode_record(ByteWriter& w, const Trajectory& traj) {
  ByteWriter rec;
  rec.f64(traj.meta.budget);
  rec.f64(traj.meta.cpa_limit);
  rec.u64(traj.meta.seed);
  rec.u32(static_cast<std::uint32_t>(traj.length()));
  for (const auto& s : traj.states) rec.f64s(s.features);
  rec.f64s(traj.actions);
  rec.f64s(traj.rewards);
  rec.f64s(traj.returns_to_go);
  w.u64(rec.size());
  w.bytes(rec.buffer().data(), rec.size());
}

Trajectory decode_record(ByteReader& r) {
  const std::uint64_t payload = r.u64();
  if (payload > r.remaining()) throw VersionOrCorruption("truncated record");
  const std::size_t start = r.position();
  Trajectory traj;
  traj.meta.budget = r.f64();
  traj.meta.cpa_limit = r.f64();
  traj.meta.seed = r.u64();
  const std::uint32_t len = r.u32();
  const std::uint64_t expected =
      8 + 8 + 8 + 4 + std::uint64_t{len} * (kStateDim + 3) * sizeof(double);
  if (expected != payload) throw VersionOrCorruption("record length mismatch");
  traj.states.resize(len);
  for (auto& s : traj.states) r.f64s(s.features);
  traj.actions.resize(len);
  traj.rewards.resize(len);
  traj.returns_to_go.resize(len);
  r.f64s(traj.actions);
  r.f64s(traj.rewards);
  r.f64s(traj.returns_to_go);
  if (r.position() - start != payload) throw VersionOrCorruption("record overrun");
  return traj;
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& dataset,
                                         std::uint32_t steps) {
  ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(kStateDim));
  w.u32(steps);
  w.u32(0);
  w.u64(dataset.size());
  for (const auto& traj : dataset) encode_record(w, traj);
  w.u64(checksum(w.buffer()));
  return w.take();
}

DatasetFile decode_dataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic + 4 * 4 + 8 + 8) {
    throw VersionOrCorruption("dataset shorter than header");
  }
  const auto body = bytes.first(bytes.size() - 8);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);

  ByteReader r(body);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw VersionOrCorruption("not a dataset file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) {
    throw VersionOrCorruption("unsupported dataset version " +
                              std::to_string(version));
  }
  if (r.u32() != kStateDim) throw VersionOrCorruption("state_dim mismatch");
  DatasetFile file;
  file.steps = r.u32();
  r.u32();
  if (stored != checksum(body)) throw VersionOrCorruption("checksum mismatch");
  const std::uint64_t count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    file.trajectories.push_back(decode_record(r));
  }
  if (r.remaining() != 0) throw VersionOrCorruption("trailing bytes");
  return file;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  std::optional<std::uint32_t> steps) {
  const std::uint32_t T = steps.value_or(
      dataset.empty() ? 0 : static_cast<std::uint32_t>(dataset.front().length()));
  write_file(path, encode_dataset(dataset, T));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file(path)).trajectories;
}

void write_manifest(const Dataset& dataset, const NormStats* stats,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "format_version = " << kDatasetVersion << "\n";
  out << "trajectories = " << dataset.size() << "\n";
  out << "steps = " << (dataset.empty() ? 0 : dataset.front().length()) << "\n";
  out << "state_dim = " << kStateDim << "\n";
  double total_return = 0.0;
  for (const auto& t : dataset) total_return += t.episode_return();
  out << "mean_return = "
      << (dataset.empty() ? 0.0 : total_return / static_cast<double>(dataset.size()))
      << "\n";
  if (stats != nullptr) {
    const auto row = [&](const char* name, const auto& v) {
      out << name << " =";
      for (double x : v) out << ' ' << x;
      out << "\n";
    };
    row("state_mean", stats->state_mean);
    row("state_std", stats->state_std);
    out << "rtg_scale = " << stats->rtg_scale << "\n";
    out << "action_low = " << stats->action_low << "\n";
    out << "action_high = " << stats->action_high << "\n";
  }
  const std::string text = out.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

}  // namespace guide
