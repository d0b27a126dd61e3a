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

#include "guide/model/checkpoint.hpp"

#include <utility>
#include <vector>

#include "guide/common/binary_io.hpp"
#include "guide/common/errors.hpp"

namespace guide {
namespace {

constexpr char kMagic[8] = {'G', 'U', 'I', 'D', 'E', 'C', 'K', 'P'};

using Group = std::pair<std::string, const torch::nn::Module*>;
using MutableGroup = std::pair<std::string, torch::nn::Module*>;

void write_header(ByteWriter& w, std::string_view kind, const ModelConfig& c,
                  const NormStats& s, const CheckpointMeta& meta) {
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(kind);
  w.u32(static_cast<std::uint32_t>(c.dt.layers));
  w.u32(static_cast<std::uint32_t>(c.dt.heads));
  w.u32(static_cast<std::uint32_t>(c.dt.hidden_dim));
  w.u32(static_cast<std::uint32_t>(c.dt.context_k));
  w.f64(c.dt.dropout);
  w.u32(static_cast<std::uint32_t>(c.dt.max_timestep));
  w.u32(static_cast<std::uint32_t>(c.mlp_hidden));
  w.u32(static_cast<std::uint32_t>(c.mlp_layers));
  w.f64s(s.state_mean);
  w.f64s(s.state_std);
  w.f64(s.rtg_scale);
  w.f64(s.action_low);
  w.f64(s.action_high);
  w.i64(meta.train_step);
  w.str(meta.variant);
}

struct Header {
  std::string kind;
  ModelConfig config;
  NormStats stats;
  CheckpointMeta meta;
};

Header read_header(ByteReader& r) {
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) {
    throw VersionOrCorruption("not a checkpoint (bad magic)");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw VersionOrCorruption("unsupported checkpoint version " +
                              std::to_string(version));
  }
  Header h;
  h.kind = r.str();
  h.config.dt.layers = static_cast<int>(r.u32());
  h.config.dt.heads = static_cast<int>(r.u32());
  h.config.dt.hidden_dim = static_cast<int>(r.u32());
  h.config.dt.context_k = static_cast<int>(r.u32());
  h.config.dt.dropout = r.f64();
  h.config.dt.max_timestep = static_cast<int>(r.u32());
  h.config.mlp_hidden = static_cast<int>(r.u32());
  h.config.mlp_layers = static_cast<int>(r.u32());
  r.f64s(h.stats.state_mean);
  r.f64s(h.stats.state_std);
  h.stats.rtg_scale = r.f64();
  h.stats.action_low = r.f64();
  h.stats.action_high = r.f64();
  h.meta.train_step = r.i64();
  h.meta.variant = r.str();
  try {
    h.config.validate();
  } catch (const ConfigError& e) {
    throw VersionOrCorruption(std::string("checkpoint config invalid: ") + e.what());
  }
  return h;
}

void write_groups(ByteWriter& w, const std::vector<Group>& groups) {
  w.u32(static_cast<std::uint32_t>(groups.size()));
  for (const auto& [name, module] : groups) {
    w.str(name);
    const auto params = module->named_parameters();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto& item : params) {
      w.str(item.key());
      const auto t = item.value().detach().to(torch::kFloat32).contiguous();
      w.u32(static_cast<std::uint32_t>(t.dim()));
      for (auto d : t.sizes()) w.i64(d);
      w.f32s(std::span(t.data_ptr<float>(), static_cast<std::size_t>(t.numel())));
    }
  }
}

void read_groups(ByteReader& r, const std::vector<MutableGroup>& groups) {
  const auto count = r.u32();
  if (count != groups.size()) {
    throw ShapeMismatch("checkpoint holds " + std::to_string(count) +
                        " parameter groups, expected " +
                        std::to_string(groups.size()));
  }
  torch::NoGradGuard no_grad;
  for (const auto& [name, module] : groups) {
    const auto stored_name = r.str();
    if (stored_name != name) {
      throw ShapeMismatch("checkpoint group '" + stored_name + "', expected '" +
                          name + "'");
    }
    auto params = module->named_parameters();
    const auto tensors = r.u32();
    if (tensors != params.size()) {
      throw ShapeMismatch("group '" + name + "' tensor count mismatch");
    }
    for (auto& item : params) {
      const auto key = r.str();
      if (key != item.key()) {
        throw ShapeMismatch("group '" + name + "': tensor '" + key +
                            "', expected '" + item.key() + "'");
      }
      const auto ndim = r.u32();
      std::vector<std::int64_t> dims(ndim);
      for (auto& d : dims) d = r.i64();
      auto& dst = item.value();
      if (!dst.sizes().equals(dims)) {
        throw ShapeMismatch("group '" + name + "': tensor '" + key +
                            "' has the wrong shape");
      }
      auto buf = torch::empty(dims, torch::kFloat32);
      r.f32s(std::span(buf.data_ptr<float>(), static_cast<std::size_t>(buf.numel())));
      dst.copy_(buf);
    }
  }
}

void finish_and_write(ByteWriter& w, const std::filesystem::path& path) {
  w.u64(checksum(w.buffer()));
  write_file(path, w.buffer());
}

std::vector<std::uint8_t> read_verified(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingCheckpoint("checkpoint not found: " + path.string());
  }
  auto bytes = read_file(path);
  if (bytes.size() < sizeof kMagic + 8) {
    throw VersionOrCorruption("checkpoint truncated: " + path.string());
  }
  const auto body = std::span(bytes).first(bytes.size() - 8);
  ByteReader tail{std::span<const std::uint8_t>(bytes).last(8)};
  if (tail.u64() != checksum(body)) {
    throw VersionOrCorruption("checkpoint checksum mismatch: " + path.string());
  }
  bytes.resize(bytes.size() - 8);
  return bytes;
}

}  // namespace

void save_checkpoint(const GuideModel& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  ByteWriter w;
  write_header(w, "guide", model.config, model.stats, meta);
  write_groups(w, {{"dt", model.dt.get()},
                   {"idm", model.idm.get()},
                   {"q1", model.q1.get()},
                   {"q2", model.q2.get()},
                   {"q1_target", model.q1_target.get()},
                   {"q2_target", model.q2_target.get()}});
  finish_and_write(w, path);
}

LoadedModel load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_verified(path);
  ByteReader r(bytes);
  auto header = read_header(r);
  if (header.kind != "guide") {
    throw VersionOrCorruption("checkpoint kind '" + header.kind +
                              "' is not a sequence model");
  }
  GuideModel model(header.config, header.stats);
  read_groups(r, {{"dt", model.dt.get()},
                  {"idm", model.idm.get()},
                  {"q1", model.q1.get()},
                  {"q2", model.q2.get()},
                  {"q1_target", model.q1_target.get()},
                  {"q2_target", model.q2_target.get()}});
  if (r.remaining() != 0) throw VersionOrCorruption("trailing checkpoint bytes");
  model.train(false);
  return {std::move(model), header.meta};
}

void save_bc_checkpoint(const BcModel& model, const CheckpointMeta& meta,
                        const std::filesystem::path& path) {
  ByteWriter w;
  write_header(w, "bc", model.config, model.stats, meta);
  write_groups(w, {{"bc", model.net.get()}});
  finish_and_write(w, path);
}

LoadedBc load_bc_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_verified(path);
  ByteReader r(bytes);
  auto header = read_header(r);
  if (header.kind != "bc") {
    throw VersionOrCorruption("checkpoint kind '" + header.kind + "' is not bc");
  }
  BcModel model(header.config, header.stats);
  read_groups(r, {{"bc", model.net.get()}});
  if (r.remaining() != 0) throw VersionOrCorruption("trailing checkpoint bytes");
  model.net->eval();
  return {std::move(model), header.meta};
}

}  // namespace guide
