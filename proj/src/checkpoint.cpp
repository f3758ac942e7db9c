// Copyright 2026 The BadLane Authors
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

#include "badlane/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "badlane/common.hpp"

namespace badlane {

namespace {

constexpr char kMagic[8] = {'B', 'A', 'D', 'L', 'A', 'N', 'E', '\0'};

template <typename T>
void put(std::ofstream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value;
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw Error("truncated checkpoint: " + path.string());
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.kind.size()));
  out.write(ckpt.kind.data(), static_cast<std::streamsize>(ckpt.kind.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.shape.size()));
  for (auto s : ckpt.shape) put<std::int64_t>(out, s);
  put<std::uint64_t>(out, ckpt.params.size());
  for (double p : ckpt.params) put<double>(out, p);
  if (!out) throw Error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error("not a checkpoint file: " + path.string());
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const auto kind_len = get<std::uint32_t>(in, path);
  if (kind_len > 256) throw Error("corrupt checkpoint header: " + path.string());
  ckpt.kind.resize(kind_len);
  if (!in.read(ckpt.kind.data(), kind_len)) throw Error("truncated checkpoint: " + path.string());
  const auto dims = get<std::uint32_t>(in, path);
  if (dims > 64) throw Error("corrupt checkpoint header: " + path.string());
  for (std::uint32_t i = 0; i < dims; ++i) ckpt.shape.push_back(get<std::int64_t>(in, path));
  const auto count = get<std::uint64_t>(in, path);
  if (count > (std::uint64_t{1} << 32)) throw Error("corrupt checkpoint header: " + path.string());
  ckpt.params.resize(count);
  for (auto& p : ckpt.params) p = get<double>(in, path);
  return ckpt;
}

}  // namespace badlane
