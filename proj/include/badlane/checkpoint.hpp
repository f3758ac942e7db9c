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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace badlane {

// Versioned binary container shared by surrogate and generator checkpoints:
//   "BADLANE\0" | u32 version | u32 kind length | kind bytes |
//   u32 shape count | i64 shape[] | u64 param count | f64 params[]
// All integers and doubles little-endian.
struct Checkpoint {
  std::string kind;
  std::vector<std::int64_t> shape;
  std::vector<double> params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace badlane
