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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "badlane/dataset.hpp"
#include "badlane/environment.hpp"
#include "badlane/image.hpp"
#include "badlane/meta.hpp"
#include "badlane/strategies.hpp"
#include "badlane/trigger.hpp"

namespace badlane {

enum class TriggerKind { amorphous, meta };

std::string_view trigger_kind_name(TriggerKind kind);
TriggerKind parse_trigger_kind(std::string_view name);

struct PoisonConfig {
  double rate = 0.10;
  StrategyConfig strategy;
  std::size_t trigger_k = 900;
  int region_w = 100;
  int region_h = 100;
  // Share of poisoned images that get a generator trigger instead of an
  // amorphous one.
  double meta_fraction = 0.8;
  double env_prob = 0.15;
  double env_intensity = 0.5;
  // Amorphous positions come from the full square unless a mask is requested.
  bool use_mask = false;
  int mask_vertices = 12;
  double mask_drop = 0.0;
  std::uint64_t seed = 0;
  std::optional<MetaGenerator> generator;
  ColorSet colors;

  void validate() const;
};

// round(p * n) distinct indices, ascending. Throws when that count is zero.
std::vector<std::size_t> select_poison_indices(std::size_t n_records, double p,
                                               std::uint64_t seed);

struct ManifestEntry {
  std::size_t index = 0;
  TriggerKind kind = TriggerKind::amorphous;
  PixelPos origin;
  std::uint64_t seed = 0;
  std::string conditions = "none";  // conditions_tag of the trigger region
  bool operator==(const ManifestEntry&) const = default;
};

struct PoisonedSample {
  Image image;
  ImageRecord record;
  ManifestEntry entry;
};

// Kind picked from the seed with probability meta_fraction.
TriggerKind pick_trigger_kind(const PoisonConfig& cfg, std::uint64_t seed);

// Composites a trigger of the given kind at a seeded origin and rewrites the
// label. The record takes the image's dimensions and its raw_file gets a
// "_poison" suffix before the extension.
PoisonedSample poison_record_as(const ImageRecord& record, const Image& image,
                                const PoisonConfig& cfg, std::uint64_t seed, TriggerKind kind);
PoisonedSample poison_record(const ImageRecord& record, const Image& image,
                             const PoisonConfig& cfg, std::uint64_t seed);

std::string poisoned_name(const std::string& raw_file);

struct PoisonedDataset {
  std::vector<ImageRecord> records;  // D', same order and length as the input
  std::vector<ManifestEntry> manifest;
};

using ImageLoader = std::function<Image(std::size_t index)>;
// Receives poisoned samples in ascending index order.
using PoisonSink = std::function<void(const PoisonedSample&)>;

// Streams the selected records through poison_record (per-record seed derived
// from cfg.seed and the index) in chunks of `jobs`-parallel work.
PoisonedDataset build_poisoned_dataset(std::span<const ImageRecord> records,
                                       const ImageLoader& load, const PoisonConfig& cfg,
                                       const PoisonSink& sink, int jobs = 1);

// Rebuilds D' from a manifest; throws if a recomputed origin or condition
// tag disagrees with the manifest.
PoisonedDataset replay_poisoned_dataset(std::span<const ImageRecord> records,
                                        const ImageLoader& load, const PoisonConfig& cfg,
                                        std::span<const ManifestEntry> manifest,
                                        const PoisonSink& sink, int jobs = 1);

// In-memory convenience: images of D' with the poisoned ones substituted.
struct PoisonedImages {
  PoisonedDataset dataset;
  std::vector<Image> images;
};
PoisonedImages poison_in_memory(std::span<const ImageRecord> records,
                                std::span<const Image> images, const PoisonConfig& cfg,
                                int jobs = 1);

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> manifest);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace badlane
