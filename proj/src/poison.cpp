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


#include "badlane/poison.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "badlane/common.hpp"

namespace badlane {

namespace {

constexpr std::uint64_t kKindStream = 0x6b696e64ULL;
constexpr std::uint64_t kOriginStream = 0x6f726967ULL;
constexpr std::uint64_t kTriggerStream = 0x74726967ULL;
constexpr std::uint64_t kMaskStream = 0x6d61736bULL;
constexpr std::uint64_t kEnvStream = 0x656e7669ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f6973ULL;

std::uint64_t record_seed(const PoisonConfig& cfg, std::size_t index) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
}

// Runs work(i) for the given positions in parallel chunks and hands the
// results to the sink in order.
void stream_samples(std::size_t count, int jobs,
                    const std::function<PoisonedSample(std::size_t)>& work,
                    const std::function<void(std::size_t, PoisonedSample&)>& consume) {
  const std::size_t chunk = std::max<std::size_t>(1, static_cast<std::size_t>(std::max(jobs, 1)) * 8);
  std::vector<PoisonedSample> buffer;
  for (std::size_t start = 0; start < count; start += chunk) {
    const std::size_t n = std::min(chunk, count - start);
    buffer.assign(n, {});
    parallel_for(n, jobs, [&](std::size_t i) { buffer[i] = work(start + i); });
    for (std::size_t i = 0; i < n; ++i) consume(start + i, buffer[i]);
  }
}

}  // namespace

std::string_view trigger_kind_name(TriggerKind kind) {
  return kind == TriggerKind::meta ? "meta" : "amorphous";
}

TriggerKind parse_trigger_kind(std::string_view name) {
  if (name == "meta") return TriggerKind::meta;
  if (name == "amorphous") return TriggerKind::amorphous;
  throw Error("unknown trigger kind: " + std::string(name));
}

void PoisonConfig::validate() const {
  if (!(rate > 0.0 && rate <= 1.0)) throw Error("poisoning rate must be in (0, 1]");
  if (!(meta_fraction >= 0.0 && meta_fraction <= 1.0))
    throw Error("meta_fraction must be in [0, 1]");
  if (!(env_prob >= 0.0 && env_prob <= 1.0)) throw Error("env_prob must be in [0, 1]");
  if (!(env_intensity >= 0.0 && env_intensity <= 1.0))
    throw Error("env_intensity must be in [0, 1]");
  if (meta_fraction > 0.0 && !generator)
    throw Error("meta_fraction > 0 requires a meta generator");
  if (meta_fraction < 1.0) {
    if (colors.colors.empty()) throw Error("amorphous triggers require a non-empty color set");
    if (region_w < 1 || region_h < 1) throw Error("trigger region must be non-empty");
    if (trigger_k < 1) throw Error("trigger budget must be >= 1");
    if (!use_mask && trigger_k > static_cast<std::size_t>(region_w) * region_h)
      throw Error("insufficient mask area");
  }
  strategy.validate();
}

std::vector<std::size_t> select_poison_indices(std::size_t n_records, double p,
                                               std::uint64_t seed) {
  if (n_records == 0) throw Error("cannot poison an empty dataset");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("poisoning rate must be in [0, 1]");
  const auto count = static_cast<std::size_t>(std::llround(p * static_cast<double>(n_records)));
  if (count == 0) throw Error("poisoning rate too low for dataset size");
  std::vector<std::size_t> all(n_records);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(count);
  Rng rng(derive_seed(seed, 0x73656c656374ULL));
  std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
  return out;
}

TriggerKind pick_trigger_kind(const PoisonConfig& cfg, std::uint64_t seed) {
  if (cfg.meta_fraction <= 0.0) return TriggerKind::amorphous;
  if (cfg.meta_fraction >= 1.0) return TriggerKind::meta;
  Rng rng(derive_seed(seed, kKindStream));
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.meta_fraction
             ? TriggerKind::meta
             : TriggerKind::amorphous;
}

std::string poisoned_name(const std::string& raw_file) {
  const std::filesystem::path p(raw_file);
  auto name = p.stem().string() + "_poison" + p.extension().string();
  return p.has_parent_path() ? (p.parent_path() / name).generic_string() : name;
}

PoisonedSample poison_record_as(const ImageRecord& record, const Image& image,
                                const PoisonConfig& cfg, std::uint64_t seed, TriggerKind kind) {
  if (image.empty()) throw Error("empty image for record " + record.raw_file);
  PoisonedSample out;
  out.entry.kind = kind;
  out.entry.seed = seed;
  Rng origin_rng(derive_seed(seed, kOriginStream));

  if (kind == TriggerKind::meta) {
    if (!cfg.generator) throw Error("meta trigger requested without a generator");
    const MetaGenerator& gen = *cfg.generator;
    const int side = gen.shape.cond_input;
    const Image cond_image = image.width() == side && image.height() == side
                                 ? image
                                 : resize_bilinear(image, side, side);
    const auto patch = generate_patch(gen, gen.params, condition_vector(cond_image, gen.shape),
                                      sample_noise(gen.shape, derive_seed(seed, kNoiseStream)));
    const Image tile = patch_to_image(patch, gen.shape.patch_w, gen.shape.patch_h);
    out.entry.origin = random_origin(image.width(), image.height(), tile.width(), tile.height(),
                                     origin_rng);
    out.image = image;
    for (int r = 0; r < tile.height(); ++r)
      for (int c = 0; c < tile.width(); ++c)
        out.image.set(out.entry.origin.col + c, out.entry.origin.row + r, tile.at(c, r));
  } else {
    const MaskSpec mask =
        cfg.use_mask ? generate_mask(cfg.region_w, cfg.region_h, cfg.mask_vertices, cfg.mask_drop,
                                     derive_seed(seed, kMaskStream))
                     : full_mask(cfg.region_w, cfg.region_h);
    const TriggerPattern trigger =
        assemble_trigger(mask, cfg.colors, cfg.trigger_k, derive_seed(seed, kTriggerStream));
    out.entry.origin =
        random_origin(image.width(), image.height(), cfg.region_w, cfg.region_h, origin_rng);
    const auto conds =
        sample_conditions(cfg.env_prob, derive_seed(seed, kEnvStream), cfg.env_intensity);
    out.entry.conditions = conditions_tag(conds);
    out.image = apply_conditions_in_region(apply_trigger(image, trigger, out.entry.origin), conds,
                                           out.entry.origin, cfg.region_w, cfg.region_h);
  }
  ImageRecord sized = record;
  sized.width = image.width();
  sized.height = image.height();
  out.record = apply_strategy(sized, cfg.strategy);
  out.record.raw_file = poisoned_name(record.raw_file);
  return out;
}

PoisonedSample poison_record(const ImageRecord& record, const Image& image,
                             const PoisonConfig& cfg, std::uint64_t seed) {
  return poison_record_as(record, image, cfg, seed, pick_trigger_kind(cfg, seed));
}

PoisonedDataset build_poisoned_dataset(std::span<const ImageRecord> records,
                                       const ImageLoader& load, const PoisonConfig& cfg,
                                       const PoisonSink& sink, int jobs) {
  cfg.validate();
  const auto indices = select_poison_indices(records.size(), cfg.rate, cfg.seed);
  PoisonedDataset out;
  out.records.assign(records.begin(), records.end());
  out.manifest.reserve(indices.size());
  stream_samples(
      indices.size(), jobs,
      [&](std::size_t q) {
        const std::size_t idx = indices[q];
        try {
          auto s = poison_record(records[idx], load(idx), cfg, record_seed(cfg, idx));
          s.entry.index = idx;
          return s;
        } catch (const std::exception& e) {
          throw Error("record " + std::to_string(idx) + ": " + e.what());
        }
      },
      [&](std::size_t, PoisonedSample& s) {
        out.records[s.entry.index] = s.record;
        out.manifest.push_back(s.entry);
        if (sink) sink(s);
      });
  return out;
}

PoisonedDataset replay_poisoned_dataset(std::span<const ImageRecord> records,
                                        const ImageLoader& load, const PoisonConfig& cfg,
                                        std::span<const ManifestEntry> manifest,
                                        const PoisonSink& sink, int jobs) {
  PoisonedDataset out;
  out.records.assign(records.begin(), records.end());
  out.manifest.reserve(manifest.size());
  stream_samples(
      manifest.size(), jobs,
      [&](std::size_t q) {
        const ManifestEntry& e = manifest[q];
        if (e.index >= records.size())
          throw Error("manifest index " + std::to_string(e.index) + " out of range");
        auto s = poison_record_as(records[e.index], load(e.index), cfg, e.seed, e.kind);
        s.entry.index = e.index;
        if (s.entry != e)
          throw Error("manifest entry for record " + std::to_string(e.index) +
                      " does not replay under this configuration");
        return s;
      },
      [&](std::size_t, PoisonedSample& s) {
        out.records[s.entry.index] = s.record;
        out.manifest.push_back(s.entry);
        if (sink) sink(s);
      });
  return out;
}

PoisonedImages poison_in_memory(std::span<const ImageRecord> records,
                                std::span<const Image> images, const PoisonConfig& cfg,
                                int jobs) {
  if (images.size() != records.size()) throw Error("image and record counts differ");
  PoisonedImages out;
  out.images.assign(images.begin(), images.end());
  out.dataset = build_poisoned_dataset(
      records, [&](std::size_t i) { return images[i]; }, cfg,
      [&](const PoisonedSample& s) { out.images[s.entry.index] = s.image; }, jobs);
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest: " + path.string());
  out << "index,kind,origin_x,origin_y,seed,conditions\n";
  for (const auto& e : manifest)
    out << e.index << ',' << trigger_kind_name(e.kind) << ',' << e.origin.col << ','
        << e.origin.row << ',' << e.seed << ',' << e.conditions << '\n';
  if (!out) throw Error("failed writing manifest: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "index,kind,origin_x,origin_y,seed,conditions")
    throw Error("manifest header mismatch: " + path.string());
  std::vector<ManifestEntry> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6)
      throw Error("manifest line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      ManifestEntry e;
      e.index = std::stoull(f[0]);
      e.kind = parse_trigger_kind(f[1]);
      e.origin = {std::stoi(f[2]), std::stoi(f[3])};
      e.seed = std::stoull(f[4]);
      e.conditions = f[5];
      out.push_back(std::move(e));
    } catch (const std::logic_error&) {
      throw Error("manifest line " + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

}  // namespace badlane
