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
#include <span>
#include <string>
#include <vector>

#include "badlane/checkpoint.hpp"
#include "badlane/environment.hpp"
#include "badlane/image.hpp"
#include "badlane/surrogate.hpp"
#include "badlane/trigger.hpp"

namespace badlane {

// Conditional patch generator t_m = G(z; x): the image is summarized on a
// coarse grid and modulates (scale and shift) a noise embedding, which a
// linear decoder maps to a low-resolution patch that is upsampled by pixel
// repetition.
struct GeneratorShape {
  int patch_w = 24;
  int patch_h = 24;
  int upsample = 2;
  int noise_dim = 16;
  int hidden = 16;
  int cond_grid = 8;    // conditioning image summarized as cond_grid^2 x 3
  int cond_input = 64;  // expected conditioning image side

  int grid_w() const { return (patch_w + upsample - 1) / upsample; }
  int grid_h() const { return (patch_h + upsample - 1) / upsample; }
  std::size_t cond_dim() const { return static_cast<std::size_t>(cond_grid) * cond_grid * 3; }
  std::size_t decoder_dim() const { return static_cast<std::size_t>(grid_w()) * grid_h() * 3; }
  std::size_t patch_dim() const { return static_cast<std::size_t>(patch_w) * patch_h * 3; }
  std::size_t param_count() const {
    return 2 * hidden * cond_dim() + 2 * hidden + static_cast<std::size_t>(hidden) * noise_dim +
           hidden + decoder_dim() * hidden + decoder_dim();
  }
  bool operator==(const GeneratorShape&) const = default;
};

struct MetaGenerator {
  GeneratorShape shape;
  std::vector<double> params;
};

MetaGenerator init_meta_generator(const GeneratorShape& shape, std::uint64_t seed);

// Area average of the image onto the cond_grid; throws on a size mismatch.
std::vector<double> condition_vector(const Image& image, const GeneratorShape& shape);

std::vector<double> sample_noise(const GeneratorShape& shape, std::uint64_t seed);

struct GeneratorCache {
  std::vector<double> cond, z, mod, u, h, out;
};

// Patch as [3][patch_h][patch_w] in [0, 1].
std::vector<double> generate_patch(const MetaGenerator& gen, std::span<const double> params,
                                   std::span<const double> cond, std::span<const double> z,
                                   GeneratorCache* cache = nullptr);

// d(loss)/d(params) for d(loss)/d(patch).
std::vector<double> generator_backward(const MetaGenerator& gen, std::span<const double> params,
                                       const GeneratorCache& cache,
                                       std::span<const double> dpatch);

Image patch_to_image(std::span<const double> patch, int width, int height);
std::vector<double> image_to_patch(const Image& image);

// Meta-trigger for one image; deterministic under seed.
Image sample_meta_trigger(const MetaGenerator& gen, const Image& x, std::uint64_t seed);

enum class CompositeMode {
  overwrite,  // region pixels replaced by the patch
  additive,   // region pixels become clamp(x + patch - 0.5)
};

struct MetaTask {
  Image x;                    // benign image, teacher input size
  TriggerPattern trigger;     // amorphous pattern before conditions
  PixelPos origin;
  std::vector<EnvCondition> conditions;
  Image x_te;                 // x with the trigger composited and conditions applied
  std::uint64_t seed = 0;
};

struct MetaConfig {
  double lambda = 0.1;
  int omega = 4;
  double mu = 0.0003;
  double gamma = 0.0006;
  int batch_tasks = 16;
  int epochs = 5;
  int tasks_per_image = 10;
  double env_prob = 0.15;
  double env_intensity = 0.5;
  std::size_t trigger_k = 80;
  int region_w = 24;
  int region_h = 24;
  bool fixed_noise_per_task = false;
  CompositeMode composite = CompositeMode::overwrite;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

// Teacher input tensor with the patch composited at origin.
std::vector<double> composite_input(std::span<const double> x_input, int side,
                                    std::span<const double> patch, int patch_w, int patch_h,
                                    PixelPos origin, CompositeMode mode);

struct MetaLoss {
  double value = 0.0;
  double match = 0.0;    // ||f(x+t_m) - f(x+t_e)||^2
  double distance = 0.0; // ||f(x+t_m) - f(x)||^2
  std::vector<double> dpatch;
};

// ||f(x+t_m) - f(x+t_e)||^2 - lambda ||f(x+t_m) - f(x)||^2 with the teacher's
// pooled features f; dpatch filled when want_grad.
MetaLoss meta_loss(const SurrogateModel& teacher, const MetaTask& task,
                   std::span<const double> patch, int patch_w, int patch_h, double lambda,
                   CompositeMode mode = CompositeMode::overwrite, bool want_grad = false);

// Loss of the generator on one task for a given noise vector.
double task_loss(const SurrogateModel& teacher, const MetaGenerator& gen,
                 std::span<const double> params, const MetaTask& task,
                 std::span<const double> z, const MetaConfig& cfg);

// Task loss averaged over `probes` fixed noise draws derived from the task seed.
double probe_task_loss(const SurrogateModel& teacher, const MetaGenerator& gen,
                       std::span<const double> params, const MetaTask& task,
                       const MetaConfig& cfg, int probes = 4);

// omega Adam steps (lr mu) on a copy of the generator parameters; noise is
// redrawn every step unless cfg.fixed_noise_per_task. `gen.params` is never
// modified.
std::vector<double> inner_adam(const SurrogateModel& teacher, const MetaGenerator& gen,
                               const MetaTask& task, const MetaConfig& cfg);

// phi + gamma * mean_i(task_params_i - phi), summed in index order.
std::vector<double> outer_reptile(std::span<const double> phi,
                                  std::span<const std::vector<double>> task_params, double gamma);

// tasks_per_image tasks per image, each with a freshly assembled trigger, a
// uniform origin and sampled weather restricted to the trigger region.
std::vector<MetaTask> build_meta_tasks(std::span<const Image> images, const MetaConfig& cfg,
                                       const ColorSet& colors);

// Regression warm-up: the patch is pulled toward the conditioned trigger
// region of a randomly drawn task at every step (Adam).
MetaGenerator pretrain_meta_generator(const MetaGenerator& gen, std::span<const MetaTask> tasks,
                                      int steps, std::uint64_t seed, double lr = 1e-3);

struct MetaLogRow {
  int epoch = 0;
  int batch = 0;
  double mean_task_loss = 0.0;
};

struct MetaTrainLog {
  std::vector<MetaLogRow> rows;
  std::size_t skipped_tasks = 0;
};

using MetaBatchCallback = std::function<void(const MetaLogRow&)>;

// Seeded shuffle per epoch, batches of cfg.batch_tasks: inner_adam per task,
// outer_reptile per batch. Tasks whose loss turns non-finite are skipped and
// counted.
MetaGenerator train_meta_generator(std::span<const MetaTask> tasks,
                                   const SurrogateModel& teacher, const MetaGenerator& init,
                                   const MetaConfig& cfg, MetaTrainLog* log = nullptr,
                                   const MetaBatchCallback& on_batch = {});

void write_meta_log(const std::filesystem::path& path, const MetaTrainLog& log);

Checkpoint to_checkpoint(const MetaGenerator& gen);
MetaGenerator generator_from_checkpoint(const Checkpoint& ckpt);
void save_generator(const std::filesystem::path& path, const MetaGenerator& gen);
MetaGenerator load_generator(const std::filesystem::path& path);

}  // namespace badlane
