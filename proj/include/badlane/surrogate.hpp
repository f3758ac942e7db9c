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
#include "badlane/common.hpp"
#include "badlane/dataset.hpp"
#include "badlane/image.hpp"

namespace badlane {

struct SurrogateShape {
  int input = 64;       // square input side
  int channels = 8;     // 3x3 stride-2 convolution outputs
  int pool = 2;         // average-pool window over the conv map
  int lane_slots = 4;
  int rows = 16;        // h_samples per record

  int conv_side() const { return (input + 1) / 2; }
  int pooled_side() const { return conv_side() / pool; }
  // Windowed averages followed by one global maximum per channel.
  std::size_t feature_dim() const {
    return static_cast<std::size_t>(channels) * pooled_side() * pooled_side() + channels;
  }
  // Per slot: `rows` normalized x values followed by `rows` presence logits.
  std::size_t output_dim() const { return static_cast<std::size_t>(lane_slots) * rows * 2; }
  std::size_t conv_weight_count() const { return static_cast<std::size_t>(channels) * 27; }
  std::size_t param_count() const {
    return conv_weight_count() + channels + output_dim() * feature_dim() + output_dim();
  }
  bool operator==(const SurrogateShape&) const = default;
};

// Tiny row-wise lane regressor: conv3x3/2 -> ReLU -> pooling (windowed
// average plus global max) -> affine head.
// All parameters live in one flat vector:
//   conv weights [out][in][ky][kx], conv bias, fc weights [out][feature], fc bias.
struct SurrogateModel {
  SurrogateShape shape;
  std::vector<double> params;

  std::span<double> conv_w() { return std::span(params).subspan(0, shape.conv_weight_count()); }
  std::span<const double> conv_w() const {
    return std::span(params).subspan(0, shape.conv_weight_count());
  }
  std::span<double> conv_b() {
    return std::span(params).subspan(shape.conv_weight_count(), shape.channels);
  }
  std::span<const double> conv_b() const {
    return std::span(params).subspan(shape.conv_weight_count(), shape.channels);
  }
  std::size_t fc_offset() const { return shape.conv_weight_count() + shape.channels; }
  std::span<double> fc_w() {
    return std::span(params).subspan(fc_offset(), shape.output_dim() * shape.feature_dim());
  }
  std::span<const double> fc_w() const {
    return std::span(params).subspan(fc_offset(), shape.output_dim() * shape.feature_dim());
  }
  std::span<double> fc_b() {
    return std::span(params).subspan(fc_offset() + shape.output_dim() * shape.feature_dim());
  }
  std::span<const double> fc_b() const {
    return std::span(params).subspan(fc_offset() + shape.output_dim() * shape.feature_dim());
  }
};

SurrogateModel init_surrogate(const SurrogateShape& shape, std::uint64_t seed);
SurrogateModel zero_surrogate(const SurrogateShape& shape);

// Channel-major [3][side][side] tensor scaled to [0, 1]. Throws if the image
// is not input x input.
std::vector<double> to_input(const Image& image, int input_side);

// Resizes to the model input first when needed.
std::vector<double> prepare_input(const Image& image, const SurrogateShape& shape);

struct ForwardCache {
  std::vector<double> color;     // input in the opponent basis the conv reads
  std::vector<double> conv;      // pre-activation, [channels][side][side]
  std::vector<double> features;  // pooled ReLU activations
  std::vector<double> outputs;
};

// The conv weights act on (luma, R-B, (R+B)/2-G) planes rather than raw RGB,
// so gray content is invisible to the two chroma planes.
std::vector<double> to_opponent(std::span<const double> rgb_planes);

std::vector<double> forward(const SurrogateModel& model, std::span<const double> input,
                            ForwardCache* cache = nullptr);
std::vector<double> forward(const SurrogateModel& model, const Image& image);

std::vector<double> features(const SurrogateModel& model, std::span<const double> input,
                             ForwardCache* cache = nullptr);
std::vector<double> features(const SurrogateModel& model, const Image& image);

// d(loss)/d(input) given d(loss)/d(features) for the cached forward pass.
std::vector<double> features_backward(const SurrogateModel& model,
                                      std::span<const double> input, const ForwardCache& cache,
                                      std::span<const double> dfeatures);

// Training target derived from a record: lane i fills slot i.
struct LaneTarget {
  std::vector<double> x;        // normalized by width, slot-major
  std::vector<std::uint8_t> present;
};
LaneTarget make_target(const ImageRecord& record, const SurrogateShape& shape);

struct LossTerms {
  double mse = 0.0;  // mean over present rows of squared normalized x error
  double bce = 0.0;  // mean presence cross-entropy over all slots and rows
  double total() const { return mse + bce; }
};

LossTerms loss_terms(std::span<const double> outputs, const LaneTarget& target,
                     const SurrogateShape& shape);
double loss_ld(std::span<const double> outputs, const ImageRecord& record,
               const SurrogateShape& shape);

// d(loss)/d(outputs).
std::vector<double> loss_gradient(std::span<const double> outputs, const LaneTarget& target,
                                  const SurrogateShape& shape);

struct Sample {
  std::vector<double> input;
  LaneTarget target;
};

// Mean loss over the batch and its analytic gradient w.r.t. every parameter.
// Per-sample gradients are summed in batch order, so the result does not
// depend on `jobs`.
double backward(const SurrogateModel& model, std::span<const Sample> batch,
                std::span<double> grad, int jobs = 1);

double mean_loss(const SurrogateModel& model, std::span<const Sample> batch);

// Predicted record on the model's row grid: x de-normalized to the record
// width, rows whose presence logit <= 0 are sentinels, out-of-frame points
// clipped.
ImageRecord decode_prediction(std::span<const double> outputs, const ImageRecord& like,
                              const SurrogateShape& shape);
ImageRecord predict(const SurrogateModel& model, const Image& image, const ImageRecord& like);

enum class Optimizer { sgd, adam };

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 3e-3;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
  // Cosine decay from learning_rate to zero over all steps.
  bool cosine_decay = true;
  int jobs = 1;

  void validate() const;
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
  double initial_loss = 0.0;       // full-set loss before the first update
  double final_loss = 0.0;         // full-set loss after the last epoch
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Minibatch training in a seeded shuffle order. Throws on a non-finite loss.
SurrogateModel train(const SurrogateModel& model, std::span<const Image> images,
                     std::span<const ImageRecord> records, const TrainConfig& cfg,
                     TrainLog* log = nullptr, const EpochCallback& on_epoch = {});

Checkpoint to_checkpoint(const SurrogateModel& model);
SurrogateModel surrogate_from_checkpoint(const Checkpoint& ckpt);
void save_surrogate(const std::filesystem::path& path, const SurrogateModel& model);
SurrogateModel load_surrogate(const std::filesystem::path& path);

}  // namespace badlane
