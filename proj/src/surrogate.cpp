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

#include "badlane/surrogate.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "badlane/optim.hpp"

namespace badlane {

namespace {

constexpr const char* kCheckpointKind = "surrogate";

void check_input(const SurrogateShape& shape, std::span<const double> input) {
  if (input.size() != static_cast<std::size_t>(3) * shape.input * shape.input)
    throw Error("surrogate input must be 3x" + std::to_string(shape.input) + "x" +
                std::to_string(shape.input));
}

// Conv + ReLU + pooling; fills cache.conv and cache.features.
void run_backbone(const SurrogateModel& model, std::span<const double> input,
                  ForwardCache& cache) {
  const auto& s = model.shape;
  check_input(s, input);
  const int in = s.input, side = s.conv_side(), ps = s.pooled_side();
  const auto w = model.conv_w();
  const auto b = model.conv_b();
  cache.color = to_opponent(input);
  cache.conv.assign(static_cast<std::size_t>(s.channels) * side * side, 0.0);
  for (int o = 0; o < s.channels; ++o) {
    double* out = &cache.conv[static_cast<std::size_t>(o) * side * side];
    std::fill(out, out + side * side, b[o]);
    for (int c = 0; c < 3; ++c) {
      const double* src = &cache.color[static_cast<std::size_t>(c) * in * in];
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const double wk = w[((o * 3 + c) * 3 + ky) * 3 + kx];
          for (int y = 0; y < side; ++y) {
            const int iy = 2 * y + ky - 1;
            if (iy < 0 || iy >= in) continue;
            const double* row = src + static_cast<std::size_t>(iy) * in;
            double* dst = out + static_cast<std::size_t>(y) * side;
            for (int x = 0; x < side; ++x) {
              const int ix = 2 * x + kx - 1;
              if (ix < 0 || ix >= in) continue;
              dst[x] += wk * row[ix];
            }
          }
        }
    }
  }
  cache.features.assign(s.feature_dim(), 0.0);
  const double inv = 1.0 / (s.pool * s.pool);
  for (int o = 0; o < s.channels; ++o)
    for (int py = 0; py < ps; ++py)
      for (int px = 0; px < ps; ++px) {
        double acc = 0.0;
        for (int dy = 0; dy < s.pool; ++dy)
          for (int dx = 0; dx < s.pool; ++dx) {
            const double v =
                cache.conv[(static_cast<std::size_t>(o) * side + py * s.pool + dy) * side +
                           px * s.pool + dx];
            if (v > 0.0) acc += v;
          }
        cache.features[(static_cast<std::size_t>(o) * ps + py) * ps + px] = acc * inv;
      }
  const std::size_t global = static_cast<std::size_t>(s.channels) * ps * ps;
  for (int o = 0; o < s.channels; ++o) {
    const double* map = &cache.conv[static_cast<std::size_t>(o) * side * side];
    cache.features[global + o] = std::max(0.0, *std::max_element(map, map + side * side));
  }
}

// d(loss)/d(conv pre-activation) from d(loss)/d(features).
std::vector<double> pool_relu_backward(const SurrogateShape& s, const ForwardCache& cache,
                                       std::span<const double> dfeat) {
  const int side = s.conv_side(), ps = s.pooled_side();
  std::vector<double> dconv(cache.conv.size(), 0.0);
  const double inv = 1.0 / (s.pool * s.pool);
  for (int o = 0; o < s.channels; ++o)
    for (int py = 0; py < ps; ++py)
      for (int px = 0; px < ps; ++px) {
        const double g = dfeat[(static_cast<std::size_t>(o) * ps + py) * ps + px] * inv;
        if (g == 0.0) continue;
        for (int dy = 0; dy < s.pool; ++dy)
          for (int dx = 0; dx < s.pool; ++dx) {
            const std::size_t idx =
                (static_cast<std::size_t>(o) * side + py * s.pool + dy) * side + px * s.pool + dx;
            if (cache.conv[idx] > 0.0) dconv[idx] = g;
          }
      }
  // Global max: gradient goes to the first maximal cell, if it is active.
  const std::size_t global = static_cast<std::size_t>(s.channels) * ps * ps;
  for (int o = 0; o < s.channels; ++o) {
    const double g = dfeat[global + o];
    if (g == 0.0) continue;
    const double* map = &cache.conv[static_cast<std::size_t>(o) * side * side];
    const auto at = static_cast<std::size_t>(std::max_element(map, map + side * side) - map);
    if (map[at] > 0.0) dconv[static_cast<std::size_t>(o) * side * side + at] += g;
  }
  return dconv;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> to_opponent(std::span<const double> rgb) {
  const std::size_t plane = rgb.size() / 3;
  std::vector<double> out(rgb.size());
  for (std::size_t i = 0; i < plane; ++i) {
    const double r = rgb[i], g = rgb[plane + i], b = rgb[2 * plane + i];
    out[i] = (r + g + b) / 3.0;
    out[plane + i] = r - b;
    out[2 * plane + i] = 0.5 * (r + b) - g;
  }
  return out;
}

SurrogateModel zero_surrogate(const SurrogateShape& shape) {
  if (shape.input < 4 || shape.channels < 1 || shape.pool < 1 || shape.lane_slots < 1 ||
      shape.rows < 1 || shape.pooled_side() < 1)
    throw Error("invalid surrogate shape");
  return {shape, std::vector<double>(shape.param_count(), 0.0)};
}

SurrogateModel init_surrogate(const SurrogateShape& shape, std::uint64_t seed) {
  SurrogateModel m = zero_surrogate(shape);
  Rng rng(seed);
  std::normal_distribution<double> conv(0.0, std::sqrt(2.0 / 27.0));
  for (double& w : m.conv_w()) w = conv(rng);
  std::normal_distribution<double> fc(0.0, 0.1 / std::sqrt(static_cast<double>(shape.feature_dim())));
  for (double& w : m.fc_w()) w = fc(rng);
  auto fb = m.fc_b();
  for (int slot = 0; slot < shape.lane_slots; ++slot)
    for (int j = 0; j < shape.rows; ++j) fb[static_cast<std::size_t>(slot) * shape.rows * 2 + j] = 0.5;
  return m;
}

std::vector<double> to_input(const Image& image, int input_side) {
  if (image.width() != input_side || image.height() != input_side)
    throw Error("surrogate expects a " + std::to_string(input_side) + "x" +
                std::to_string(input_side) + " image, got " + std::to_string(image.width()) +
                "x" + std::to_string(image.height()));
  const std::size_t plane = static_cast<std::size_t>(input_side) * input_side;
  std::vector<double> t(3 * plane);
  const auto bytes = image.bytes();
  for (std::size_t i = 0; i < plane; ++i) {
    t[i] = bytes[3 * i] / 255.0;
    t[plane + i] = bytes[3 * i + 1] / 255.0;
    t[2 * plane + i] = bytes[3 * i + 2] / 255.0;
  }
  return t;
}

std::vector<double> prepare_input(const Image& image, const SurrogateShape& shape) {
  if (image.width() == shape.input && image.height() == shape.input)
    return to_input(image, shape.input);
  return to_input(resize_bilinear(image, shape.input, shape.input), shape.input);
}

std::vector<double> features(const SurrogateModel& model, std::span<const double> input,
                             ForwardCache* cache) {
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  run_backbone(model, input, c);
  return c.features;
}

std::vector<double> features(const SurrogateModel& model, const Image& image) {
  return features(model, to_input(image, model.shape.input));
}

std::vector<double> forward(const SurrogateModel& model, std::span<const double> input,
                            ForwardCache* cache) {
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  run_backbone(model, input, c);
  const auto& s = model.shape;
  const std::size_t nf = s.feature_dim(), no = s.output_dim();
  const auto w = model.fc_w();
  const auto b = model.fc_b();
  c.outputs.assign(b.begin(), b.end());
  for (std::size_t k = 0; k < no; ++k) {
    const double* wr = &w[k * nf];
    double acc = 0.0;
    for (std::size_t f = 0; f < nf; ++f) acc += wr[f] * c.features[f];
    c.outputs[k] += acc;
  }
  return c.outputs;
}

std::vector<double> forward(const SurrogateModel& model, const Image& image) {
  return forward(model, to_input(image, model.shape.input));
}

std::vector<double> features_backward(const SurrogateModel& model,
                                      std::span<const double> input, const ForwardCache& cache,
                                      std::span<const double> dfeatures) {
  const auto& s = model.shape;
  const int in = s.input, side = s.conv_side();
  const auto dconv = pool_relu_backward(s, cache, dfeatures);
  const auto w = model.conv_w();
  std::vector<double> dinput(input.size(), 0.0);
  for (int o = 0; o < s.channels; ++o) {
    const double* g = &dconv[static_cast<std::size_t>(o) * side * side];
    for (int c = 0; c < 3; ++c) {
      double* dst = &dinput[static_cast<std::size_t>(c) * in * in];
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const double wk = w[((o * 3 + c) * 3 + ky) * 3 + kx];
          for (int y = 0; y < side; ++y) {
            const int iy = 2 * y + ky - 1;
            if (iy < 0 || iy >= in) continue;
            for (int x = 0; x < side; ++x) {
              const int ix = 2 * x + kx - 1;
              if (ix < 0 || ix >= in) continue;
              dst[static_cast<std::size_t>(iy) * in + ix] += wk * g[y * side + x];
            }
          }
        }
    }
  }
  // Back from the opponent basis to RGB planes.
  const std::size_t plane = static_cast<std::size_t>(in) * in;
  std::vector<double> drgb(input.size());
  for (std::size_t i = 0; i < plane; ++i) {
    const double y = dinput[i] / 3.0, c1 = dinput[plane + i], c2 = dinput[2 * plane + i];
    drgb[i] = y + c1 + 0.5 * c2;
    drgb[plane + i] = y - c2;
    drgb[2 * plane + i] = y - c1 + 0.5 * c2;
  }
  return drgb;
}

LaneTarget make_target(const ImageRecord& record, const SurrogateShape& shape) {
  if (static_cast<int>(record.h_samples.size()) != shape.rows)
    throw Error("record " + record.raw_file + " has " + std::to_string(record.h_samples.size()) +
                " h_samples, model expects " + std::to_string(shape.rows));
  const std::size_t n = static_cast<std::size_t>(shape.lane_slots) * shape.rows;
  LaneTarget t{std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  const int lanes = std::min<int>(shape.lane_slots, static_cast<int>(record.lanes.size()));
  for (int slot = 0; slot < lanes; ++slot)
    for (int j = 0; j < shape.rows; ++j) {
      const double x = record.lanes[slot].xs[j];
      if (!is_point(x)) continue;
      t.x[static_cast<std::size_t>(slot) * shape.rows + j] = x / record.width;
      t.present[static_cast<std::size_t>(slot) * shape.rows + j] = 1;
    }
  return t;
}

LossTerms loss_terms(std::span<const double> outputs, const LaneTarget& target,
                     const SurrogateShape& shape) {
  LossTerms terms;
  std::size_t present = 0;
  const std::size_t n = static_cast<std::size_t>(shape.lane_slots) * shape.rows;
  for (int slot = 0; slot < shape.lane_slots; ++slot)
    for (int j = 0; j < shape.rows; ++j) {
      const std::size_t t = static_cast<std::size_t>(slot) * shape.rows + j;
      const std::size_t base = static_cast<std::size_t>(slot) * shape.rows * 2;
      const double logit = outputs[base + shape.rows + j];
      terms.bce += softplus(logit) - (target.present[t] ? logit : 0.0);
      if (target.present[t]) {
        const double d = outputs[base + j] - target.x[t];
        terms.mse += d * d;
        ++present;
      }
    }
  terms.bce /= static_cast<double>(n);
  if (present) terms.mse /= static_cast<double>(present);
  return terms;
}

double loss_ld(std::span<const double> outputs, const ImageRecord& record,
               const SurrogateShape& shape) {
  return loss_terms(outputs, make_target(record, shape), shape).total();
}

std::vector<double> loss_gradient(std::span<const double> outputs, const LaneTarget& target,
                                  const SurrogateShape& shape) {
  std::vector<double> g(outputs.size(), 0.0);
  const std::size_t n = static_cast<std::size_t>(shape.lane_slots) * shape.rows;
  const auto present = static_cast<std::size_t>(
      std::count(target.present.begin(), target.present.end(), std::uint8_t{1}));
  for (int slot = 0; slot < shape.lane_slots; ++slot)
    for (int j = 0; j < shape.rows; ++j) {
      const std::size_t t = static_cast<std::size_t>(slot) * shape.rows + j;
      const std::size_t base = static_cast<std::size_t>(slot) * shape.rows * 2;
      const double logit = outputs[base + shape.rows + j];
      g[base + shape.rows + j] = (sigmoid(logit) - target.present[t]) / static_cast<double>(n);
      if (target.present[t])
        g[base + j] = 2.0 * (outputs[base + j] - target.x[t]) / static_cast<double>(present);
    }
  return g;
}

namespace {

// Accumulates one sample's parameter gradient into grad (already zeroed).
double sample_gradient(const SurrogateModel& model, const Sample& sample, std::span<double> grad) {
  const auto& s = model.shape;
  ForwardCache cache;
  const auto out = forward(model, sample.input, &cache);
  const double loss = loss_terms(out, sample.target, s).total();
  const auto dout = loss_gradient(out, sample.target, s);

  const std::size_t nf = s.feature_dim(), no = s.output_dim();
  const auto w = model.fc_w();
  double* gw = &grad[model.fc_offset()];
  double* gb = gw + no * nf;
  std::vector<double> dfeat(nf, 0.0);
  for (std::size_t k = 0; k < no; ++k) {
    const double d = dout[k];
    gb[k] += d;
    if (d == 0.0) continue;
    double* gr = gw + k * nf;
    const double* wr = &w[k * nf];
    for (std::size_t f = 0; f < nf; ++f) {
      gr[f] += d * cache.features[f];
      dfeat[f] += d * wr[f];
    }
  }

  const auto dconv = pool_relu_backward(s, cache, dfeat);
  const int in = s.input, side = s.conv_side();
  for (int o = 0; o < s.channels; ++o) {
    const double* g = &dconv[static_cast<std::size_t>(o) * side * side];
    double bias = 0.0;
    for (int i = 0; i < side * side; ++i) bias += g[i];
    grad[s.conv_weight_count() + o] += bias;
    for (int c = 0; c < 3; ++c) {
      const double* src = &cache.color[static_cast<std::size_t>(c) * in * in];
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          double acc = 0.0;
          for (int y = 0; y < side; ++y) {
            const int iy = 2 * y + ky - 1;
            if (iy < 0 || iy >= in) continue;
            const double* row = src + static_cast<std::size_t>(iy) * in;
            const double* gr = g + static_cast<std::size_t>(y) * side;
            for (int x = 0; x < side; ++x) {
              const int ix = 2 * x + kx - 1;
              if (ix < 0 || ix >= in) continue;
              acc += gr[x] * row[ix];
            }
          }
          grad[((o * 3 + c) * 3 + ky) * 3 + kx] += acc;
        }
    }
  }
  return loss;
}

}  // namespace

double backward(const SurrogateModel& model, std::span<const Sample> batch,
                std::span<double> grad, int jobs) {
  if (batch.empty()) throw Error("backward: empty batch");
  if (grad.size() != model.params.size()) throw Error("backward: gradient size mismatch");
  std::vector<std::vector<double>> per(batch.size());
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), jobs, [&](std::size_t i) {
    per[i].assign(model.params.size(), 0.0);
    losses[i] = sample_gradient(model, batch[i], per[i]);
  });
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += per[i][p];
    loss += losses[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return loss * inv;
}

double mean_loss(const SurrogateModel& model, std::span<const Sample> batch) {
  if (batch.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : batch) acc += loss_terms(forward(model, s.input), s.target, model.shape).total();
  return acc / static_cast<double>(batch.size());
}

ImageRecord decode_prediction(std::span<const double> outputs, const ImageRecord& like,
                              const SurrogateShape& shape) {
  if (static_cast<int>(like.h_samples.size()) != shape.rows)
    throw Error("decode_prediction: record row grid does not match the model");
  ImageRecord pred;
  pred.raw_file = like.raw_file;
  pred.h_samples = like.h_samples;
  pred.width = like.width;
  pred.height = like.height;
  pred.lanes.resize(shape.lane_slots);
  for (int slot = 0; slot < shape.lane_slots; ++slot) {
    auto& xs = pred.lanes[slot].xs;
    xs.assign(shape.rows, kNoPoint);
    const std::size_t base = static_cast<std::size_t>(slot) * shape.rows * 2;
    for (int j = 0; j < shape.rows; ++j) {
      if (!(outputs[base + shape.rows + j] > 0.0)) continue;
      const double x = outputs[base + j] * like.width;
      if (x >= 0.0 && x < like.width) xs[j] = x;
    }
  }
  return pred;
}

ImageRecord predict(const SurrogateModel& model, const Image& image, const ImageRecord& like) {
  return decode_prediction(forward(model, prepare_input(image, model.shape)), like, model.shape);
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw Error("learning_rate must be finite and >= 0");
}

SurrogateModel train(const SurrogateModel& model, std::span<const Image> images,
                     std::span<const ImageRecord> records, const TrainConfig& cfg, TrainLog* log,
                     const EpochCallback& on_epoch) {
  cfg.validate();
  if (images.size() != records.size()) throw Error("train: images and records differ in count");
  if (records.empty()) throw Error("train: empty dataset");
  SurrogateModel m = model;
  const auto& s = m.shape;

  std::vector<LaneTarget> targets;
  targets.reserve(records.size());
  for (const auto& r : records) targets.push_back(make_target(r, s));

  auto full_loss = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i)
      acc += loss_terms(forward(m, prepare_input(images[i], s)), targets[i], s).total();
    return acc / static_cast<double>(images.size());
  };

  TrainLog local;
  TrainLog& lg = log ? *log : local;
  lg = {};
  lg.initial_loss = full_loss();

  Adam adam(m.params.size(), cfg.learning_rate);
  std::vector<double> grad(m.params.size());
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  std::vector<Sample> batch;
  const std::size_t per_epoch = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(per_epoch) * cfg.epochs;
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i)
        batch.push_back({prepare_input(images[order[i]], s), targets[order[i]]});
      const double loss = backward(m, batch, grad, cfg.jobs);
      if (!std::isfinite(loss))
        throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1) +
                    ", batch " + std::to_string(batches + 1));
      double lr = cfg.learning_rate;
      if (cfg.cosine_decay)
        lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / total_steps));
      ++step;
      if (cfg.optimizer == Optimizer::adam) {
        adam.set_learning_rate(lr);
        adam.step(m.params, grad);
      } else {
        sgd_step(m.params, grad, lr);
      }
      sum += loss;
      ++batches;
    }
    lg.epoch_loss.push_back(sum / static_cast<double>(batches));
    if (on_epoch) on_epoch(epoch + 1, lg.epoch_loss.back());
  }
  lg.final_loss = full_loss();
  if (!std::isfinite(lg.final_loss)) throw Error("training diverged: non-finite final loss");
  return m;
}

Checkpoint to_checkpoint(const SurrogateModel& model) {
  const auto& s = model.shape;
  return {kCheckpointKind, {s.input, s.channels, s.pool, s.lane_slots, s.rows}, model.params};
}

SurrogateModel surrogate_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != kCheckpointKind) throw Error("checkpoint holds '" + ckpt.kind + "', not a surrogate");
  if (ckpt.shape.size() != 5) throw Error("surrogate checkpoint: bad shape metadata");
  SurrogateShape s;
  s.input = static_cast<int>(ckpt.shape[0]);
  s.channels = static_cast<int>(ckpt.shape[1]);
  s.pool = static_cast<int>(ckpt.shape[2]);
  s.lane_slots = static_cast<int>(ckpt.shape[3]);
  s.rows = static_cast<int>(ckpt.shape[4]);
  SurrogateModel m = zero_surrogate(s);
  if (ckpt.params.size() != m.params.size())
    throw Error("surrogate checkpoint: parameter count does not match shape");
  m.params = ckpt.params;
  return m;
}

void save_surrogate(const std::filesystem::path& path, const SurrogateModel& model) {
  save_checkpoint(path, to_checkpoint(model));
}

SurrogateModel load_surrogate(const std::filesystem::path& path) {
  return surrogate_from_checkpoint(load_checkpoint(path));
}

}  // namespace badlane
