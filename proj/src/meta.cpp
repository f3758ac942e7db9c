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

#include "badlane/meta.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "badlane/common.hpp"
#include "badlane/optim.hpp"

namespace badlane {

namespace {

constexpr const char* kCheckpointKind = "meta_generator";

struct Layout {
  std::size_t enc_w, enc_b, z_w, z_b, dec_w, dec_b, end;
  explicit Layout(const GeneratorShape& s) {
    const std::size_t h = s.hidden;
    enc_w = 0;
    enc_b = enc_w + 2 * h * s.cond_dim();
    z_w = enc_b + 2 * h;
    z_b = z_w + h * s.noise_dim;
    dec_w = z_b + h;
    dec_b = dec_w + s.decoder_dim() * h;
    end = dec_b + s.decoder_dim();
  }
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Decoder grid cell feeding patch pixel (c, r, col).
std::size_t grid_index(const GeneratorShape& s, int c, int r, int col) {
  return (static_cast<std::size_t>(c) * s.grid_h() + r / s.upsample) * s.grid_w() +
         col / s.upsample;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

}  // namespace

MetaGenerator init_meta_generator(const GeneratorShape& shape, std::uint64_t seed) {
  if (shape.patch_w < 1 || shape.patch_h < 1 || shape.upsample < 1 || shape.noise_dim < 1 ||
      shape.hidden < 1 || shape.cond_grid < 1 || shape.cond_input < shape.cond_grid)
    throw Error("invalid generator shape");
  MetaGenerator g{shape, std::vector<double>(shape.param_count(), 0.0)};
  const Layout L(shape);
  Rng rng(seed);
  std::normal_distribution<double> enc(0.0, 0.1 / std::sqrt(static_cast<double>(shape.cond_dim())));
  std::normal_distribution<double> zw(0.0, 1.0 / std::sqrt(static_cast<double>(shape.noise_dim)));
  std::normal_distribution<double> dec(0.0, 1.0 / std::sqrt(static_cast<double>(shape.hidden)));
  for (std::size_t i = L.enc_w; i < L.enc_b; ++i) g.params[i] = enc(rng);
  for (std::size_t i = L.z_w; i < L.z_b; ++i) g.params[i] = zw(rng);
  for (std::size_t i = L.dec_w; i < L.dec_b; ++i) g.params[i] = dec(rng);
  return g;
}

std::vector<double> condition_vector(const Image& image, const GeneratorShape& shape) {
  if (image.width() != shape.cond_input || image.height() != shape.cond_input)
    throw Error("meta generator conditions on " + std::to_string(shape.cond_input) + "x" +
                std::to_string(shape.cond_input) + " images, got " +
                std::to_string(image.width()) + "x" + std::to_string(image.height()));
  const int g = shape.cond_grid;
  std::vector<double> cond(shape.cond_dim(), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(g) * g, 0);
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c) {
      const int gy = r * g / image.height(), gx = c * g / image.width();
      const Rgb p = image.at(c, r);
      const std::size_t cell = static_cast<std::size_t>(gy) * g + gx;
      cond[cell] += p.r / 255.0;
      cond[static_cast<std::size_t>(g) * g + cell] += p.g / 255.0;
      cond[2 * static_cast<std::size_t>(g) * g + cell] += p.b / 255.0;
      ++counts[cell];
    }
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t cell = 0; cell < counts.size(); ++cell)
      cond[ch * counts.size() + cell] /= counts[cell];
  return cond;
}

std::vector<double> sample_noise(const GeneratorShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> z(shape.noise_dim);
  for (double& v : z) v = n(rng);
  return z;
}

std::vector<double> generate_patch(const MetaGenerator& gen, std::span<const double> params,
                                   std::span<const double> cond, std::span<const double> z,
                                   GeneratorCache* cache) {
  const auto& s = gen.shape;
  const Layout L(s);
  if (params.size() != L.end) throw Error("generator parameter count mismatch");
  if (cond.size() != s.cond_dim() || z.size() != static_cast<std::size_t>(s.noise_dim))
    throw Error("generator input size mismatch");
  GeneratorCache local;
  GeneratorCache& c = cache ? *cache : local;
  c.cond.assign(cond.begin(), cond.end());
  c.z.assign(z.begin(), z.end());
  const std::size_t H = s.hidden, cd = s.cond_dim(), D = s.decoder_dim();

  c.mod.assign(2 * H, 0.0);
  for (std::size_t i = 0; i < 2 * H; ++i) {
    double acc = params[L.enc_b + i];
    for (std::size_t k = 0; k < cd; ++k) acc += params[L.enc_w + i * cd + k] * cond[k];
    c.mod[i] = acc;
  }
  c.u.assign(H, 0.0);
  c.h.assign(H, 0.0);
  for (std::size_t i = 0; i < H; ++i) {
    double acc = params[L.z_b + i];
    for (int k = 0; k < s.noise_dim; ++k) acc += params[L.z_w + i * s.noise_dim + k] * z[k];
    c.u[i] = acc;
    c.h[i] = std::tanh(acc * (1.0 + c.mod[i]) + c.mod[H + i]);
  }
  c.out.assign(D, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    double acc = params[L.dec_b + d];
    for (std::size_t i = 0; i < H; ++i) acc += params[L.dec_w + d * H + i] * c.h[i];
    c.out[d] = sigmoid(acc);
  }
  std::vector<double> patch(s.patch_dim());
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < s.patch_h; ++r)
      for (int col = 0; col < s.patch_w; ++col)
        patch[(static_cast<std::size_t>(ch) * s.patch_h + r) * s.patch_w + col] =
            c.out[grid_index(s, ch, r, col)];
  return patch;
}

std::vector<double> generator_backward(const MetaGenerator& gen, std::span<const double> params,
                                       const GeneratorCache& c, std::span<const double> dpatch) {
  const auto& s = gen.shape;
  const Layout L(s);
  const std::size_t H = s.hidden, cd = s.cond_dim(), D = s.decoder_dim();
  std::vector<double> grad(L.end, 0.0);

  std::vector<double> dout(D, 0.0);
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < s.patch_h; ++r)
      for (int col = 0; col < s.patch_w; ++col)
        dout[grid_index(s, ch, r, col)] +=
            dpatch[(static_cast<std::size_t>(ch) * s.patch_h + r) * s.patch_w + col];
  std::vector<double> dh(H, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    const double g = dout[d] * c.out[d] * (1.0 - c.out[d]);
    grad[L.dec_b + d] = g;
    for (std::size_t i = 0; i < H; ++i) {
      grad[L.dec_w + d * H + i] = g * c.h[i];
      dh[i] += g * params[L.dec_w + d * H + i];
    }
  }
  std::vector<double> dmod(2 * H, 0.0);
  for (std::size_t i = 0; i < H; ++i) {
    const double da = dh[i] * (1.0 - c.h[i] * c.h[i]);
    const double du = da * (1.0 + c.mod[i]);
    dmod[i] = da * c.u[i];
    dmod[H + i] = da;
    grad[L.z_b + i] = du;
    for (int k = 0; k < s.noise_dim; ++k) grad[L.z_w + i * s.noise_dim + k] = du * c.z[k];
  }
  for (std::size_t i = 0; i < 2 * H; ++i) {
    grad[L.enc_b + i] = dmod[i];
    for (std::size_t k = 0; k < cd; ++k) grad[L.enc_w + i * cd + k] = dmod[i] * c.cond[k];
  }
  return grad;
}

Image patch_to_image(std::span<const double> patch, int width, int height) {
  if (patch.size() != static_cast<std::size_t>(width) * height * 3)
    throw Error("patch size does not match dimensions");
  Image img(width, height);
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  auto to8 = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
  };
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * width + c;
      img.set(c, r, {to8(patch[i]), to8(patch[plane + i]), to8(patch[2 * plane + i])});
    }
  return img;
}

std::vector<double> image_to_patch(const Image& image) {
  const std::size_t plane = static_cast<std::size_t>(image.width()) * image.height();
  std::vector<double> patch(3 * plane);
  const auto bytes = image.bytes();
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t ch = 0; ch < 3; ++ch) patch[ch * plane + i] = bytes[3 * i + ch] / 255.0;
  return patch;
}

Image sample_meta_trigger(const MetaGenerator& gen, const Image& x, std::uint64_t seed) {
  const auto cond = condition_vector(x, gen.shape);
  const auto z = sample_noise(gen.shape, seed);
  return patch_to_image(generate_patch(gen, gen.params, cond, z), gen.shape.patch_w,
                        gen.shape.patch_h);
}

void MetaConfig::validate() const {
  if (!(lambda >= 0.0)) throw Error("lambda must be >= 0");
  if (omega < 0) throw Error("omega must be >= 0");
  if (!(mu > 0.0) || !(gamma > 0.0)) throw Error("meta learning rates must be positive");
  if (batch_tasks < 1) throw Error("batch_tasks must be >= 1");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (tasks_per_image < 1) throw Error("tasks_per_image must be >= 1");
  if (!(env_prob >= 0.0 && env_prob <= 1.0)) throw Error("env_prob must be in [0, 1]");
  if (region_w < 1 || region_h < 1) throw Error("trigger region must be non-empty");
  if (trigger_k < 1 || trigger_k > static_cast<std::size_t>(region_w) * region_h)
    throw Error("trigger budget must fit the region");
}

std::vector<double> composite_input(std::span<const double> x_input, int side,
                                    std::span<const double> patch, int patch_w, int patch_h,
                                    PixelPos origin, CompositeMode mode) {
  if (origin.col < 0 || origin.row < 0 || origin.col + patch_w > side ||
      origin.row + patch_h > side)
    throw Error("meta-trigger region out of bounds");
  std::vector<double> out(x_input.begin(), x_input.end());
  const std::size_t plane = static_cast<std::size_t>(side) * side;
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < patch_h; ++r)
      for (int c = 0; c < patch_w; ++c) {
        const std::size_t dst = ch * plane + static_cast<std::size_t>(origin.row + r) * side +
                                origin.col + c;
        const double p = patch[(static_cast<std::size_t>(ch) * patch_h + r) * patch_w + c];
        out[dst] = mode == CompositeMode::overwrite ? p : std::clamp(out[dst] + p - 0.5, 0.0, 1.0);
      }
  return out;
}

MetaLoss meta_loss(const SurrogateModel& teacher, const MetaTask& task,
                   std::span<const double> patch, int patch_w, int patch_h, double lambda,
                   CompositeMode mode, bool want_grad) {
  const int side = teacher.shape.input;
  const auto x_in = to_input(task.x, side);
  const auto te_in = to_input(task.x_te, side);
  const auto tm_in = composite_input(x_in, side, patch, patch_w, patch_h, task.origin, mode);

  ForwardCache cache;
  const auto f_m = features(teacher, tm_in, &cache);
  const auto f_e = features(teacher, te_in);
  const auto f_x = features(teacher, x_in);

  MetaLoss out;
  out.match = squared_distance(f_m, f_e);
  out.distance = squared_distance(f_m, f_x);
  out.value = out.match - lambda * out.distance;
  if (!want_grad) return out;

  std::vector<double> dfeat(f_m.size());
  for (std::size_t i = 0; i < f_m.size(); ++i)
    dfeat[i] = 2.0 * (f_m[i] - f_e[i]) - 2.0 * lambda * (f_m[i] - f_x[i]);
  const auto dinput = features_backward(teacher, tm_in, cache, dfeat);
  const std::size_t plane = static_cast<std::size_t>(side) * side;
  out.dpatch.assign(static_cast<std::size_t>(patch_w) * patch_h * 3, 0.0);
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < patch_h; ++r)
      for (int c = 0; c < patch_w; ++c) {
        const std::size_t src = ch * plane + static_cast<std::size_t>(task.origin.row + r) * side +
                                task.origin.col + c;
        double g = dinput[src];
        if (mode == CompositeMode::additive) {
          const double v = x_in[src] + patch[(static_cast<std::size_t>(ch) * patch_h + r) * patch_w + c] - 0.5;
          if (v <= 0.0 || v >= 1.0) g = 0.0;
        }
        out.dpatch[(static_cast<std::size_t>(ch) * patch_h + r) * patch_w + c] = g;
      }
  return out;
}

double task_loss(const SurrogateModel& teacher, const MetaGenerator& gen,
                 std::span<const double> params, const MetaTask& task,
                 std::span<const double> z, const MetaConfig& cfg) {
  const auto cond = condition_vector(task.x, gen.shape);
  const auto patch = generate_patch(gen, params, cond, z);
  return meta_loss(teacher, task, patch, gen.shape.patch_w, gen.shape.patch_h, cfg.lambda,
                   cfg.composite)
      .value;
}

double probe_task_loss(const SurrogateModel& teacher, const MetaGenerator& gen,
                       std::span<const double> params, const MetaTask& task,
                       const MetaConfig& cfg, int probes) {
  double acc = 0.0;
  for (int p = 0; p < probes; ++p)
    acc += task_loss(teacher, gen, params,
                     task, sample_noise(gen.shape, derive_seed(task.seed, 0x70726f6265ULL, p)), cfg);
  return acc / probes;
}

namespace {

// Loss and parameter gradient for one noise draw.
double loss_and_grad(const SurrogateModel& teacher, const MetaGenerator& gen,
                     std::span<const double> params, const MetaTask& task,
                     std::span<const double> cond, std::span<const double> z,
                     const MetaConfig& cfg, std::vector<double>& grad) {
  GeneratorCache cache;
  const auto patch = generate_patch(gen, params, cond, z, &cache);
  const auto loss = meta_loss(teacher, task, patch, gen.shape.patch_w, gen.shape.patch_h,
                              cfg.lambda, cfg.composite, true);
  grad = generator_backward(gen, params, cache, loss.dpatch);
  return loss.value;
}

}  // namespace

std::vector<double> inner_adam(const SurrogateModel& teacher, const MetaGenerator& gen,
                               const MetaTask& task, const MetaConfig& cfg) {
  std::vector<double> params = gen.params;
  if (cfg.omega == 0) return params;
  const auto cond = condition_vector(task.x, gen.shape);
  Adam adam(params.size(), cfg.mu);
  std::vector<double> grad;
  std::vector<double> z = sample_noise(gen.shape, derive_seed(task.seed, 0x7a));
  for (int step = 0; step < cfg.omega; ++step) {
    if (!cfg.fixed_noise_per_task && step > 0)
      z = sample_noise(gen.shape, derive_seed(task.seed, 0x7a, step));
    const double loss = loss_and_grad(teacher, gen, params, task, cond, z, cfg, grad);
    if (!std::isfinite(loss))
      throw Error("meta task loss is not finite at inner step " + std::to_string(step + 1));
    adam.step(params, grad);
  }
  return params;
}

std::vector<double> outer_reptile(std::span<const double> phi,
                                  std::span<const std::vector<double>> task_params, double gamma) {
  if (task_params.empty()) return {phi.begin(), phi.end()};
  for (const auto& p : task_params)
    if (p.size() != phi.size()) throw Error("outer_reptile: parameter shape mismatch");
  std::vector<double> sum(phi.size(), 0.0);
  for (const auto& p : task_params)
    for (std::size_t i = 0; i < phi.size(); ++i) sum[i] += p[i] - phi[i];
  const double scale = gamma / static_cast<double>(task_params.size());
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] + scale * sum[i];
  return out;
}

std::vector<MetaTask> build_meta_tasks(std::span<const Image> images, const MetaConfig& cfg,
                                       const ColorSet& colors) {
  cfg.validate();
  if (images.empty()) throw Error("build_meta_tasks: empty dataset");
  if (colors.colors.empty()) throw Error("build_meta_tasks: empty color set");
  const MaskSpec square = full_mask(cfg.region_w, cfg.region_h);
  std::vector<MetaTask> tasks;
  tasks.reserve(images.size() * cfg.tasks_per_image);
  for (std::size_t i = 0; i < images.size(); ++i)
    for (int t = 0; t < cfg.tasks_per_image; ++t) {
      MetaTask task;
      task.seed = derive_seed(cfg.seed, i, static_cast<std::uint64_t>(t));
      task.x = images[i];
      task.trigger = assemble_trigger(square, colors, cfg.trigger_k, derive_seed(task.seed, 1));
      Rng rng(derive_seed(task.seed, 2));
      task.origin = random_origin(task.x.width(), task.x.height(), cfg.region_w, cfg.region_h, rng);
      task.conditions = sample_conditions(cfg.env_prob, derive_seed(task.seed, 3), cfg.env_intensity);
      task.x_te = apply_conditions_in_region(apply_trigger(task.x, task.trigger, task.origin),
                                             task.conditions, task.origin, cfg.region_w,
                                             cfg.region_h);
      tasks.push_back(std::move(task));
    }
  return tasks;
}

MetaGenerator pretrain_meta_generator(const MetaGenerator& gen, std::span<const MetaTask> tasks,
                                      int steps, std::uint64_t seed, double lr) {
  MetaGenerator out = gen;
  if (steps <= 0 || tasks.empty()) return out;
  const auto& s = gen.shape;
  Adam adam(out.params.size(), lr);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, tasks.size() - 1);
  for (int step = 0; step < steps; ++step) {
    const MetaTask& task = tasks[pick(rng)];
    if (task.x_te.width() < task.origin.col + s.patch_w ||
        task.x_te.height() < task.origin.row + s.patch_h)
      throw Error("pretrain: task region does not match the generator patch size");
    const auto cond = condition_vector(task.x, s);
    const auto z = sample_noise(s, rng());
    GeneratorCache cache;
    const auto patch = generate_patch(out, out.params, cond, z, &cache);
    std::vector<double> dpatch(patch.size());
    const std::size_t plane = static_cast<std::size_t>(s.patch_w) * s.patch_h;
    for (int r = 0; r < s.patch_h; ++r)
      for (int c = 0; c < s.patch_w; ++c) {
        const Rgb px = task.x_te.at(task.origin.col + c, task.origin.row + r);
        const double target[3] = {px.r / 255.0, px.g / 255.0, px.b / 255.0};
        for (int ch = 0; ch < 3; ++ch) {
          const std::size_t i = ch * plane + static_cast<std::size_t>(r) * s.patch_w + c;
          dpatch[i] = 2.0 * (patch[i] - target[ch]) / static_cast<double>(patch.size());
        }
      }
    adam.step(out.params, generator_backward(out, out.params, cache, dpatch));
  }
  return out;
}

MetaGenerator train_meta_generator(std::span<const MetaTask> tasks,
                                   const SurrogateModel& teacher, const MetaGenerator& init,
                                   const MetaConfig& cfg, MetaTrainLog* log,
                                   const MetaBatchCallback& on_batch) {
  cfg.validate();
  MetaGenerator gen = init;
  MetaTrainLog local;
  MetaTrainLog& lg = log ? *log : local;
  lg = {};
  if (tasks.empty() || cfg.epochs == 0) return gen;

  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, 0x6f75746572ULL));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    int batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_tasks) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_tasks);
      const std::size_t n = end - start;
      std::vector<std::vector<double>> adapted(n);
      std::vector<double> losses(n, 0.0);
      std::vector<char> ok(n, 1);
      parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const MetaTask& task = tasks[order[start + i]];
        try {
          losses[i] = task_loss(teacher, gen, gen.params, task,
                                sample_noise(gen.shape, derive_seed(task.seed, 0x7a)), cfg);
          if (!std::isfinite(losses[i])) throw Error("non-finite initial loss");
          adapted[i] = inner_adam(teacher, gen, task, cfg);
          for (double p : adapted[i])
            if (!std::isfinite(p)) throw Error("non-finite parameters");
        } catch (const Error&) {
          ok[i] = 0;
        }
      });
      std::vector<std::vector<double>> kept;
      double loss_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!ok[i]) {
          ++lg.skipped_tasks;
          std::cerr << "warning: skipping diverged meta task " << order[start + i] << "\n";
          continue;
        }
        kept.push_back(std::move(adapted[i]));
        loss_sum += losses[i];
      }
      if (!kept.empty()) gen.params = outer_reptile(gen.params, kept, cfg.gamma);
      MetaLogRow row{epoch + 1, ++batch_no,
                     kept.empty() ? 0.0 : loss_sum / static_cast<double>(kept.size())};
      lg.rows.push_back(row);
      if (on_batch) on_batch(row);
    }
  }
  return gen;
}

void write_meta_log(const std::filesystem::path& path, const MetaTrainLog& log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write meta log: " + path.string());
  out << "epoch,batch,mean_task_loss\n";
  char buf[64];
  for (const auto& r : log.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.mean_task_loss);
    out << r.epoch << ',' << r.batch << ',' << buf << '\n';
  }
}

Checkpoint to_checkpoint(const MetaGenerator& gen) {
  const auto& s = gen.shape;
  return {kCheckpointKind,
          {s.patch_w, s.patch_h, s.upsample, s.noise_dim, s.hidden, s.cond_grid, s.cond_input},
          gen.params};
}

MetaGenerator generator_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != kCheckpointKind)
    throw Error("checkpoint holds '" + ckpt.kind + "', not a meta generator");
  if (ckpt.shape.size() != 7) throw Error("generator checkpoint: bad shape metadata");
  GeneratorShape s;
  s.patch_w = static_cast<int>(ckpt.shape[0]);
  s.patch_h = static_cast<int>(ckpt.shape[1]);
  s.upsample = static_cast<int>(ckpt.shape[2]);
  s.noise_dim = static_cast<int>(ckpt.shape[3]);
  s.hidden = static_cast<int>(ckpt.shape[4]);
  s.cond_grid = static_cast<int>(ckpt.shape[5]);
  s.cond_input = static_cast<int>(ckpt.shape[6]);
  if (ckpt.params.size() != s.param_count())
    throw Error("generator checkpoint: parameter count does not match shape");
  return {s, ckpt.params};
}

void save_generator(const std::filesystem::path& path, const MetaGenerator& gen) {
  save_checkpoint(path, to_checkpoint(gen));
}

MetaGenerator load_generator(const std::filesystem::path& path) {
  return generator_from_checkpoint(load_checkpoint(path));
}

}  // namespace badlane
