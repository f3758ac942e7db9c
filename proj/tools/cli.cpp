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


#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <vector>

#include "badlane/common.hpp"
#include "badlane/dataset.hpp"
#include "badlane/environment.hpp"
#include "badlane/eval.hpp"
#include "badlane/evalsuite.hpp"
#include "badlane/meta.hpp"
#include "badlane/poison.hpp"
#include "badlane/strategies.hpp"
#include "badlane/surrogate.hpp"
#include "badlane/trigger.hpp"

namespace badlane::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 unavailable");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char two[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(two, sizeof two, "%02x", md[i]);
    hex += two;
  }
  return hex;
}

namespace {

// Bookkeeping shared by all sub-commands: the seed, worker count and the
// files read and written, echoed into a run manifest.
struct Run {
  CLI::App* sub = nullptr;
  std::optional<std::uint64_t> seed;
  int jobs = default_jobs();
  std::string manifest;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;

  std::uint64_t require_seed() const {
    if (!seed) throw Error("a seed is required (--seed or BADLANE_SEED)");
    return *seed;
  }

  void write_manifest(const fs::path& fallback) const {
    const fs::path path = manifest.empty() ? fallback : fs::path(manifest);
    if (path.empty()) return;
    Json config = Json::object();
    for (const CLI::Option* opt : sub->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "manifest") continue;
      const auto& res = opt->results();
      if (opt->get_expected_max() > 1) {
        config[name] = res;
      } else if (!res.empty()) {
        config[name] = res.back();
      } else {
        config[name] = opt->get_default_str();
      }
    }
    Json doc;
    doc["command"] = sub->get_name();
    doc["seed"] = seed ? Json(*seed) : Json(nullptr);
    doc["config"] = config;
    Json in = Json::object(), out = Json::object();
    for (const auto& p : inputs) in[p.generic_string()] = sha256_file(p);
    for (const auto& p : outputs) out[p.generic_string()] = sha256_file(p);
    doc["inputs"] = in;
    doc["outputs"] = out;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write run manifest: " + path.string());
    f << doc.dump(2) << '\n';
  }
};

void add_common(CLI::App* sub, Run& run) {
  sub->add_option("--seed", run.seed, "Run seed")->envname("BADLANE_SEED");
  sub->add_option("--jobs", run.jobs, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--manifest", run.manifest, "Run manifest path (overrides the default)");
}

struct StrategyOptions {
  std::string name = "loa";
  StrategyConfig cfg;

  void add(CLI::App* sub) {
    sub->add_option("--strategy", name, "Label transform: lda, lsa, lra or loa")
        ->check(CLI::IsMember({"lda", "lsa", "lra", "loa"}))
        ->capture_default_str();
    sub->add_option("--alpha", cfg.alpha_deg, "LRA rotation angle in degrees")->capture_default_str();
    sub->add_option("--beta", cfg.beta, "LOA offset in pixels")->capture_default_str();
    sub->add_option("--lsa-fit", cfg.lsa_fit_fraction, "LSA fitted prefix fraction")
        ->capture_default_str();
    sub->add_option("--lsa-tol", cfg.lsa_deviation_tol, "LSA deviation tolerance in pixels")
        ->capture_default_str();
    sub->add_option("--rotation-sign", cfg.rotation_sign, "LRA sign convention, 1 or -1")
        ->check(CLI::IsMember({1, -1}))
        ->capture_default_str();
  }

  StrategyConfig resolve() {
    cfg.kind = parse_strategy(name);
    cfg.validate();
    return cfg;
  }
};

struct LoadedSet {
  std::vector<ImageRecord> records;
  std::vector<Image> images;
};

fs::path root_or_parent(const std::string& root, const fs::path& labels) {
  if (!root.empty()) return root;
  return labels.has_parent_path() ? labels.parent_path() : fs::path(".");
}

// Labels plus every referenced image; record dimensions follow the images.
LoadedSet load_set(const fs::path& labels, const fs::path& root, int jobs, Run& run,
                   std::size_t limit = 0) {
  LoadedSet set;
  set.records = read_label_file(labels);
  run.inputs.push_back(labels);
  if (limit > 0 && set.records.size() > limit) set.records.resize(limit);
  set.images.resize(set.records.size());
  parallel_for(set.records.size(), jobs, [&](std::size_t i) {
    set.images[i] = read_image(root / set.records[i].raw_file);
    set.records[i].width = set.images[i].width();
    set.records[i].height = set.images[i].height();
  });
  return set;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- commands

struct ExtractColors {
  Run run;
  std::vector<std::string> patterns;
  int synthetic = 0;
  int synthetic_size = 128;
  std::string out;
  BrownPredicate pred;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("extract-colors", "Build the brown color set from mud images");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--pattern", patterns, "Mud pattern image (repeatable)")
        ->check(CLI::ExistingFile);
    s->add_option("--synthetic", synthetic, "Also use N generated mud patterns (needs --seed)")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--synthetic-size", synthetic_size, "Side of generated patterns")
        ->capture_default_str();
    s->add_option("--out", out, "Color set file")->required();
    s->add_option("--hue-min", pred.hue_min)->capture_default_str();
    s->add_option("--hue-max", pred.hue_max)->capture_default_str();
    s->add_option("--sat-min", pred.sat_min)->capture_default_str();
    s->add_option("--sat-max", pred.sat_max)->capture_default_str();
    s->add_option("--val-min", pred.val_min)->capture_default_str();
    s->add_option("--val-max", pred.val_max)->capture_default_str();
  }

  void exec() {
    pred.validate();
    std::vector<Image> images;
    for (const auto& p : patterns) {
      images.push_back(read_image(p));
      run.inputs.push_back(p);
    }
    if (synthetic > 0) {
      const std::uint64_t seed = run.require_seed();
      for (int i = 0; i < synthetic; ++i)
        images.push_back(make_mud_pattern(synthetic_size, synthetic_size, derive_seed(seed, i)));
    }
    if (images.empty()) throw Error("no pattern images given (--pattern or --synthetic)");
    const ColorSet colors = extract_color_set(images, pred);
    write_color_set(out, colors);
    run.outputs.push_back(out);
    std::cout << "colors=" << colors.size() << '\n';
    run.write_manifest(out + ".run.json");
  }
};

struct GenTrigger {
  Run run;
  std::string colors, out, png;
  std::size_t k = 900;
  int width = 100, height = 100;
  bool use_mask = false;
  int vertices = 12;
  double drop = 0.0;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("gen-trigger", "Assemble an amorphous trigger pattern");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--colors", colors, "Color set file")->required()->check(CLI::ExistingFile);
    s->add_option("--k", k, "Trigger pixel count")->capture_default_str();
    s->add_option("--width", width, "Region width")->capture_default_str();
    s->add_option("--height", height, "Region height")->capture_default_str();
    s->add_flag("--use-mask", use_mask, "Sample positions from a generated polygon mask");
    s->add_option("--vertices", vertices, "Mask polygon vertices")->capture_default_str();
    s->add_option("--drop", drop, "Fraction of mask cells removed")->capture_default_str();
    s->add_option("--out", out, "Trigger JSON")->required();
    s->add_option("--png", png, "Optional preview image of the region");
  }

  void exec() {
    const std::uint64_t seed = run.require_seed();
    const ColorSet cs = read_color_set(colors);
    run.inputs.push_back(colors);
    const MaskSpec mask = use_mask ? generate_mask(width, height, vertices, drop,
                                                   derive_seed(seed, 1))
                                   : full_mask(width, height);
    const TriggerPattern t = assemble_trigger(mask, cs, k, derive_seed(seed, 2));
    write_text(out, trigger_to_json(t) + "\n");
    run.outputs.push_back(out);
    if (!png.empty()) {
      write_image(png, apply_trigger(Image(width, height, {128, 128, 128}), t, {0, 0}));
      run.outputs.push_back(png);
    }
    run.write_manifest(out + ".run.json");
  }
};

struct GenSynth {
  Run run;
  std::size_t n = 100;
  int width = 64, height = 64;
  std::string out, labels = "label_data.json";

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("gen-synth", "Render a synthetic lane dataset");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--n", n, "Number of records")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--width", width)->capture_default_str()->check(CLI::Range(32, 1 << 14));
    s->add_option("--height", height)->capture_default_str()->check(CLI::Range(32, 1 << 14));
    s->add_option("--out", out, "Dataset root directory")->required();
    s->add_option("--labels", labels, "Label file name under the root")->capture_default_str();
  }

  void exec() {
    const auto data = generate_synthetic_dataset(n, width, height, run.require_seed());
    save_dataset(data, out, labels);
    run.outputs.push_back(fs::path(out) / labels);
    for (const auto& r : data.dataset.records) run.outputs.push_back(fs::path(out) / r.raw_file);
    run.write_manifest(fs::path(out) / "gen-synth.run.json");
  }
};

struct Poison {
  Run run;
  PoisonConfig cfg;
  StrategyOptions strategy;
  std::string labels, root, colors, generator, out_labels, manifest_csv, replay;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("poison", "Build a poisoned dataset D'");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--labels", labels, "Clean label file")->required()->check(CLI::ExistingFile);
    s->add_option("--root", root, "Image root (default: label file directory)");
    s->add_option("--colors", colors, "Color set file")->check(CLI::ExistingFile);
    s->add_option("--generator", generator, "Meta generator checkpoint")->check(CLI::ExistingFile);
    s->add_option("--rate", cfg.rate, "Poisoning rate")->capture_default_str();
    s->add_option("--k", cfg.trigger_k, "Amorphous trigger pixel count")->capture_default_str();
    s->add_option("--region-w", cfg.region_w)->capture_default_str();
    s->add_option("--region-h", cfg.region_h)->capture_default_str();
    s->add_option("--meta-fraction", cfg.meta_fraction, "Share of meta triggers")
        ->capture_default_str();
    s->add_option("--env-prob", cfg.env_prob, "Per-condition probability")->capture_default_str();
    s->add_option("--env-intensity", cfg.env_intensity)->capture_default_str();
    s->add_flag("--use-mask", cfg.use_mask, "Amorphous positions from a polygon mask");
    s->add_option("--mask-vertices", cfg.mask_vertices)->capture_default_str();
    s->add_option("--mask-drop", cfg.mask_drop)->capture_default_str();
    strategy.add(s);
    s->add_option("--out-labels", out_labels, "Label file for D'")->required();
    s->add_option("--manifest-csv", manifest_csv, "Poison manifest (default: <out-labels>.manifest.csv)");
    s->add_option("--replay", replay, "Rebuild from an existing poison manifest")
        ->check(CLI::ExistingFile);
  }

  void exec() {
    cfg.seed = run.require_seed();
    cfg.strategy = strategy.resolve();
    if (!colors.empty()) {
      cfg.colors = read_color_set(colors);
      run.inputs.push_back(colors);
    }
    if (!generator.empty()) {
      cfg.generator = load_generator(generator);
      run.inputs.push_back(generator);
    }
    cfg.validate();
    const fs::path lbl(labels);
    const fs::path img_root = root_or_parent(root, lbl);
    const auto records = read_label_file(lbl);
    run.inputs.push_back(lbl);
    const ImageLoader load = [&](std::size_t i) { return read_image(img_root / records[i].raw_file); };
    std::vector<fs::path> written;
    const PoisonSink sink = [&](const PoisonedSample& s) {
      const fs::path p = img_root / s.record.raw_file;
      write_image(p, s.image);
      written.push_back(p);
    };
    PoisonedDataset d;
    if (replay.empty()) {
      d = build_poisoned_dataset(records, load, cfg, sink, run.jobs);
    } else {
      run.inputs.push_back(replay);
      d = replay_poisoned_dataset(records, load, cfg, read_manifest(replay), sink, run.jobs);
    }
    write_label_file(out_labels, d.records);
    const std::string mcsv = manifest_csv.empty() ? out_labels + ".manifest.csv" : manifest_csv;
    write_manifest(mcsv, d.manifest);
    run.outputs.push_back(out_labels);
    run.outputs.push_back(mcsv);
    run.outputs.insert(run.outputs.end(), written.begin(), written.end());
    std::cout << "poisoned=" << d.manifest.size() << " of " << records.size() << '\n';
    run.write_manifest(out_labels + ".run.json");
  }
};

struct TrainSurrogate {
  Run run;
  TrainConfig cfg;
  SurrogateShape shape;
  std::string labels, root, out, log, init, optimizer = "adam";
  bool no_cosine = false;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("train-surrogate", "Train the surrogate lane detector");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--labels", labels, "Training label file")->required()->check(CLI::ExistingFile);
    s->add_option("--root", root, "Image root (default: label file directory)");
    s->add_option("--epochs", cfg.epochs)->capture_default_str();
    s->add_option("--batch-size", cfg.batch_size)->capture_default_str();
    s->add_option("--lr", cfg.learning_rate)->capture_default_str();
    s->add_option("--optimizer", optimizer)->check(CLI::IsMember({"adam", "sgd"}))->capture_default_str();
    s->add_flag("--no-cosine", no_cosine, "Constant learning rate");
    s->add_option("--input", shape.input, "Model input side")->capture_default_str();
    s->add_option("--channels", shape.channels)->capture_default_str();
    s->add_option("--init", init, "Start from this checkpoint")->check(CLI::ExistingFile);
    s->add_option("--out", out, "Model checkpoint")->required();
    s->add_option("--log", log, "Per-epoch loss CSV");
  }

  void exec() {
    const std::uint64_t seed = run.require_seed();
    cfg.seed = derive_seed(seed, 2);
    cfg.jobs = run.jobs;
    cfg.optimizer = optimizer == "sgd" ? Optimizer::sgd : Optimizer::adam;
    cfg.cosine_decay = !no_cosine;
    cfg.validate();
    const fs::path lbl(labels);
    const auto set = load_set(lbl, root_or_parent(root, lbl), run.jobs, run);
    if (set.records.empty()) throw Error("empty training set");
    shape.rows = static_cast<int>(set.records.front().h_samples.size());
    SurrogateModel model;
    if (init.empty()) {
      model = init_surrogate(shape, derive_seed(seed, 1));
    } else {
      model = load_surrogate(init);
      run.inputs.push_back(init);
    }
    TrainLog tl;
    model = train(model, set.images, set.records, cfg, &tl, [](int epoch, double loss) {
      std::cerr << "epoch " << epoch << " loss " << loss << '\n';
    });
    save_surrogate(out, model);
    run.outputs.push_back(out);
    if (!log.empty()) {
      std::string csv = "epoch,loss\n";
      char buf[64];
      for (std::size_t e = 0; e < tl.epoch_loss.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, tl.epoch_loss[e]);
        csv += buf;
      }
      write_text(log, csv);
      run.outputs.push_back(log);
    }
    std::printf("initial_loss=%.6f final_loss=%.6f\n", tl.initial_loss, tl.final_loss);
    run.write_manifest(out + ".run.json");
  }
};

struct MetaTrain {
  Run run;
  MetaConfig cfg;
  std::string labels, root, teacher, colors, out, log, composite = "overwrite";
  std::size_t max_images = 0;
  int pretrain_steps = 500;
  int noise_dim = 16, hidden = 16;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("meta-train", "Train the conditional meta-trigger generator");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--labels", labels, "Benign label file")->required()->check(CLI::ExistingFile);
    s->add_option("--root", root, "Image root (default: label file directory)");
    s->add_option("--teacher", teacher, "Clean surrogate checkpoint")->required()
        ->check(CLI::ExistingFile);
    s->add_option("--colors", colors, "Color set file")->required()->check(CLI::ExistingFile);
    s->add_option("--max-images", max_images, "Use only the first N images (0: all)");
    s->add_option("--lambda", cfg.lambda)->capture_default_str();
    s->add_option("--omega", cfg.omega)->capture_default_str();
    s->add_option("--mu", cfg.mu)->capture_default_str();
    s->add_option("--gamma", cfg.gamma)->capture_default_str();
    s->add_option("--batch-tasks", cfg.batch_tasks)->capture_default_str();
    s->add_option("--epochs", cfg.epochs)->capture_default_str();
    s->add_option("--tasks-per-image", cfg.tasks_per_image)->capture_default_str();
    s->add_option("--env-prob", cfg.env_prob)->capture_default_str();
    s->add_option("--env-intensity", cfg.env_intensity)->capture_default_str();
    s->add_option("--k", cfg.trigger_k)->capture_default_str();
    s->add_option("--region-w", cfg.region_w)->capture_default_str();
    s->add_option("--region-h", cfg.region_h)->capture_default_str();
    s->add_flag("--fixed-noise", cfg.fixed_noise_per_task, "One noise draw per task");
    s->add_option("--composite", composite)->check(CLI::IsMember({"overwrite", "additive"}))
        ->capture_default_str();
    s->add_option("--pretrain-steps", pretrain_steps)->capture_default_str();
    s->add_option("--noise-dim", noise_dim)->capture_default_str();
    s->add_option("--hidden", hidden)->capture_default_str();
    s->add_option("--out", out, "Generator checkpoint")->required();
    s->add_option("--log", log, "Per-batch loss CSV (default: <out>.log.csv)");
  }

  void exec() {
    const std::uint64_t seed = run.require_seed();
    cfg.seed = derive_seed(seed, 3);
    cfg.jobs = run.jobs;
    cfg.composite = composite == "additive" ? CompositeMode::additive : CompositeMode::overwrite;
    cfg.validate();
    const SurrogateModel t = load_surrogate(teacher);
    run.inputs.push_back(teacher);
    const ColorSet cs = read_color_set(colors);
    run.inputs.push_back(colors);
    const fs::path lbl(labels);
    auto set = load_set(lbl, root_or_parent(root, lbl), run.jobs, run, max_images);
    const int side = t.shape.input;
    for (auto& img : set.images)
      if (img.width() != side || img.height() != side) img = resize_bilinear(img, side, side);

    GeneratorShape gs;
    gs.patch_w = cfg.region_w;
    gs.patch_h = cfg.region_h;
    gs.noise_dim = noise_dim;
    gs.hidden = hidden;
    gs.cond_input = side;
    const auto tasks = build_meta_tasks(set.images, cfg, cs);
    MetaGenerator gen = init_meta_generator(gs, derive_seed(seed, 4));
    gen = pretrain_meta_generator(gen, tasks, pretrain_steps, derive_seed(seed, 5));
    MetaTrainLog ml;
    gen = train_meta_generator(tasks, t, gen, cfg, &ml, [](const MetaLogRow& r) {
      std::cerr << "epoch " << r.epoch << " batch " << r.batch << " loss " << r.mean_task_loss
                << '\n';
    });
    save_generator(out, gen);
    const std::string log_path = log.empty() ? out + ".log.csv" : log;
    write_meta_log(log_path, ml);
    run.outputs.push_back(out);
    run.outputs.push_back(log_path);
    std::cout << "tasks=" << tasks.size() << " skipped=" << ml.skipped_tasks << '\n';
    run.write_manifest(out + ".run.json");
  }
};

struct Predict {
  Run run;
  std::string model, labels, root, out;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("predict", "Run the surrogate and write TuSimple predictions");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--model", model, "Surrogate checkpoint")->required()->check(CLI::ExistingFile);
    s->add_option("--labels", labels, "Label file naming the images and h_samples")->required()
        ->check(CLI::ExistingFile);
    s->add_option("--root", root, "Image root (default: label file directory)");
    s->add_option("--out", out, "Prediction file")->required();
  }

  void exec() {
    const SurrogateModel m = load_surrogate(model);
    run.inputs.push_back(model);
    const fs::path lbl(labels);
    const auto set = load_set(lbl, root_or_parent(root, lbl), run.jobs, run);
    std::vector<ImageRecord> preds(set.records.size());
    parallel_for(preds.size(), run.jobs,
                 [&](std::size_t i) { preds[i] = predict(m, set.images[i], set.records[i]); });
    write_label_file(out, preds);
    run.outputs.push_back(out);
    run.write_manifest(out + ".run.json");
  }
};

struct Evaluate {
  Run run;
  std::string gt, pred, mode = "acc", strategy = "loa", report, tag = "eval";
  double threshold = kDefaultThreshold;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("evaluate", "ACC or ASR of a prediction file");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--gt", gt, "Reference labels (clean for ACC, poisoned for ASR)")->required()
        ->check(CLI::ExistingFile);
    s->add_option("--pred", pred, "Prediction file")->required()->check(CLI::ExistingFile);
    s->add_option("--threshold", threshold, "Match distance in pixels (strict)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    s->add_option("--mode", mode)->check(CLI::IsMember({"acc", "asr"}))->capture_default_str();
    s->add_option("--strategy", strategy, "Strategy of the poisoned labels (ASR)")
        ->check(CLI::IsMember({"lda", "lsa", "lra", "loa"}))
        ->capture_default_str();
    s->add_option("--report", report, "Report CSV for this evaluation");
    s->add_option("--tag", tag, "Report row tag")->capture_default_str();
  }

  void exec() {
    const auto g = read_label_file(gt);
    const auto p = read_label_file(pred);
    run.inputs.push_back(gt);
    run.inputs.push_back(pred);
    MetricsReport r;
    if (mode == "acc") {
      r = compute_acc(g, p, threshold, run.jobs);
      std::printf("ACC=%.4f\n", r.acc);
    } else {
      r = compute_asr(g, p, threshold, parse_strategy(strategy), run.jobs);
      std::printf("ASR=%.4f\n", r.asr);
    }
    r.condition_tag = tag;
    if (!report.empty()) {
      const fs::path csv(report);
      const fs::path tsv = fs::path(report).replace_extension(".tsv");
      emit_report(std::span<const MetricsReport>(&r, 1), csv, tsv);
      run.outputs.push_back(csv);
      run.outputs.push_back(tsv);
      run.write_manifest(report + ".run.json");
    } else {
      run.write_manifest(pred + ".eval.run.json");
    }
  }
};

struct Suite {
  Run run;
  StrategyOptions strategy;
  std::string model, labels, root, trigger, colors, out;
  std::vector<std::string> variants;
  std::size_t k = 80;
  int region_w = 24, region_h = 24;
  double threshold = kDefaultThreshold;
  double intensity = 0.5;
  std::vector<double> scales{0.5, 2.0};

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("suite", "Dynamic-scene evaluation variants");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--model", model, "Victim checkpoint")->required()->check(CLI::ExistingFile);
    s->add_option("--labels", labels, "Clean test labels")->required()->check(CLI::ExistingFile);
    s->add_option("--root", root, "Image root (default: label file directory)");
    s->add_option("--colors", colors, "Color set file")->required()->check(CLI::ExistingFile);
    s->add_option("--trigger", trigger, "Trigger JSON (default: assembled from the color set)")
        ->check(CLI::ExistingFile);
    s->add_option("--k", k, "Pixel count when assembling")->capture_default_str();
    s->add_option("--region-w", region_w)->capture_default_str();
    s->add_option("--region-h", region_h)->capture_default_str();
    s->add_option("--variant", variants, "Variant tag (repeatable; default: all nine)")
        ->check(CLI::IsMember({"origin", "position", "shape", "viewpoint", "size", "sunlight",
                               "shadow", "rain", "snow"}));
    s->add_option("--scale", scales, "Size-variant scales")->capture_default_str();
    s->add_option("--intensity", intensity, "Weather intensity")->capture_default_str();
    s->add_option("--threshold", threshold)->capture_default_str()->check(CLI::PositiveNumber);
    strategy.add(s);
    s->add_option("--out", out, "Output directory")->required();
  }

  void exec() {
    const std::uint64_t seed = run.require_seed();
    SuiteConfig sc;
    sc.strategy = strategy.resolve();
    sc.threshold = threshold;
    sc.seed = derive_seed(seed, 6);
    sc.jobs = run.jobs;
    const SurrogateModel m = load_surrogate(model);
    run.inputs.push_back(model);
    TriggerSource src;
    src.colors = read_color_set(colors);
    run.inputs.push_back(colors);
    if (trigger.empty()) {
      src.trigger = assemble_trigger(full_mask(region_w, region_h), src.colors, k,
                                     derive_seed(seed, 7));
    } else {
      src.trigger = trigger_from_json(read_text(trigger));
      run.inputs.push_back(trigger);
    }
    std::vector<VariantSpec> specs;
    const std::vector<std::string> tags =
        variants.empty() ? std::vector<std::string>{"origin", "position", "shape", "viewpoint",
                                                    "size", "sunlight", "shadow", "rain", "snow"}
                         : variants;
    for (const auto& t : tags) {
      VariantSpec v{.tag = parse_variant(t), .intensity = intensity};
      if (v.tag == VariantTag::size) {
        for (double s : scales) {
          v.scale = s;
          specs.push_back(v);
        }
      } else {
        specs.push_back(v);
      }
    }
    const fs::path lbl(labels);
    const auto set = load_set(lbl, root_or_parent(root, lbl), run.jobs, run);
    const SuiteResult res = run_suite(m, set.records, set.images, src, specs, sc);

    const fs::path dir(out);
    fs::create_directories(dir / "predictions");
    write_label_file(dir / "predictions" / "clean.json", res.clean_predictions);
    run.outputs.push_back(dir / "predictions" / "clean.json");
    for (const auto& v : res.variants) {
      const fs::path p = dir / "predictions" / (v.spec.label() + ".json");
      write_label_file(p, v.predictions);
      run.outputs.push_back(p);
    }
    write_text(dir / "suite.csv", format_report_csv(res.rows));
    write_text(dir / "suite_plot.tsv", format_plot_tsv(res.rows));
    std::vector<ReportRow> detail;
    for (const auto& v : res.variants) detail.push_back({v.spec.label(), v.report.acc, v.report.asr});
    std::stable_sort(detail.begin(), detail.end(),
                     [](const ReportRow& a, const ReportRow& b) { return a.tag < b.tag; });
    write_text(dir / "variants.csv", format_report_csv(detail));
    for (const char* f : {"suite.csv", "suite_plot.tsv", "variants.csv"})
      run.outputs.push_back(dir / f);
    std::printf("clean ACC=%.4f\n", res.clean.acc);
    for (const auto& r : res.rows) std::printf("%s ASR=%.4f\n", r.tag.c_str(), r.asr);
    run.write_manifest(dir / "suite.run.json");
  }
};

struct Report {
  Run run;
  std::vector<std::string> inputs;
  std::string out, plot;

  void add(CLI::App& app) {
    run.sub = app.add_subcommand("report", "Merge report CSVs into one table");
    auto* s = run.sub;
    add_common(s, run);
    s->add_option("--in", inputs, "Report CSV (repeatable)")->required()->check(CLI::ExistingFile);
    s->add_option("--out", out, "Merged CSV")->required();
    s->add_option("--plot", plot, "Plot-data TSV (default: <out> with .tsv)");
  }

  void exec() {
    std::vector<ReportRow> rows;
    for (const auto& p : inputs) {
      const auto part = parse_report_csv(read_text(p));
      rows.insert(rows.end(), part.begin(), part.end());
      run.inputs.push_back(p);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ReportRow& a, const ReportRow& b) { return a.tag < b.tag; });
    const std::string tsv = plot.empty() ? fs::path(out).replace_extension(".tsv").string() : plot;
    write_text(out, format_report_csv(rows));
    write_text(tsv, format_plot_tsv(rows));
    run.outputs.push_back(out);
    run.outputs.push_back(tsv);
    run.write_manifest(out + ".run.json");
  }
};

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"BadLane: backdoor poisoning and evaluation toolkit for lane detection", "badlane"};
  app.set_config("--config", "", "key=value config file; [sub-command] sections, flags win");
  app.require_subcommand(1);

  ExtractColors extract_colors;
  GenTrigger gen_trigger;
  GenSynth gen_synth;
  Poison poison;
  TrainSurrogate train_surrogate;
  MetaTrain meta_train;
  Predict predict_cmd;
  Evaluate evaluate;
  Suite suite;
  Report report;
  extract_colors.add(app);
  gen_trigger.add(app);
  gen_synth.add(app);
  poison.add(app);
  train_surrogate.add(app);
  meta_train.add(app);
  predict_cmd.add(app);
  evaluate.add(app);
  suite.add(app);
  report.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (extract_colors.run.sub->parsed()) extract_colors.exec();
    else if (gen_trigger.run.sub->parsed()) gen_trigger.exec();
    else if (gen_synth.run.sub->parsed()) gen_synth.exec();
    else if (poison.run.sub->parsed()) poison.exec();
    else if (train_surrogate.run.sub->parsed()) train_surrogate.exec();
    else if (meta_train.run.sub->parsed()) meta_train.exec();
    else if (predict_cmd.run.sub->parsed()) predict_cmd.exec();
    else if (evaluate.run.sub->parsed()) evaluate.exec();
    else if (suite.run.sub->parsed()) suite.exec();
    else if (report.run.sub->parsed()) report.exec();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace badlane::cli
