#include "pidcnn/training.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pidcnn/csv.hpp"
#include "pidcnn/errors.hpp"
#include "pidcnn/optim.hpp"

namespace pidcnn {
namespace {

constexpr std::uint64_t kValidationStream = 0x76616c6964ULL;

void check_dataset(const Dataset& data, const NetworkConfig& net, const char* which) {
  if (data.empty()) throw std::invalid_argument(std::string(which) + " dataset is empty");
  if (data.height != net.image_size || data.width != net.image_size || data.views != net.input_channels) {
    throw std::invalid_argument(std::string(which) + " dataset holds " + std::to_string(data.views) + " views of " +
                                std::to_string(data.height) + "x" + std::to_string(data.width) +
                                " but the network expects " + std::to_string(net.input_channels) + " of " +
                                std::to_string(net.image_size) + "x" + std::to_string(net.image_size));
  }
}

ModelWeights<float> fresh_optimizer(ModelWeights<float> w) {
  for (auto& p : w.params) {
    p.first_moment.fill(0.0f);
    p.second_moment.fill(0.0f);
    p.step = 0;
    p.grad.reset();
  }
  return w;
}

}  // namespace

double TrainConfig::initial_rate() const {
  if (initial_lr) return *initial_lr;
  return stage == 1 ? 1e-3 : 1e-6;
}

NetworkConfig TrainConfig::stage_network() const {
  NetworkConfig n = network;
  n.frames = stage;
  return n;
}

void TrainConfig::validate() const {
  if (stage < 1 || stage > 3) throw std::invalid_argument("train: stage must be 1, 2 or 3");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be at least 1");
  if (!(initial_rate() > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
  stage_network().validate();
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  const double decays = static_cast<double>(epoch / 10);
  const double cycles = static_cast<double>(epoch / 40);
  if (config.reset_schedule) return config.initial_rate() * std::pow(0.1, static_cast<double>((epoch % 40) / 10));
  return config.initial_rate() * std::pow(0.1, decays) * std::pow(1000.0, cycles);
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log) {
  CsvTable t;
  t.header = {"step", "epoch", "lr", "train_loss", "val_loss", "val_std"};
  std::size_t v = 1;  // validations[0] precedes training
  for (std::size_t i = 0; i < log.iterations.size(); ++i) {
    const auto& it = log.iterations[i];
    std::vector<std::string> row{std::to_string(it.step), std::to_string(it.epoch), format_number(it.lr),
                                 format_number(it.loss), "", ""};
    const bool last_of_epoch = i + 1 == log.iterations.size() || log.iterations[i + 1].epoch != it.epoch;
    if (last_of_epoch) {
      while (v < log.validations.size() && log.validations[v].epoch < it.epoch + 1) ++v;
      if (v < log.validations.size() && log.validations[v].epoch == it.epoch + 1) {
        row[4] = format_number(log.validations[v].loss);
        row[5] = format_number(log.validations[v].coordinate_std);
      }
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> first_frames, Rng& rng, std::size_t frames) {
  const std::size_t n = first_frames.size();
  if (n == 0) throw std::invalid_argument("make_batch: empty batch");
  const std::size_t views = data.views, h = data.height, w = data.width, plane = h * w;
  const std::size_t dim = target_length(frames);
  Batch b{Tensor({n, views, frames, h, w}), Tensor({n, dim}), {}};
  auto in = b.input.data();
  for (std::size_t i = 0; i < n; ++i) {
    const MotionSample s = assemble_sample(data, first_frames[i], rng, frames);
    for (std::size_t v = 0; v < views; ++v)
      for (std::size_t t = 0; t < frames; ++t) {
        const auto img = data.image(s.records[t], v);
        float* dst = in.data() + ((i * views + v) * frames + t) * plane;
        for (std::size_t k = 0; k < plane; ++k) dst[k] = static_cast<float>(img[k]) / 255.0f;
      }
    for (std::size_t k = 0; k < dim; ++k) b.targets[i * dim + k] = static_cast<float>(TargetNormalizer::normalize(s.targets[k]));
    b.truths.push_back(s.targets);
  }
  return b;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("epoch_batches: batch size must be positive");
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(n, start + batch_size); ++i) idx.push_back(i);
    out.push_back(std::move(idx));
  }
  return out;
}

PredictionSet collect_predictions(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed, HeadKind kind,
                                  std::size_t batch_size) {
  check_dataset(data, weights.config, "evaluation");
  const std::size_t frames = weights.config.frames, dim = target_length(frames);
  PredictionSet out;
  Rng rng(seed);
  for (const auto& idx : epoch_batches(data.size(), batch_size)) {
    Batch b = make_batch(data, idx, rng, frames);
    const auto t0 = std::chrono::steady_clock::now();
    const Tensor y = predict(b.input, weights, kind);
    out.total_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::vector<double> p(dim);
      for (std::size_t k = 0; k < dim; ++k) p[k] = TargetNormalizer::denormalize(static_cast<double>(y[i * dim + k]));
      out.predictions.push_back(std::move(p));
      out.truths.push_back(std::move(b.truths[i]));
    }
  }
  return out;
}

ValidationRecord validate_model(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed) {
  const auto set = collect_predictions(weights, data, seed);
  const std::size_t coords = 3 * weights.config.frames;
  double sq = 0.0, coord_sq = 0.0, coord_sum = 0.0;
  std::size_t count = 0, coord_count = 0;
  for (std::size_t i = 0; i < set.truths.size(); ++i)
    for (std::size_t k = 0; k < set.truths[i].size(); ++k) {
      const double e = set.predictions[i][k] - set.truths[i][k];
      const double en = e / TargetNormalizer::kSigma;
      sq += en * en;
      ++count;
      if (k < coords) {
        coord_sq += en * en;
        coord_sum += e;
        ++coord_count;
      }
    }
  ValidationRecord r;
  r.loss = sq / static_cast<double>(count);
  r.coordinate_loss = coord_sq / static_cast<double>(coord_count);
  const double mean = coord_sum / static_cast<double>(coord_count);
  double dev = 0.0;
  for (std::size_t i = 0; i < set.truths.size(); ++i)
    for (std::size_t k = 0; k < coords; ++k) {
      const double d = set.predictions[i][k] - set.truths[i][k] - mean;
      dev += d * d;
    }
  r.coordinate_std = std::sqrt(dev / static_cast<double>(coord_count));
  return r;
}

StageStart stage_start(const TrainConfig& config, const std::optional<ModelWeights<float>>& init) {
  config.validate();
  const NetworkConfig net = config.stage_network();
  if (!init) {
    if (config.stage != 1) {
      throw std::invalid_argument("stage " + std::to_string(config.stage) + " needs weights from the previous stage");
    }
    return {init_weights<float>(net, config.seed), 0, 0};
  }
  if (init->config.architecture() != net.architecture()) {
    throw std::invalid_argument("initial weights have architecture " + init->config.architecture() +
                                ", training expects " + net.architecture());
  }
  if (init->config.frames > config.stage) {
    throw std::invalid_argument("initial weights are for " + std::to_string(init->config.frames) +
                                " frames, stage " + std::to_string(config.stage) + " uses fewer");
  }
  return {fresh_optimizer(init->config.frames == config.stage ? *init : transfer_weights(*init, config.stage)), 0, 0};
}

StageStart resume_start(const TrainConfig& config, const std::filesystem::path& checkpoint) {
  config.validate();
  Checkpoint ckpt = load_checkpoint(checkpoint);
  if (ckpt.weights.config != config.stage_network()) {
    throw std::invalid_argument("checkpoint " + checkpoint.string() + " is for " + ckpt.weights.config.fingerprint() +
                                ", training expects " + config.stage_network().fingerprint());
  }
  return {std::move(ckpt.weights), static_cast<std::size_t>(ckpt.epoch), ckpt.global_step};
}

TrainResult train_stage(const TrainConfig& config, const Dataset& train, const Dataset* val, StageStart start,
                        const EpochCallback& on_epoch) {
  config.validate();
  const NetworkConfig net = config.stage_network();
  if (start.weights.config != net) {
    throw std::invalid_argument("train_stage: weights are for " + start.weights.config.fingerprint() + ", stage needs " +
                                net.fingerprint());
  }
  check_dataset(train, net, "training");
  if (val) check_dataset(*val, net, "validation");

  TrainResult r{std::move(start.weights), {}, start.global_step};
  auto& w = r.weights;
  const std::uint64_t val_seed = Rng::derive(config.seed, kValidationStream);
  if (val) {
    auto v = validate_model(w, *val, val_seed);
    v.epoch = start.epoch;
    r.log.validations.push_back(v);
  }

  for (std::size_t epoch = start.epoch; epoch < config.epochs; ++epoch) {
    Rng rng(Rng::derive(config.seed, epoch));
    AdamConfig adam;
    adam.learning_rate = lr_at(epoch, config);
    std::size_t visited = 0;
    for (const auto& idx : epoch_batches(train.size(), config.batch_size)) {
      const Batch b = make_batch(train, idx, rng, net.frames);
      Tape<float> tape;
      auto y = network_forward(tape, b.input, w, Mode::train);
      auto loss = mse_loss(y, b.targets);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        std::string where;
        if (!config.checkpoint_out.empty()) {
          auto diag = config.checkpoint_out;
          diag += ".nan";
          save_checkpoint(diag, {w, epoch, r.global_step});
          where = "; diagnostic checkpoint " + diag.string();
        }
        throw NumericError("non-finite training loss at step " + std::to_string(r.global_step + 1) + " (epoch " +
                           std::to_string(epoch) + ")" + where);
      }
      tape.backward(loss);
      adam_step(w.params, adam);
      ++r.global_step;
      visited += idx.size();
      r.log.iterations.push_back({r.global_step, epoch, adam.learning_rate, value});
    }
    r.log.epoch_samples.push_back(visited);

    ValidationRecord v;
    v.epoch = epoch + 1;
    if (val) {
      v = validate_model(w, *val, val_seed);
      v.epoch = epoch + 1;
      r.log.validations.push_back(v);
    }
    if (!config.checkpoint_out.empty()) save_checkpoint(config.checkpoint_out, {w, epoch + 1, r.global_step});
    if (!config.metrics_out.empty()) write_metrics_csv(config.metrics_out, r.log);
    if (on_epoch) on_epoch(v, r.log);
  }
  if (start.epoch >= config.epochs && !config.checkpoint_out.empty()) {
    save_checkpoint(config.checkpoint_out, {w, start.epoch, r.global_step});
  }
  return r;
}

CurriculumResult run_curriculum(const std::vector<TrainConfig>& stages, const Dataset& train, const Dataset* val,
                                const std::filesystem::path& out_dir, const EpochCallback& on_epoch) {
  if (stages.empty() || stages.size() > 3) throw std::invalid_argument("curriculum: need one to three stages");
  std::filesystem::create_directories(out_dir);
  CurriculumResult out;
  std::optional<ModelWeights<float>> prev;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    TrainConfig cfg = stages[k];
    cfg.stage = k + 1;
    if (prev && cfg.network.architecture() != prev->config.architecture()) {
      throw std::invalid_argument("curriculum: stage " + std::to_string(k + 1) + " changes the architecture");
    }
    const auto ckpt = out_dir / ("stage" + std::to_string(k + 1) + ".pidw");
    cfg.checkpoint_out = ckpt;
    cfg.metrics_out = out_dir / ("stage" + std::to_string(k + 1) + ".csv");
    if (cfg.epochs == 0) {
      // No training for this stage: pass the transferred weights through.
      TrainConfig probe = cfg;
      probe.epochs = 1;
      StageStart s = stage_start(probe, prev);
      save_checkpoint(ckpt, {s.weights, 0, 0});
      out.logs.emplace_back();
      prev = std::move(s.weights);
    } else {
      TrainResult r = train_stage(cfg, train, val, stage_start(cfg, prev), on_epoch);
      out.logs.push_back(std::move(r.log));
      prev = std::move(r.weights);
    }
    out.checkpoints.push_back(ckpt);
  }
  out.weights = std::move(*prev);
  return out;
}

}  // namespace pidcnn
