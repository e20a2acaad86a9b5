#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "pidcnn/checkpoint.hpp"
#include "pidcnn/dataset.hpp"
#include "pidcnn/network.hpp"

namespace pidcnn {

struct TrainConfig {
  std::size_t stage = 1;  // frame count of the stage
  std::size_t epochs = 120;
  std::size_t batch_size = 32;
  std::optional<double> initial_lr;  // default: 1e-3 for stage 1, 1e-6 after
  bool reset_schedule = false;       // x1e4 back to the initial rate every 40 epochs instead of x1e3
  std::uint64_t seed = 1;
  NetworkConfig network;             // frames is overridden by the stage
  std::filesystem::path checkpoint_out;  // written after every epoch when set
  std::filesystem::path metrics_out;     // CSV rewritten after every epoch when set

  double initial_rate() const;
  NetworkConfig stage_network() const;
  void validate() const;
};

/// initial * 0.1^floor(epoch/10) * 1000^floor(epoch/40).
double lr_at(std::size_t epoch, const TrainConfig& config);

struct IterationRecord {
  std::uint64_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct ValidationRecord {
  std::size_t epoch = 0;           // epochs completed when measured
  double loss = 0.0;               // MSE on normalised targets
  double coordinate_loss = 0.0;    // same, coordinate components only
  double coordinate_std = 0.0;     // pooled coordinate error std, world units
};

struct MetricsLog {
  std::vector<IterationRecord> iterations;
  std::vector<ValidationRecord> validations;  // first entry is before any update
  std::vector<std::size_t> epoch_samples;     // first frames visited per epoch
};

/// Columns step,epoch,lr,train_loss,val_loss,val_std. The validation columns
/// are filled on the last step of each epoch and empty otherwise.
void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log);

/// Network input and normalised targets for one batch.
struct Batch {
  Tensor input;             // [B, 2, T, S, S], pixels / 255
  Tensor targets;           // [B, target_length(T)], normalised
  std::vector<std::vector<double>> truths;  // world units, per sample
};

/// Samples start at the given records; later frames come from `rng`.
Batch make_batch(const Dataset& data, std::span<const std::size_t> first_frames, Rng& rng, std::size_t frames);

/// Indices [b*size, min(n, (b+1)*size)) for every batch b of an epoch.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size);

/// Predictions (denormalised, world units) and ground truth for every record of
/// `data` as a first frame, later frames drawn from Rng(seed). Eval mode.
struct PredictionSet {
  std::vector<std::vector<double>> truths;
  std::vector<std::vector<double>> predictions;
  double total_ms = 0.0;  // forward passes only
};
PredictionSet collect_predictions(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed,
                                  HeadKind kind = HeadKind::residual, std::size_t batch_size = 32);

ValidationRecord validate_model(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed);

struct TrainResult {
  ModelWeights<float> weights;
  MetricsLog log;
  std::uint64_t global_step = 0;
};

/// Where a stage begins: fresh or transferred weights at epoch 0, or a resumed checkpoint.
struct StageStart {
  ModelWeights<float> weights;
  std::size_t epoch = 0;
  std::uint64_t global_step = 0;
};

/// Stage 1 without `init`: fresh weights from the seed. Otherwise `init` is
/// transferred to the stage's frame count.
StageStart stage_start(const TrainConfig& config, const std::optional<ModelWeights<float>>& init);

/// Continues from a checkpoint written by train_stage with the same config.
StageStart resume_start(const TrainConfig& config, const std::filesystem::path& checkpoint);

using EpochCallback = std::function<void(const ValidationRecord&, const MetricsLog&)>;

/// Runs epochs [start.epoch, config.epochs). A non-finite loss writes
/// "<checkpoint_out>.nan" (when an output path is set) and throws NumericError.
TrainResult train_stage(const TrainConfig& config, const Dataset& train, const Dataset* val, StageStart start,
                        const EpochCallback& on_epoch = {});

struct CurriculumResult {
  ModelWeights<float> weights;
  std::vector<MetricsLog> logs;
  std::vector<std::filesystem::path> checkpoints;
};

/// Stage 1, transfer, stage 2, transfer, stage 3. Checkpoints go to
/// `out_dir/stage{k}.pidw` and metrics to `out_dir/stage{k}.csv`.
CurriculumResult run_curriculum(const std::vector<TrainConfig>& stages, const Dataset& train, const Dataset* val,
                                const std::filesystem::path& out_dir, const EpochCallback& on_epoch = {});

}  // namespace pidcnn
