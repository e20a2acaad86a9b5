#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pidcnn/training.hpp"

namespace pidcnn {

/// One line of the report. Axis "x", "y", "z" or "all" (pooled over the three).
struct ReportRow {
  std::string quantity;  // coordinate, velocity, acceleration
  std::string axis;
  double std = 0.0;   // population std of signed errors, world units
  double max = 0.0;   // largest absolute error
  double mean = 0.0;  // mean signed error (bias)
  std::size_t n = 0;  // error samples in the row

  bool operator==(const ReportRow&) const = default;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  double ms_per_measurement = 0.0;  // 0 when not timed; not part of the CSV

  const ReportRow& at(const std::string& quantity, const std::string& axis) const;
  bool operator==(const EvalReport& o) const { return rows == o.rows; }
};

/// Errors = prediction - truth on vectors laid out as ground_truth(). Every slot of
/// a quantity (q1..qT, v1..v(T-1)) pools into that quantity's rows.
EvalReport evaluate_predictions(const std::vector<std::vector<double>>& truths,
                                const std::vector<std::vector<double>>& predictions, std::size_t frames);

/// Runs the model over every record of `data` as a first frame (later frames
/// from Rng(seed)), denormalises, and reports.
EvalReport evaluate(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed,
                    HeadKind kind = HeadKind::residual);

/// Columns quantity,axis,std,max,mean,n.
void write_report_csv(const std::filesystem::path& path, const EvalReport& report);
EvalReport read_report_csv(const std::filesystem::path& path);

struct AblationResult {
  EvalReport residual;
  EvalReport plain;
  double velocity_delta_percent = 0.0;      // (plain - residual) / plain * 100, pooled std
  double acceleration_delta_percent = 0.0;
};

/// (plain - residual) / plain * 100; 0 when plain is 0.
double delta_percent(double plain_std, double residual_std);

/// Both heads on identical samples. Needs three-frame weights.
AblationResult ablate_residual(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed);

/// Columns head,quantity,axis,std,max,mean,n followed by delta rows with head "delta_percent".
void write_ablation_csv(const std::filesystem::path& path, const AblationResult& result);

struct ComparisonArm {
  std::string label;
  NetworkConfig network;
  MetricsLog log;
  std::uint64_t initial_hash = 0;  // over the parameters shared by every arm
};

/// Stage-1 training of each arm from identical initial weights (shared names)
/// and identical batch streams.
std::vector<ComparisonArm> compare_arms(const std::vector<std::pair<std::string, NetworkConfig>>& arms,
                                        const Dataset& train, std::size_t epochs, std::uint64_t seed,
                                        std::size_t batch_size = 32);

std::vector<ComparisonArm> compare_pooling(const NetworkConfig& base, const Dataset& train, std::size_t epochs,
                                           std::uint64_t seed, std::size_t batch_size = 32);
std::vector<ComparisonArm> compare_nonlinearity(const NetworkConfig& base, const Dataset& train, std::size_t epochs,
                                                std::uint64_t seed, std::size_t batch_size = 32);

/// Columns step,epoch,lr,loss.
void write_curve_csv(const std::filesystem::path& path, const MetricsLog& log);
std::vector<IterationRecord> read_curve_csv(const std::filesystem::path& path);

/// FNV-1a over the named parameters, in the order given.
std::uint64_t parameter_hash(const ModelWeights<float>& weights, const std::vector<std::string>& names);

struct BenchResult {
  std::size_t n = 0;
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double throughput = 0.0;  // measurements per second, 1000 / mean_ms
  std::vector<double> samples_ms;
};

/// Times n batch-1 forward passes over pre-built inputs (cycled), after `warmup` untimed passes.
BenchResult benchmark_inference(ModelWeights<float>& weights, const std::vector<Tensor>& inputs, std::size_t n,
                                std::size_t warmup = 3);

/// Columns n,mean_ms,p95_ms,throughput_per_s.
void write_bench_csv(const std::filesystem::path& path, const BenchResult& result);

}  // namespace pidcnn
