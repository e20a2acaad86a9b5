#include "pidcnn/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pidcnn/csv.hpp"
#include "pidcnn/errors.hpp"

namespace pidcnn {
namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

ReportRow summarise(const std::string& quantity, const std::string& axis, const std::vector<double>& errors) {
  ReportRow r{quantity, axis, 0.0, 0.0, 0.0, errors.size()};
  if (errors.empty()) return r;
  CompensatedSum s;
  for (double e : errors) s.add(e);
  r.mean = s.value() / static_cast<double>(errors.size());
  CompensatedSum dev;
  for (double e : errors) {
    dev.add((e - r.mean) * (e - r.mean));
    r.max = std::max(r.max, std::abs(e));
  }
  r.std = std::sqrt(dev.value() / static_cast<double>(errors.size()));
  return r;
}

std::vector<std::string> report_fields(const ReportRow& r) {
  return {r.quantity, r.axis, format_number(r.std), format_number(r.max), format_number(r.mean), std::to_string(r.n)};
}

void require_rows(const CsvTable& t, const std::vector<std::string>& header, const std::filesystem::path& path) {
  if (t.header != header) throw IoError("unexpected csv header in " + path.string());
}

}  // namespace

const ReportRow& EvalReport::at(const std::string& quantity, const std::string& axis) const {
  for (const auto& r : rows)
    if (r.quantity == quantity && r.axis == axis) return r;
  throw std::out_of_range("report has no row " + quantity + "/" + axis);
}

EvalReport evaluate_predictions(const std::vector<std::vector<double>>& truths,
                                const std::vector<std::vector<double>>& predictions, std::size_t frames) {
  const std::size_t dim = target_length(frames);
  if (truths.size() != predictions.size()) throw std::invalid_argument("evaluate: truth and prediction counts differ");
  struct Span {
    const char* name;
    std::size_t offset, slots;
  };
  std::vector<Span> spans{{"coordinate", 0, frames}};
  if (frames >= 2) spans.push_back({"velocity", 3 * frames, frames - 1});
  if (frames == 3) spans.push_back({"acceleration", 15, 1});

  EvalReport report;
  const char* axes[3] = {"x", "y", "z"};
  for (const auto& sp : spans) {
    std::vector<double> pooled;
    std::vector<double> per_axis[3];
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (truths[i].size() != dim || predictions[i].size() != dim) {
        throw std::invalid_argument("evaluate: sample " + std::to_string(i) + " has the wrong length for " +
                                    std::to_string(frames) + " frames");
      }
      for (std::size_t s = 0; s < sp.slots; ++s)
        for (std::size_t a = 0; a < 3; ++a) {
          const std::size_t k = sp.offset + 3 * s + a;
          const double e = predictions[i][k] - truths[i][k];
          per_axis[a].push_back(e);
          pooled.push_back(e);
        }
    }
    for (std::size_t a = 0; a < 3; ++a) report.rows.push_back(summarise(sp.name, axes[a], per_axis[a]));
    report.rows.push_back(summarise(sp.name, "all", pooled));
  }
  return report;
}

EvalReport evaluate(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed, HeadKind kind) {
  const auto set = collect_predictions(weights, data, seed, kind);
  for (const auto& p : set.predictions)
    for (double v : p)
      if (!std::isfinite(v)) throw NumericError("evaluate: model produced a non-finite prediction");
  EvalReport r = evaluate_predictions(set.truths, set.predictions, weights.config.frames);
  r.ms_per_measurement = set.total_ms / static_cast<double>(set.truths.size());
  return r;
}

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
  CsvTable t;
  t.header = {"quantity", "axis", "std", "max", "mean", "n"};
  for (const auto& r : report.rows) t.rows.push_back(report_fields(r));
  write_csv(path, t);
}

EvalReport read_report_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_rows(t, {"quantity", "axis", "std", "max", "mean", "n"}, path);
  EvalReport r;
  try {
    for (const auto& row : t.rows) {
      r.rows.push_back({row[0], row[1], parse_number(row[2]), parse_number(row[3]), parse_number(row[4]),
                        static_cast<std::size_t>(std::stoull(row[5]))});
    }
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string(e.what()) + " in " + path.string());
  }
  return r;
}

double delta_percent(double plain_std, double residual_std) {
  return plain_std > 0.0 ? (plain_std - residual_std) / plain_std * 100.0 : 0.0;
}

AblationResult ablate_residual(ModelWeights<float>& weights, const Dataset& data, std::uint64_t seed) {
  if (weights.config.frames != 3) throw std::invalid_argument("ablate_residual: needs three-frame weights");
  AblationResult a;
  a.residual = evaluate(weights, data, seed, HeadKind::residual);
  a.plain = evaluate(weights, data, seed, HeadKind::difference_only);
  auto delta = [&](const char* q) { return delta_percent(a.plain.at(q, "all").std, a.residual.at(q, "all").std); };
  a.velocity_delta_percent = delta("velocity");
  a.acceleration_delta_percent = delta("acceleration");
  return a;
}

void write_ablation_csv(const std::filesystem::path& path, const AblationResult& result) {
  CsvTable t;
  t.header = {"head", "quantity", "axis", "std", "max", "mean", "n"};
  for (const auto* rep : {&result.residual, &result.plain}) {
    const std::string head = rep == &result.residual ? "residual" : "plain";
    for (const auto& r : rep->rows) {
      auto f = report_fields(r);
      f.insert(f.begin(), head);
      t.rows.push_back(std::move(f));
    }
  }
  t.rows.push_back({"delta_percent", "velocity", "all", format_number(result.velocity_delta_percent), "0", "0", "0"});
  t.rows.push_back(
      {"delta_percent", "acceleration", "all", format_number(result.acceleration_delta_percent), "0", "0", "0"});
  write_csv(path, t);
}

std::uint64_t parameter_hash(const ModelWeights<float>& weights, const std::vector<std::string>& names) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& name : names) {
    const auto& v = weights.params.at(name).value;
    mix(name.data(), name.size());
    mix(v.data().data(), v.size() * sizeof(float));
  }
  return h;
}

std::vector<ComparisonArm> compare_arms(const std::vector<std::pair<std::string, NetworkConfig>>& arms,
                                        const Dataset& train, std::size_t epochs, std::uint64_t seed,
                                        std::size_t batch_size) {
  if (arms.empty()) throw std::invalid_argument("compare: no arms");
  std::vector<ModelWeights<float>> inits;
  for (const auto& [label, net] : arms) {
    NetworkConfig n = net;
    n.frames = 1;
    inits.push_back(init_weights<float>(n, seed));
  }
  for (std::size_t i = 1; i < inits.size(); ++i) copy_shared(inits[0], inits[i]);

  std::vector<std::string> shared;
  for (const auto& name : inits[0].params.names()) {
    bool everywhere = true;
    for (const auto& w : inits) everywhere = everywhere && w.params.contains(name);
    if (everywhere) shared.push_back(name);
  }

  std::vector<ComparisonArm> out;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    TrainConfig cfg;
    cfg.stage = 1;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.seed = seed;
    cfg.network = inits[i].config;
    ComparisonArm arm{arms[i].first, inits[i].config, {}, parameter_hash(inits[i], shared)};
    arm.log = train_stage(cfg, train, nullptr, StageStart{inits[i], 0, 0}).log;
    out.push_back(std::move(arm));
  }
  return out;
}

std::vector<ComparisonArm> compare_pooling(const NetworkConfig& base, const Dataset& train, std::size_t epochs,
                                           std::uint64_t seed, std::size_t batch_size) {
  NetworkConfig avg = base, max = base;
  avg.pooling = Pooling::average;
  max.pooling = Pooling::max;
  return compare_arms({{"avg", avg}, {"max", max}}, train, epochs, seed, batch_size);
}

std::vector<ComparisonArm> compare_nonlinearity(const NetworkConfig& base, const Dataset& train, std::size_t epochs,
                                                std::uint64_t seed, std::size_t batch_size) {
  NetworkConfig p = base, r = base;
  p.activation = Activation::prelu;
  r.activation = Activation::relu;
  return compare_arms({{"prelu", p}, {"relu", r}}, train, epochs, seed, batch_size);
}

void write_curve_csv(const std::filesystem::path& path, const MetricsLog& log) {
  CsvTable t;
  t.header = {"step", "epoch", "lr", "loss"};
  for (const auto& it : log.iterations) {
    t.rows.push_back({std::to_string(it.step), std::to_string(it.epoch), format_number(it.lr), format_number(it.loss)});
  }
  write_csv(path, t);
}

std::vector<IterationRecord> read_curve_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_rows(t, {"step", "epoch", "lr", "loss"}, path);
  std::vector<IterationRecord> out;
  try {
    for (const auto& row : t.rows) {
      out.push_back({std::stoull(row[0]), static_cast<std::size_t>(std::stoull(row[1])), parse_number(row[2]),
                     parse_number(row[3])});
    }
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string(e.what()) + " in " + path.string());
  }
  return out;
}

BenchResult benchmark_inference(ModelWeights<float>& weights, const std::vector<Tensor>& inputs, std::size_t n,
                                std::size_t warmup) {
  if (n == 0) throw std::invalid_argument("benchmark: n must be positive");
  if (inputs.empty()) throw std::invalid_argument("benchmark: no inputs");
  for (std::size_t i = 0; i < warmup; ++i) predict(inputs[i % inputs.size()], weights);
  BenchResult r;
  r.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    predict(inputs[i % inputs.size()], weights);
    r.samples_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  CompensatedSum s;
  for (double v : r.samples_ms) s.add(v);
  r.mean_ms = s.value() / static_cast<double>(n);
  std::vector<double> sorted = r.samples_ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  r.p95_ms = sorted[std::max<std::size_t>(rank, 1) - 1];
  r.throughput = 1000.0 / r.mean_ms;
  return r;
}

void write_bench_csv(const std::filesystem::path& path, const BenchResult& result) {
  CsvTable t;
  t.header = {"n", "mean_ms", "p95_ms", "throughput_per_s"};
  t.rows.push_back({std::to_string(result.n), format_number(result.mean_ms), format_number(result.p95_ms),
                    format_number(result.throughput)});
  write_csv(path, t);
}

}  // namespace pidcnn
