#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pidcnn/errors.hpp"
#include "pidcnn/eval.hpp"
#include "pidcnn/pid.hpp"

using namespace pidcnn;
namespace fs = std::filesystem;

namespace {

struct GenArgs {
  std::size_t count = 1024;
  std::uint64_t seed = 1;
  std::size_t size = 256;
  double half_extent = scene::kDefaultHalfExtent;
  std::string out;
};

struct TrainArgs {
  std::size_t stage = 1;
  std::string data, val, init, resume, out, metrics;
  std::size_t epochs = 120;
  std::size_t batch = 32;
  std::optional<double> lr;
  std::uint64_t seed = 1;
  bool deterministic = false;
  bool reset_schedule = false;
  std::optional<std::size_t> blocks;
  std::string pool = "avg", act = "prelu";
};

struct EvalArgs {
  std::string ckpt, data, report;
  std::uint64_t seed = 1;
  std::string head = "residual";
};

struct CompareArgs {
  std::string kind, data, out_dir;
  std::size_t epochs = 1;
  std::size_t batch = 32;
  std::uint64_t seed = 1;
  std::optional<std::size_t> blocks;
};

struct BenchArgs {
  std::string ckpt, data, out;
  std::size_t n = 1024;
  std::size_t warmup = 3;
  std::uint64_t seed = 1;
};

void print_report(const EvalReport& r) {
  std::cout << "quantity      axis  std         max         mean\n";
  for (const auto& row : r.rows) {
    std::printf("%-13s %-5s %-11.6f %-11.6f %.6f\n", row.quantity.c_str(), row.axis.c_str(), row.std, row.max,
                row.mean);
  }
}

NetworkConfig fresh_network(const Dataset& data, const TrainArgs& a) {
  if (data.width != data.height) throw std::invalid_argument("training needs square images");
  NetworkConfig n = scaled_config(data.width, a.stage);
  if (a.blocks) n.n_blocks = *a.blocks;
  n.pooling = parse_pooling(a.pool);
  n.activation = parse_activation(a.act);
  n.validate();
  return n;
}

int run_gen(const GenArgs& a) {
  const Dataset d = generate_dataset_file(a.count, a.seed, build_rig(a.size, a.half_extent), a.out);
  std::cout << "wrote " << d.size() << " records of " << d.width << "x" << d.height << " to " << a.out << "\n";
  return 0;
}

int run_train(const TrainArgs& a) {
  const Dataset train = read_dataset(a.data);
  std::optional<Dataset> val;
  if (!a.val.empty()) val = read_dataset(a.val);

  TrainConfig cfg;
  cfg.stage = a.stage;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.initial_lr = a.lr;
  cfg.reset_schedule = a.reset_schedule;
  cfg.seed = a.seed;
  cfg.checkpoint_out = a.out;
  cfg.metrics_out = a.metrics.empty() ? fs::path(a.out).replace_extension(".csv") : fs::path(a.metrics);

  StageStart start;
  if (!a.resume.empty()) {
    cfg.network = load_checkpoint(a.resume).weights.config;
    start = resume_start(cfg, a.resume);
  } else if (!a.init.empty()) {
    auto init = load_checkpoint(a.init).weights;
    cfg.network = init.config;
    start = stage_start(cfg, init);
  } else {
    cfg.network = fresh_network(train, a);
    start = stage_start(cfg, std::nullopt);
  }

  std::cout << "stage " << cfg.stage << ", " << cfg.stage_network().fingerprint() << ", "
            << count_parameters(start.weights) << " parameters\n";
  const auto r = train_stage(cfg, train, val ? &*val : nullptr, std::move(start),
                             [has_val = val.has_value()](const ValidationRecord& v, const MetricsLog& log) {
                               std::cout << "epoch " << v.epoch << " loss " << log.iterations.back().loss;
                               if (has_val) std::cout << " val " << v.loss << " std " << v.coordinate_std;
                               std::cout << std::endl;
                             });
  std::cout << "wrote " << a.out << " and " << cfg.metrics_out.string() << "\n";
  return 0;
}

HeadKind parse_head(const std::string& s) {
  if (s == "residual") return HeadKind::residual;
  if (s == "plain") return HeadKind::difference_only;
  throw std::invalid_argument("unknown head '" + s + "' (residual|plain)");
}

int run_eval(const EvalArgs& a) {
  auto w = load_checkpoint(a.ckpt).weights;
  const Dataset data = read_dataset(a.data);
  const auto r = evaluate(w, data, a.seed, parse_head(a.head));
  write_report_csv(a.report, r);
  print_report(r);
  std::cout << r.ms_per_measurement << " ms per measurement\n";
  return 0;
}

int run_ablate(const EvalArgs& a) {
  auto w = load_checkpoint(a.ckpt).weights;
  const Dataset data = read_dataset(a.data);
  const auto r = ablate_residual(w, data, a.seed);
  write_ablation_csv(a.report, r);
  std::cout << "residual\n";
  print_report(r.residual);
  std::cout << "plain\n";
  print_report(r.plain);
  std::cout << "velocity std change " << r.velocity_delta_percent << "%, acceleration "
            << r.acceleration_delta_percent << "%\n";
  return 0;
}

int run_compare(const CompareArgs& a) {
  const Dataset data = read_dataset(a.data);
  NetworkConfig base = scaled_config(data.width, 1);
  if (a.blocks) base.n_blocks = *a.blocks;
  std::vector<ComparisonArm> arms;
  if (a.kind == "pooling") {
    arms = compare_pooling(base, data, a.epochs, a.seed, a.batch);
  } else if (a.kind == "nonlinearity") {
    arms = compare_nonlinearity(base, data, a.epochs, a.seed, a.batch);
  } else {
    throw std::invalid_argument("unknown comparison '" + a.kind + "' (pooling|nonlinearity)");
  }
  fs::create_directories(a.out_dir);
  for (const auto& arm : arms) {
    const auto path = fs::path(a.out_dir) / ("curve_" + arm.label + ".csv");
    write_curve_csv(path, arm.log);
    std::cout << arm.label << ": final loss " << arm.log.iterations.back().loss << " -> " << path.string() << "\n";
  }
  return 0;
}

int run_kernels(const std::string& ckpt, const std::string& out) {
  const auto w = load_checkpoint(ckpt).weights;
  const auto rows = pid::report_kernel_pid(w.params);
  std::ofstream os(out);
  if (!os) throw IoError("cannot write " + out);
  pid::write_kernel_report(os, rows);
  if (!os) throw IoError("write failed: " + out);
  std::cout << rows.size() << " kernel rows to " << out << "\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  auto w = load_checkpoint(a.ckpt).weights;
  const std::size_t size = w.config.image_size;
  const Dataset data = a.data.empty() ? generate_dataset(64, a.seed, build_rig(size)) : read_dataset(a.data);
  Rng rng(a.seed);
  std::vector<Tensor> inputs;
  for (std::size_t i = 0; i < std::min<std::size_t>(data.size(), a.n); ++i) {
    const std::size_t idx[1] = {i};
    inputs.push_back(make_batch(data, idx, rng, w.config.frames).input);
  }
  const auto r = benchmark_inference(w, inputs, a.n, a.warmup);
  if (!a.out.empty()) write_bench_csv(a.out, r);
  std::cout << "mean " << r.mean_ms << " ms, p95 " << r.p95_ms << " ms, " << r.throughput << " per second\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PID-inspired CNN for ball position, velocity and acceleration from stereo frames"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "render a synthetic stereo dataset");
  g->add_option("--count", gen.count, "records")->required();
  g->add_option("--seed", gen.seed)->required();
  g->add_option("--size", gen.size, "image side in pixels")->capture_default_str();
  g->add_option("--half-extent", gen.half_extent, "orthographic half-extent, world units")->capture_default_str();
  g->add_option("--out", gen.out)->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train one curriculum stage");
  t->add_option("--stage", tr.stage)->required()->check(CLI::Range(1, 3));
  t->add_option("--data", tr.data)->required();
  t->add_option("--val", tr.val);
  auto* init_opt = t->add_option("--init", tr.init, "weights from the previous stage");
  t->add_option("--resume", tr.resume, "checkpoint of this stage to continue")->excludes(init_opt);
  t->add_option("--out", tr.out)->required();
  t->add_option("--metrics", tr.metrics, "metrics csv (default: --out with .csv)");
  t->add_option("--epochs", tr.epochs)->capture_default_str();
  t->add_option("--batch", tr.batch)->capture_default_str();
  t->add_option("--lr", tr.lr, "initial learning rate");
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_flag("--deterministic", tr.deterministic, "single-threaded, bit-reproducible (always the case)");
  t->add_flag("--reset-schedule", tr.reset_schedule, "return to the initial rate every 40 epochs");
  t->add_option("--blocks", tr.blocks, "conv blocks (default: from image size)");
  t->add_option("--pool", tr.pool, "avg|max")->capture_default_str();
  t->add_option("--act", tr.act, "prelu|relu")->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "error report on a test set");
  e->add_option("--ckpt", ev.ckpt)->required();
  e->add_option("--data", ev.data)->required();
  e->add_option("--report", ev.report)->required();
  e->add_option("--seed", ev.seed)->capture_default_str();
  e->add_option("--head", ev.head, "residual|plain")->capture_default_str();

  EvalArgs ab;
  auto* a = app.add_subcommand("ablate", "residual heads against plain differences");
  a->add_option("--ckpt", ab.ckpt)->required();
  a->add_option("--data", ab.data)->required();
  a->add_option("--report,--out", ab.report)->required();
  a->add_option("--seed", ab.seed)->capture_default_str();

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "training curves for pooling or nonlinearity arms");
  c->add_option("--kind", cmp.kind, "pooling|nonlinearity")->required();
  c->add_option("--data", cmp.data)->required();
  c->add_option("--out-dir", cmp.out_dir)->required();
  c->add_option("--epochs", cmp.epochs)->capture_default_str();
  c->add_option("--batch", cmp.batch)->capture_default_str();
  c->add_option("--seed", cmp.seed)->capture_default_str();
  c->add_option("--blocks", cmp.blocks);

  std::string k_ckpt, k_out;
  auto* k = app.add_subcommand("analyze-kernels", "PID decomposition of every 3x3 kernel");
  k->add_option("--ckpt", k_ckpt)->required();
  k->add_option("--out", k_out)->required();

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "time batch-1 inference");
  b->add_option("--ckpt", be.ckpt)->required();
  b->add_option("--data", be.data, "inputs (default: 64 rendered records)");
  b->add_option("--n", be.n)->capture_default_str();
  b->add_option("--warmup", be.warmup)->capture_default_str();
  b->add_option("--seed", be.seed)->capture_default_str();
  b->add_option("--out", be.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) return run_gen(gen);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*a) return run_ablate(ab);
    if (*c) return run_compare(cmp);
    if (*k) return run_kernels(k_ckpt, k_out);
    if (*b) return run_bench(be);
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const NumericError& err) {
    std::cerr << "numeric failure: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
