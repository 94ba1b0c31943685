#include "pcalign/experiments.hpp"

#include "csv.hpp"
#include "pcalign/checkpoint.hpp"
#include "pcalign/errors.hpp"
#include "pcalign/mnist.hpp"
#include "pcalign/resnet.hpp"
#include "pcalign/rng.hpp"
#include "pcalign/tasks.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>

namespace pcalign {

namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Architecture {
  int hidden_layers;
  int hidden_width;
};

std::vector<Architecture> architectures(const ExperimentConfig& cfg) {
  std::vector<Architecture> out;
  if (!cfg.depths.empty()) {
    for (int d : cfg.depths) out.push_back({d, cfg.hidden_width});
  } else if (!cfg.widths.empty()) {
    for (int w : cfg.widths) out.push_back({cfg.hidden_layers, w});
  } else {
    out.push_back({cfg.hidden_layers, cfg.hidden_width});
  }
  return out;
}

std::vector<int> layer_dims(const ExperimentConfig& cfg, const Architecture& arch) {
  std::vector<int> dims{cfg.input_dim};
  for (int h = 0; h < arch.hidden_layers; ++h) dims.push_back(arch.hidden_width);
  dims.push_back(cfg.output_dim);
  return dims;
}

WeightStack toy_stack() {
  return WeightStack({Matrix::Ones(1, 1), Matrix::Ones(2, 1)});
}

Batch toy_batch() {
  Batch b;
  b.inputs = Matrix::Ones(1, 1);
  b.targets.resize(2, 1);
  b.targets << -1.0, 1.0;
  return b;
}

WeightStack build_stack(const ExperimentConfig& cfg, InitKind init, const Architecture& arch,
                        double kappa, std::uint64_t seed) {
  if (cfg.toy) return toy_stack();
  const auto dims = layer_dims(cfg, arch);
  if (!cfg.init_checkpoint.empty()) {
    WeightStack stack = load_checkpoint(cfg.init_checkpoint);
    if (stack.dims() != dims) throw ValidationError({"init_checkpoint: dims do not match the config"});
    return kappa > 0.0 ? set_condition_number(stack, kappa) : stack;
  }
  InitScheme scheme{init, seed, std::nullopt};
  if (kappa > 0.0) scheme.kappa = kappa;
  return initialize(NetworkSpec(dims), scheme);
}

Batch alignment_batch(const ExperimentConfig& cfg, int batch_size, std::uint64_t seed) {
  if (cfg.toy) return toy_batch();
  if (cfg.target == TargetKind::Teacher) {
    return BatchStream(gen_synthetic(seed, cfg.input_dim, cfg.output_dim), batch_size, seed).next_batch(0);
  }
  return random_regression_batch(cfg.input_dim, cfg.output_dim, batch_size, seed);
}

ResNetStack as_resnet(const WeightStack& stack, double scale) {
  std::vector<Matrix> blocks;
  for (const auto& w : stack.weights()) blocks.push_back(scale * w);
  return ResNetStack(std::move(blocks));
}

struct AlignmentCell {
  InitKind init;
  Architecture arch;
  double kappa;
  int batch_size;
  std::uint64_t seed;
};

std::vector<AlignmentRow> alignment_cell(const ExperimentConfig& cfg, const AlignmentCell& cell) {
  const WeightStack stack = build_stack(cfg, cell.init, cell.arch, cell.kappa, cell.seed);
  const Batch batch = alignment_batch(cfg, cell.batch_size, cell.seed);

  std::vector<Family> families{cfg.family};
  if (cfg.kind == ExperimentKind::ResNetAlignment) families = {Family::Dln, Family::ResNet};

  std::vector<AlignmentRow> rows;
  for (Family family : families) {
    for (const auto& rule : cfg.rules) {
      AlignmentRow row;
      row.family = to_string(family);
      row.init = cfg.toy ? "toy" : (cfg.init_checkpoint.empty() ? to_string(cell.init) : "checkpoint");
      row.hidden_layers = cell.arch.hidden_layers;
      row.hidden_width = cfg.toy ? 1 : cell.arch.hidden_width;
      row.kappa = cell.kappa;
      row.batch_size = batch.size();
      row.seed = cell.seed;
      row.rule = rule.label();
      try {
        const UpdateReport report =
            family == Family::Dln
                ? compute_update(rule.rule, stack, batch, rule.rescaling)
                : (rule.rule == Rule::BP
                       ? resnet_bp_report(as_resnet(stack, cfg.residual_scale), batch, rule.rescaling)
                       : resnet_pc_report(as_resnet(stack, cfg.residual_scale), batch, rule.rescaling));
        row.mean_ta = report.mean_ta();
        for (const auto& t : report.ta_per_sample) row.defined_samples += t.defined() ? 1 : 0;
      } catch (const NumericError&) {
        row.mean_ta = kNaN;
      } catch (const DegenerateActivity&) {
        row.mean_ta = kNaN;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct MnistData {
  Matrix train;
  Matrix test;
};

MnistData load_data(const ExperimentConfig& cfg) {
  std::string dir = cfg.mnist.data_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("PCALIGN_DATA_DIR")) dir = env;
  }
  if (dir.empty()) throw IoError("no MNIST directory: pass --data-dir or set PCALIGN_DATA_DIR");
  MnistData d;
  d.train = load_mnist(dir, MnistSplit::Train, cfg.mnist.train_limit).pixels;
  d.test = load_mnist(dir, MnistSplit::Test, cfg.mnist.test_limit).pixels;
  const int width = cfg.autoencoder_dims.front();
  if (d.train.rows() != width || d.test.rows() != width) {
    throw ValidationError({"autoencoder_dims: input width " + std::to_string(width) +
                           " does not match image size " + std::to_string(d.train.rows())});
  }
  if (d.train.cols() == 0) throw IoError("MNIST training split is empty");
  return d;
}

/// Sample order: one Fisher-Yates permutation per epoch, keyed by (seed, epoch).
class EpochSampler {
 public:
  EpochSampler(int n, std::uint64_t seed) : n_(n), seed_(seed) {}

  int at(long long position) {
    const auto epoch = static_cast<std::uint64_t>(position / n_);
    auto it = perms_.find(epoch);
    if (it == perms_.end()) {
      std::vector<int> p(static_cast<std::size_t>(n_));
      for (int i = 0; i < n_; ++i) p[static_cast<std::size_t>(i)] = i;
      Rng rng(derive_seed(seed_, stream::kShuffle, epoch));
      for (int i = n_ - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[static_cast<std::size_t>(i)], p[j]);
      }
      it = perms_.emplace(epoch, std::move(p)).first;
    }
    return it->second[static_cast<std::size_t>(position % n_)];
  }

 private:
  int n_;
  std::uint64_t seed_;
  std::map<std::uint64_t, std::vector<int>> perms_;
};

struct CellOutcome {
  std::vector<TrajectoryRecord> records;
  bool finite = true;
  std::optional<WeightStack> final_weights;
};

std::vector<double> layer_kappas(const WeightStack& stack) {
  std::vector<double> out;
  for (const auto& w : stack.weights()) {
    try {
      out.push_back(condition_number(w));
    } catch (const DomainError&) {
      out.push_back(kNaN);
    }
  }
  return out;
}

bool all_finite_stack(const WeightStack& stack) {
  for (const auto& w : stack.weights()) {
    if (!w.allFinite()) return false;
  }
  return true;
}

bool should_record(const ExperimentConfig& cfg, int step) {
  return step == 0 || step == cfg.steps || step % cfg.record_every == 0;
}

TrajectoryRecord base_record(const RuleSpec& rule, double lr, std::uint64_t seed, int step) {
  TrajectoryRecord r;
  r.seed = seed;
  r.step = step;
  r.rule = rule.label();
  r.rescaling = std::string(to_string(rule.rescaling.mode));
  r.lr = lr;
  r.mean_ta = kNaN;
  return r;
}

CellOutcome linear_cell(const ExperimentConfig& cfg, const RuleSpec& rule, double lr,
                        std::uint64_t seed, bool record) {
  const double kappa = cfg.kappas.empty() ? 0.0 : cfg.kappas.front();
  WeightStack stack = build_stack(cfg, cfg.inits.front(), {cfg.hidden_layers, cfg.hidden_width}, kappa, seed);
  const SyntheticTask task = gen_synthetic(seed, cfg.input_dim, cfg.output_dim);
  const BatchStream stream(task, cfg.batch_size, seed);

  CellOutcome out;
  auto snapshot = [&](int step, double loss, double ta, const Batch& batch) {
    TrajectoryRecord r = base_record(rule, lr, seed, step);
    r.loss = loss;
    r.weight_distance = weight_distance(stack, task.w_data);
    r.eval_error = r.weight_distance;
    r.mean_ta = ta;
    r.kappas = layer_kappas(stack);
    r.activity_norms = activity_norm_profile(forward(stack, batch.inputs).activities);
    out.records.push_back(std::move(r));
  };

  if (record) {
    const Batch first = stream.next_batch(0);
    snapshot(0, bp_loss(stack, first), kNaN, first);
  }
  double loss = kNaN;
  for (int step = 1; step <= cfg.steps; ++step) {
    const Batch batch = stream.next_batch(step - 1);
    UpdateReport report;
    try {
      report = compute_update(rule.rule, stack, batch, rule.rescaling);
    } catch (const NumericError&) {
      out.finite = false;
    } catch (const DegenerateActivity&) {
      out.finite = false;
    }
    if (!out.finite) break;
    loss = 0.5 * report.residual.squaredNorm() / static_cast<double>(batch.size());
    stack = apply_update(stack, report, lr);
    if (!std::isfinite(loss) || !all_finite_stack(stack)) {
      out.finite = false;
      break;
    }
    if (record && should_record(cfg, step)) snapshot(step, loss, report.mean_ta(), batch);
  }
  if (!record) {
    TrajectoryRecord r = base_record(rule, lr, seed, cfg.steps);
    r.loss = out.finite ? loss : kNaN;
    r.weight_distance = out.finite ? weight_distance(stack, task.w_data) : kNaN;
    r.eval_error = r.weight_distance;
    out.records.push_back(std::move(r));
  }
  if (out.finite) out.final_weights = stack;
  return out;
}

CellOutcome autoencoder_cell(const ExperimentConfig& cfg, const MnistData& data, const RuleSpec& rule,
                             double lr, std::uint64_t seed, bool record) {
  NonlinearNet net{initialize(NetworkSpec(cfg.autoencoder_dims), {cfg.inits.front(), seed, std::nullopt}),
                   Activation::ReLU, Activation::Sigmoid};
  const Batch test{data.test, data.test};
  EpochSampler sampler(static_cast<int>(data.train.cols()), seed);
  const int width = static_cast<int>(data.train.rows());

  CellOutcome out;
  auto snapshot = [&](int step, double loss, double ta, const Batch& batch) {
    TrajectoryRecord r = base_record(rule, lr, seed, step);
    r.loss = loss;
    r.weight_distance = kNaN;
    r.eval_error = nl_loss(net, test);
    r.mean_ta = ta;
    r.kappas = layer_kappas(net.weights);
    r.activity_norms = activity_norm_profile(nl_forward(net, batch.inputs).post);
    out.records.push_back(std::move(r));
  };

  auto batch_at = [&](int step) {
    Batch b;
    b.inputs.resize(width, cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i) {
      b.inputs.col(i) = data.train.col(sampler.at(static_cast<long long>(step) * cfg.batch_size + i));
    }
    b.targets = b.inputs;
    return b;
  };

  if (record) {
    const Batch first = batch_at(0);
    snapshot(0, nl_loss(net, first), kNaN, first);
  }
  double loss = kNaN;
  for (int step = 1; step <= cfg.steps; ++step) {
    const Batch batch = batch_at(step - 1);
    UpdateReport report;
    try {
      if (rule.rule == Rule::BP) {
        report = nl_bp_report(net, batch, rule.rescaling);
      } else {
        const InferenceResult inf = nl_pc_infer(net, batch, cfg.mnist.inference);
        report = nl_pc_report(net, batch, inf.activities, rule.rescaling);
      }
    } catch (const NumericError&) {
      out.finite = false;
    } catch (const DegenerateActivity&) {
      out.finite = false;
    } catch (const InferenceDiverged&) {
      out.finite = false;
    }
    if (!out.finite) break;
    loss = 0.5 * report.residual.squaredNorm() / static_cast<double>(batch.size());
    net = apply_update(net, report, lr);
    if (!std::isfinite(loss) || !all_finite_stack(net.weights)) {
      out.finite = false;
      break;
    }
    if (record && should_record(cfg, step)) snapshot(step, loss, report.mean_ta(), batch);
  }
  if (!record) {
    TrajectoryRecord r = base_record(rule, lr, seed, cfg.steps);
    r.loss = out.finite ? loss : kNaN;
    r.weight_distance = kNaN;
    r.eval_error = out.finite ? nl_loss(net, test) : kNaN;
    out.records.push_back(std::move(r));
  }
  if (out.finite) out.final_weights = net.weights;
  return out;
}

CellOutcome any_cell(const ExperimentConfig& cfg, const MnistData* data, const RuleSpec& rule,
                     double lr, std::uint64_t seed, bool record) {
  if (cfg.kind == ExperimentKind::Autoencoder) return autoencoder_cell(cfg, *data, rule, lr, seed, record);
  return linear_cell(cfg, rule, lr, seed, record);
}

std::string iso_time_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<AlignmentRow> run_alignment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<AlignmentCell> cells;
  const std::vector<double> kappas = cfg.kappas.empty() ? std::vector<double>{0.0} : cfg.kappas;
  const std::vector<int> batches = cfg.batch_sizes.empty() ? std::vector<int>{cfg.batch_size} : cfg.batch_sizes;
  for (auto init : cfg.inits) {
    for (const auto& arch : architectures(cfg)) {
      for (double kappa : kappas) {
        for (int b : batches) {
          for (auto seed : cfg.seeds) cells.push_back({init, arch, kappa, b, seed});
        }
      }
    }
  }
  const auto per_cell = map_cells(
      cells.size(), [&](std::size_t i) { return alignment_cell(cfg, cells[i]); }, cfg.execution);
  std::vector<AlignmentRow> rows;
  for (const auto& c : per_cell) rows.insert(rows.end(), c.begin(), c.end());
  return rows;
}

std::vector<TrajectoryRecord> train_cell(const ExperimentConfig& cfg, const RuleSpec& rule, double lr,
                                         std::uint64_t seed, bool record) {
  cfg.validate();
  std::optional<MnistData> data;
  if (cfg.kind == ExperimentKind::Autoencoder) data = load_data(cfg);
  return any_cell(cfg, data ? &*data : nullptr, rule, lr, seed, record).records;
}

namespace {

struct TrainingRun {
  TrainingResult result;
  std::vector<std::optional<WeightStack>> final_weights;
};

TrainingRun training_run(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<MnistData> data;
  if (cfg.kind == ExperimentKind::Autoencoder) data = load_data(cfg);
  const MnistData* data_ptr = data ? &*data : nullptr;

  const std::vector<double> lrs = cfg.lr_grid ? cfg.lr_grid->values() : std::vector<double>{cfg.lr};
  const std::size_t n_lr = lrs.size();
  const std::size_t n_seed = cfg.seeds.size();

  TrainingRun run;
  auto& result = run.result;
  result.sweep = map_cells(
      cfg.rules.size() * n_lr * n_seed,
      [&](std::size_t i) {
        const auto& rule = cfg.rules[i / (n_lr * n_seed)];
        const double lr = lrs[(i / n_seed) % n_lr];
        const auto seed = cfg.seeds[i % n_seed];
        const CellOutcome o = any_cell(cfg, data_ptr, rule, lr, seed, false);
        const double eval = o.records.back().eval_error;
        return SweepCell{rule.label(), lr, seed, eval, o.finite && std::isfinite(eval)};
      },
      cfg.execution);

  for (std::size_t r = 0; r < cfg.rules.size(); ++r) {
    BestLr best{cfg.rules[r].label(), kNaN, std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < n_lr; ++j) {
      double sum = 0.0;
      bool ok = true;
      for (std::size_t k = 0; k < n_seed; ++k) {
        const auto& c = result.sweep[(r * n_lr + j) * n_seed + k];
        ok = ok && c.finite;
        sum += c.final_eval;
      }
      const double mean = sum / static_cast<double>(n_seed);
      if (ok && mean < best.mean_final_eval) {
        best.lr = lrs[j];
        best.mean_final_eval = mean;
      }
    }
    result.best.push_back(best);
  }

  if (cfg.kind == ExperimentKind::LrSweep) return run;

  const auto outcomes = map_cells(
      cfg.rules.size() * n_seed,
      [&](std::size_t i) {
        const auto& best = result.best[i / n_seed];
        if (std::isnan(best.lr)) return CellOutcome{};
        return any_cell(cfg, data_ptr, cfg.rules[i / n_seed], best.lr, cfg.seeds[i % n_seed], true);
      },
      cfg.execution);
  for (const auto& o : outcomes) {
    result.trajectory.insert(result.trajectory.end(), o.records.begin(), o.records.end());
    run.final_weights.push_back(o.final_weights);
  }
  return run;
}

nlohmann::json meta_json(const ExperimentConfig& cfg, double seconds,
                         const std::vector<fs::path>& files) {
  nlohmann::json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["kind"] = to_string(cfg.kind);
  meta["created_utc"] = iso_time_utc();
  meta["elapsed_seconds"] = seconds;
  meta["threads"] = cfg.execution == Execution::Serial ? 1 : available_threads();
  meta["files"] = nlohmann::json::array();
  for (const auto& f : files) meta["files"].push_back(f.filename().string());
  meta["config"] = cfg.to_json();
  return meta;
}

}  // namespace

TrainingResult run_training(const ExperimentConfig& cfg) { return training_run(cfg).result; }

std::vector<fs::path> run(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<fs::path> files;
  switch (cfg.kind) {
    case ExperimentKind::OneStepAlignment:
    case ExperimentKind::ConditioningSweep:
    case ExperimentKind::BatchSizeSweep:
    case ExperimentKind::ResNetAlignment: {
      files.push_back(out_dir / "alignment.csv");
      write_alignment_csv(files.back(), run_alignment(cfg));
      if (cfg.toy) {
        nlohmann::json reports = nlohmann::json::array();
        for (const auto& rule : cfg.rules) {
          auto doc = report_to_json(compute_update(rule.rule, toy_stack(), toy_batch(), rule.rescaling), true);
          doc["label"] = rule.label();
          reports.push_back(std::move(doc));
        }
        files.push_back(out_dir / "update_reports.json");
        std::ofstream f(files.back());
        f << reports.dump(1) << '\n';
        if (!f) throw IoError("cannot write " + files.back().string());
      }
      break;
    }
    case ExperimentKind::WholeTraining:
    case ExperimentKind::LrSweep:
    case ExperimentKind::Autoencoder: {
      const TrainingRun tr = training_run(cfg);
      files.push_back(out_dir / "lr_sweep.csv");
      write_sweep_csv(files.back(), tr.result.sweep);
      files.push_back(out_dir / "best_lr.csv");
      write_best_lr_csv(files.back(), tr.result.best);
      if (cfg.kind != ExperimentKind::LrSweep) {
        files.push_back(out_dir / "trajectory.csv");
        write_trajectory_csv(files.back(), tr.result.trajectory);
        const fs::path ckpt = out_dir / "checkpoints";
        fs::create_directories(ckpt, ec);
        if (ec) throw IoError("cannot create " + ckpt.string() + ": " + ec.message());
        for (std::size_t i = 0; i < tr.final_weights.size(); ++i) {
          if (!tr.final_weights[i]) continue;
          const auto& rule = cfg.rules[i / cfg.seeds.size()];
          const auto seed = cfg.seeds[i % cfg.seeds.size()];
          save_checkpoint(*tr.final_weights[i], ckpt / (rule.label() + "_seed" + std::to_string(seed) + ".json"));
        }
      }
      break;
    }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path meta = out_dir / "meta.json";
  std::ofstream f(meta);
  f << meta_json(cfg, seconds, files).dump(1) << '\n';
  if (!f) throw IoError("cannot write " + meta.string());
  files.push_back(meta);
  return files;
}

void write_alignment_csv(const fs::path& path, const std::vector<AlignmentRow>& rows) {
  csv::Table t;
  t.header = {"family", "init", "hidden_layers", "hidden_width", "kappa", "batch_size",
              "seed", "rule", "mean_ta", "defined_samples"};
  for (const auto& r : rows) {
    t.rows.push_back({r.family, r.init, std::to_string(r.hidden_layers), std::to_string(r.hidden_width),
                      csv::fmt(r.kappa), std::to_string(r.batch_size), std::to_string(r.seed), r.rule,
                      csv::fmt(r.mean_ta), std::to_string(r.defined_samples)});
  }
  csv::write_table(path, t);
}

std::vector<AlignmentRow> read_alignment_csv(const fs::path& path) {
  const csv::Table t = csv::read_table(path);
  const auto c_family = t.column("family"), c_init = t.column("init"), c_h = t.column("hidden_layers"),
             c_w = t.column("hidden_width"), c_k = t.column("kappa"), c_b = t.column("batch_size"),
             c_seed = t.column("seed"), c_rule = t.column("rule"), c_ta = t.column("mean_ta"),
             c_def = t.column("defined_samples");
  std::vector<AlignmentRow> out;
  for (const auto& r : t.rows) {
    AlignmentRow row;
    row.family = r[c_family];
    row.init = r[c_init];
    row.hidden_layers = std::stoi(r[c_h]);
    row.hidden_width = std::stoi(r[c_w]);
    row.kappa = csv::parse_double(r[c_k]);
    row.batch_size = std::stoi(r[c_b]);
    row.seed = std::stoull(r[c_seed]);
    row.rule = r[c_rule];
    row.mean_ta = csv::parse_double(r[c_ta]);
    row.defined_samples = std::stoi(r[c_def]);
    out.push_back(std::move(row));
  }
  return out;
}

void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryRecord>& rows) {
  csv::Table t;
  t.header = {"seed", "step", "rule", "rescaling", "lr", "loss", "weight_distance",
              "eval_error", "mean_ta", "kappas", "activity_norms"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.seed), std::to_string(r.step), r.rule, r.rescaling, csv::fmt(r.lr),
                      csv::fmt(r.loss), csv::fmt(r.weight_distance), csv::fmt(r.eval_error),
                      csv::fmt(r.mean_ta), csv::join(r.kappas), csv::join(r.activity_norms)});
  }
  csv::write_table(path, t);
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepCell>& rows) {
  csv::Table t;
  t.header = {"rule", "lr", "seed", "final_eval", "finite"};
  for (const auto& r : rows) {
    t.rows.push_back({r.rule, csv::fmt(r.lr), std::to_string(r.seed), csv::fmt(r.final_eval),
                      r.finite ? "1" : "0"});
  }
  csv::write_table(path, t);
}

void write_best_lr_csv(const fs::path& path, const std::vector<BestLr>& rows) {
  csv::Table t;
  t.header = {"rule", "lr", "mean_final_eval"};
  for (const auto& r : rows) t.rows.push_back({r.rule, csv::fmt(r.lr), csv::fmt(r.mean_final_eval)});
  csv::write_table(path, t);
}

}  // namespace pcalign
