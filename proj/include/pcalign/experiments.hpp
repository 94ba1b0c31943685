#pragma once

#include "pcalign/learning_rules.hpp"
#include "pcalign/nonlinear.hpp"
#include "pcalign/parallel.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pcalign {

enum class ExperimentKind {
  OneStepAlignment,
  ConditioningSweep,
  BatchSizeSweep,
  WholeTraining,
  LrSweep,
  Autoencoder,
  ResNetAlignment,
};

enum class Family { Dln, ResNet };

/// Random: x and y drawn independently from N(0, I). Teacher: y = W_data x.
enum class TargetKind { Random, Teacher };

struct RuleSpec {
  Rule rule = Rule::BP;
  RescalingConfig rescaling;

  /// "BP", "PC", "PC+AdaptiveLR", "BP+Decorrelation", ...
  std::string label() const;
};

/// `count` log-spaced points 10^lo_exp .. 10^hi_exp (inclusive).
struct LrGrid {
  double lo_exp = -3.5;
  double hi_exp = 0.3;
  int count = 100;

  std::vector<double> values() const;
};

struct MnistConfig {
  std::string data_dir;
  int train_limit = 1024;
  int test_limit = 256;
  InferenceConfig inference;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::OneStepAlignment;
  Family family = Family::Dln;
  /// Toy network: dims 1-1-2, all weights one, x = 1, y = [-1, 1].
  bool toy = false;

  int input_dim = 512;
  int output_dim = 512;
  int hidden_width = 512;
  int hidden_layers = 1;
  /// Depth sweep (hidden-layer counts) at `hidden_width`.
  std::vector<int> depths;
  /// Width sweep (hidden widths) at `hidden_layers`.
  std::vector<int> widths;
  std::vector<double> kappas;
  std::vector<int> batch_sizes;
  std::vector<InitKind> inits{InitKind::NormPreservingNormal};
  std::vector<RuleSpec> rules;

  int batch_size = 1;
  TargetKind target = TargetKind::Random;
  double lr = 1e-4;
  std::optional<LrGrid> lr_grid;
  int steps = 500;
  int record_every = 1;
  std::vector<std::uint64_t> seeds;
  std::string init_checkpoint;
  /// Multiplier on drawn matrices when they are used as residual blocks.
  double residual_scale = 1.0;

  std::vector<int> autoencoder_dims{784, 128, 32, 128, 784};
  MnistConfig mnist;

  Execution execution = Execution::Parallel;

  /// Throws ValidationError listing every bad field.
  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

/// Named sub-experiments making up a preset; each runs into `<out>/<name>`.
struct NamedConfig {
  std::string name;
  ExperimentConfig config;
};

std::vector<std::string> preset_names();
/// Desk-scale by default; `full_scale` switches to the published sizes.
std::vector<NamedConfig> preset(const std::string& name, bool full_scale = false);

/// Alignment of a single update, one row per (architecture, seed, rule).
struct AlignmentRow {
  std::string family;
  std::string init;
  int hidden_layers = 0;
  int hidden_width = 0;
  double kappa = 0.0;  // 0 when unconditioned
  int batch_size = 1;
  std::uint64_t seed = 0;
  std::string rule;
  double mean_ta = 0.0;
  int defined_samples = 0;
};

std::vector<AlignmentRow> run_alignment(const ExperimentConfig& cfg);

/// Per-step metrics of one training run.
struct TrajectoryRecord {
  std::uint64_t seed = 0;
  int step = 0;
  std::string rule;
  std::string rescaling;
  double lr = 0.0;
  double loss = 0.0;
  double weight_distance = 0.0;
  /// Metric used for learning-rate selection (weight distance, or test
  /// reconstruction error for the autoencoder).
  double eval_error = 0.0;
  double mean_ta = 0.0;
  std::vector<double> kappas;
  std::vector<double> activity_norms;
};

struct SweepCell {
  std::string rule;
  double lr = 0.0;
  std::uint64_t seed = 0;
  double final_eval = 0.0;
  bool finite = true;
};

struct BestLr {
  std::string rule;
  double lr = 0.0;
  double mean_final_eval = 0.0;
};

struct TrainingResult {
  std::vector<SweepCell> sweep;
  std::vector<BestLr> best;
  std::vector<TrajectoryRecord> trajectory;
};

/// Runs one (rule, lr, seed) training cell; records every `record_every` steps when `record`.
std::vector<TrajectoryRecord> train_cell(const ExperimentConfig& cfg, const RuleSpec& rule,
                                         double lr, std::uint64_t seed, bool record);

/// LrSweep/WholeTraining/Autoencoder: sweep, pick best lr per rule by mean
/// final eval error, then (unless kind is LrSweep) record trajectories at it.
TrainingResult run_training(const ExperimentConfig& cfg);

/// Runs any kind and writes CSV bodies plus `meta.json` into `out_dir`.
std::vector<std::filesystem::path> run(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir);

void write_alignment_csv(const std::filesystem::path& path, const std::vector<AlignmentRow>& rows);
std::vector<AlignmentRow> read_alignment_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRecord>& rows);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepCell>& rows);
void write_best_lr_csv(const std::filesystem::path& path, const std::vector<BestLr>& rows);

/// Reads result CSVs under `results_dir` (recursively) and writes one
/// plot-ready file per panel into `out_dir`. Returns the written paths.
std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& results_dir,
                                                 const std::filesystem::path& out_dir);

std::string to_string(ExperimentKind kind);
std::string to_string(InitKind kind);
std::string to_string(Family family);
ExperimentKind parse_experiment_kind(const std::string& text);
InitKind parse_init_kind(const std::string& text);

/// Parses "BP", "PC+AdaptiveLR", ... into a rule with default rescaling options.
RuleSpec parse_rule_label(const std::string& label);

}  // namespace pcalign
