#include "doctest.h"

#include "pcalign/experiments.hpp"
#include "pcalign/parallel.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pcalign;

namespace {

struct ThreadScope {
  ThreadScope() {
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
  }
};

ExperimentConfig small_alignment() {
  ExperimentConfig cfg;
  cfg.input_dim = cfg.output_dim = 12;
  cfg.hidden_width = 10;
  cfg.depths = {1, 3, 5};
  cfg.batch_sizes = {1, 4};
  cfg.inits = {InitKind::KaimingUniform, InitKind::NormPreservingNormal};
  cfg.rules = {parse_rule_label("BP"), parse_rule_label("PC"), parse_rule_label("PC+AdaptiveLR")};
  cfg.seeds = {0, 1, 2};
  return cfg;
}

// Equal, or both NaN.
bool identical(double a, double b) { return a == b || (a != a && b != b); }

bool same(const AlignmentRow& a, const AlignmentRow& b) {
  return identical(a.mean_ta, b.mean_ta) && a.family == b.family && a.init == b.init && a.hidden_layers == b.hidden_layers &&
         a.batch_size == b.batch_size && a.seed == b.seed && a.rule == b.rule &&
         a.defined_samples == b.defined_samples;
}

}  // namespace

TEST_CASE("map_cells keeps index order") {
  ThreadScope threads;
  const auto serial = map_cells(100, [](std::size_t i) { return i * i; }, Execution::Serial);
  const auto parallel = map_cells(100, [](std::size_t i) { return i * i; }, Execution::Parallel);
  CHECK(serial == parallel);
  CHECK(parallel[7] == 49);
  CHECK(map_cells(0, [](std::size_t i) { return i; }).empty());
}

TEST_CASE("map_cells rethrows the lowest failing index") {
  ThreadScope threads;
  auto fn = [](std::size_t i) -> int {
    if (i == 13 || i == 40) throw std::runtime_error("cell " + std::to_string(i));
    return 0;
  };
  for (auto ex : {Execution::Serial, Execution::Parallel}) {
    try {
      map_cells(64, fn, ex);
      FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "cell 13");
    }
  }
}

TEST_CASE("alignment sweep: serial and parallel agree exactly") {
  ThreadScope threads;
  auto cfg = small_alignment();
  cfg.execution = Execution::Serial;
  const auto serial = run_alignment(cfg);
  cfg.execution = Execution::Parallel;
  const auto parallel = run_alignment(cfg);
  REQUIRE(serial.size() == parallel.size());
  REQUIRE(serial.size() == 2 * 3 * 2 * 3 * 3);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(same(serial[i], parallel[i]));
}

TEST_CASE("training sweep: serial and parallel agree exactly") {
  ThreadScope threads;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::WholeTraining;
  cfg.input_dim = cfg.output_dim = cfg.hidden_width = 6;
  cfg.hidden_layers = 2;
  cfg.target = TargetKind::Teacher;
  cfg.inits = {InitKind::KaimingUniform};
  cfg.rules = {parse_rule_label("BP"), parse_rule_label("PC")};
  cfg.lr_grid = LrGrid{-2.0, 0.0, 3};
  cfg.steps = 20;
  cfg.record_every = 5;
  cfg.seeds = {0, 1};
  cfg.execution = Execution::Serial;
  const auto serial = run_training(cfg);
  cfg.execution = Execution::Parallel;
  const auto parallel = run_training(cfg);
  REQUIRE(serial.sweep.size() == parallel.sweep.size());
  for (std::size_t i = 0; i < serial.sweep.size(); ++i) {
    CHECK(identical(serial.sweep[i].final_eval, parallel.sweep[i].final_eval));
  }
  REQUIRE(serial.trajectory.size() == parallel.trajectory.size());
  for (std::size_t i = 0; i < serial.trajectory.size(); ++i) {
    CHECK(serial.trajectory[i].loss == parallel.trajectory[i].loss);
    CHECK(identical(serial.trajectory[i].mean_ta, parallel.trajectory[i].mean_ta));
  }
}
