#pragma once

#include "pcalign/types.hpp"

#include <cstdint>
#include <vector>

namespace pcalign {

/// Teacher map y = W_data x with W_data entries ~ N(0, 1/d_in).
struct SyntheticTask {
  Matrix w_data;
  std::uint64_t seed = 0;

  int input_dim() const { return static_cast<int>(w_data.cols()); }
  int output_dim() const { return static_cast<int>(w_data.rows()); }
};

SyntheticTask gen_synthetic(std::uint64_t seed, int d_in, int d_out);

/// d x B matrix of independent standard normals drawn from `seed`.
Matrix standard_normal(int rows, int cols, std::uint64_t seed);

/// Online batch sequence for a task. Batch `step` depends only on (seed, step),
/// so every learning rule consuming the same stream sees identical data.
class BatchStream {
 public:
  BatchStream(SyntheticTask task, int batch_size, std::uint64_t seed);

  /// Caches batches 0..steps-1.
  void presample(int steps);

  Batch next_batch(int step) const;

  const SyntheticTask& task() const { return task_; }
  int batch_size() const { return batch_size_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Batch draw(int step) const;

  SyntheticTask task_;
  int batch_size_;
  std::uint64_t seed_;
  std::vector<Batch> cache_;
};

/// Inputs and targets drawn independently from N(0, I) (single-step protocol).
Batch random_regression_batch(int d_in, int d_out, int batch_size, std::uint64_t seed);

}  // namespace pcalign
