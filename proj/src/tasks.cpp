#include "pcalign/tasks.hpp"

#include "pcalign/errors.hpp"
#include "pcalign/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcalign {

namespace {

void check_dims(int d_in, int d_out) {
  if (d_in < 1 || d_out < 1) {
    throw DomainError("task dims must be >= 1, got " + std::to_string(d_in) + " -> " +
                      std::to_string(d_out));
  }
}

}  // namespace

SyntheticTask gen_synthetic(std::uint64_t seed, int d_in, int d_out) {
  check_dims(d_in, d_out);
  Rng rng(derive_seed(seed, stream::kTask));
  const double sd = 1.0 / std::sqrt(static_cast<double>(d_in));
  SyntheticTask task;
  task.seed = seed;
  task.w_data.resize(d_out, d_in);
  for (int i = 0; i < d_out; ++i) {
    for (int j = 0; j < d_in; ++j) task.w_data(i, j) = rng.normal(0.0, sd);
  }
  return task;
}

Matrix standard_normal(int rows, int cols, std::uint64_t seed) {
  if (rows < 0 || cols < 0) throw DomainError("negative matrix size");
  Rng rng(seed);
  Matrix m(rows, cols);
  // Column by column: a wider draw extends a narrower one with the same seed.
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

BatchStream::BatchStream(SyntheticTask task, int batch_size, std::uint64_t seed)
    : task_(std::move(task)), batch_size_(batch_size), seed_(seed) {
  if (batch_size < 1) throw DomainError("batch size must be >= 1, got " + std::to_string(batch_size));
}

void BatchStream::presample(int steps) {
  cache_.clear();
  cache_.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int s = 0; s < steps; ++s) cache_.push_back(draw(s));
}

Batch BatchStream::next_batch(int step) const {
  if (step < 0) throw IndexError("batch step must be >= 0");
  if (static_cast<std::size_t>(step) < cache_.size()) return cache_[static_cast<std::size_t>(step)];
  return draw(step);
}

Batch BatchStream::draw(int step) const {
  Batch b;
  b.inputs = standard_normal(task_.input_dim(), batch_size_,
                             derive_seed(seed_, stream::kBatch, static_cast<std::uint64_t>(step)));
  b.targets = task_.w_data * b.inputs;
  return b;
}

Batch random_regression_batch(int d_in, int d_out, int batch_size, std::uint64_t seed) {
  check_dims(d_in, d_out);
  if (batch_size < 1) throw DomainError("batch size must be >= 1");
  Batch b;
  b.inputs = standard_normal(d_in, batch_size, derive_seed(seed, stream::kBatch));
  b.targets = standard_normal(d_out, batch_size, derive_seed(seed, stream::kTarget));
  return b;
}

}  // namespace pcalign
