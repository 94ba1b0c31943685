#pragma once

#include "pcalign/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pcalign {

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

/// Images as columns of `pixels` (rows*cols x N), scaled to [0, 1].
struct ImageSet {
  int rows = 0;
  int cols = 0;
  Matrix pixels;

  int count() const { return static_cast<int>(pixels.cols()); }
  int dim() const { return rows * cols; }
};

/// Parses an IDX3 image file. `limit` < 0 reads everything.
ImageSet read_idx_images(const std::filesystem::path& path, int limit = -1);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path, int limit = -1);

/// Writes raw 8-bit images in IDX3 layout (big-endian header).
void write_idx_images(const std::filesystem::path& path, int rows, int cols,
                      const std::vector<std::uint8_t>& pixels);

enum class MnistSplit { Train, Test };

/// Loads `train-images-idx3-ubyte` or `t10k-images-idx3-ubyte` from `dir`.
ImageSet load_mnist(const std::filesystem::path& dir, MnistSplit split, int limit = -1);

}  // namespace pcalign
