#include "pcalign/mnist.hpp"

#include "pcalign/errors.hpp"

#include <fstream>
#include <iterator>

namespace pcalign {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const char* field) {
  if (bytes.size() < offset + 4) {
    throw FormatError(std::string("truncated IDX header reading ") + field, bytes.size());
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::size_t take(std::uint32_t count, int limit) {
  if (limit < 0 || static_cast<std::uint32_t>(limit) > count) return count;
  return static_cast<std::size_t>(limit);
}

}  // namespace

ImageSet read_idx_images(const std::filesystem::path& path, int limit) {
  const auto bytes = slurp(path);
  const auto magic = read_be32(bytes, 0, "magic");
  if (magic != kIdxImageMagic) {
    throw FormatError(path.string() + ": image magic " + std::to_string(magic) + ", expected 2051", 0);
  }
  const auto count = read_be32(bytes, 4, "image count");
  const auto rows = read_be32(bytes, 8, "row count");
  const auto cols = read_be32(bytes, 12, "column count");
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) {
    throw FormatError(path.string() + ": implausible image size", 8);
  }
  const std::size_t dim = std::size_t{rows} * cols;
  const std::size_t n = take(count, limit);
  constexpr std::size_t header = 16;
  if (bytes.size() < header + n * dim) {
    throw FormatError(path.string() + ": truncated pixel data, need " + std::to_string(n * dim) +
                          " bytes",
                      bytes.size());
  }

  ImageSet set;
  set.rows = static_cast<int>(rows);
  set.cols = static_cast<int>(cols);
  set.pixels.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < dim; ++p) {
      set.pixels(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) =
          bytes[header + i * dim + p] / 255.0;
    }
  }
  return set;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path, int limit) {
  const auto bytes = slurp(path);
  const auto magic = read_be32(bytes, 0, "magic");
  if (magic != kIdxLabelMagic) {
    throw FormatError(path.string() + ": label magic " + std::to_string(magic) + ", expected 2049", 0);
  }
  const std::size_t n = take(read_be32(bytes, 4, "label count"), limit);
  constexpr std::size_t header = 8;
  if (bytes.size() < header + n) {
    throw FormatError(path.string() + ": truncated label data", bytes.size());
  }
  return {bytes.begin() + header, bytes.begin() + static_cast<std::ptrdiff_t>(header + n)};
}

void write_idx_images(const std::filesystem::path& path, int rows, int cols,
                      const std::vector<std::uint8_t>& pixels) {
  if (rows < 1 || cols < 1) throw DomainError("IDX image size must be positive");
  const std::size_t dim = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (pixels.size() % dim != 0) throw ShapeError("pixel buffer is not a whole number of images");
  std::vector<std::uint8_t> out;
  out.reserve(16 + pixels.size());
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(pixels.size() / dim));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  out.insert(out.end(), pixels.begin(), pixels.end());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path.string());
}

ImageSet load_mnist(const std::filesystem::path& dir, MnistSplit split, int limit) {
  const char* name = split == MnistSplit::Train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
  const auto path = dir / name;
  if (!std::filesystem::exists(path)) {
    throw IoError("MNIST file not found: " + path.string());
  }
  return read_idx_images(path, limit);
}

}  // namespace pcalign
