#include "doctest.h"

#include "pcalign/errors.hpp"
#include "pcalign/mnist.hpp"

#include <filesystem>
#include <fstream>

using namespace pcalign;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "pcalign_mnist_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
          static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

std::vector<std::uint8_t> header(std::initializer_list<std::uint32_t> words) {
  std::vector<std::uint8_t> out;
  for (auto w : words) {
    const auto b = be32(w);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

}  // namespace

TEST_CASE("round trip through the IDX writer") {
  std::vector<std::uint8_t> pix(3 * 28 * 28);
  for (std::size_t i = 0; i < pix.size(); ++i) pix[i] = static_cast<std::uint8_t>(i % 256);
  const auto p = scratch("rt-images");
  write_idx_images(p, 28, 28, pix);
  const auto set = read_idx_images(p);
  CHECK(set.rows == 28);
  CHECK(set.dim() == 784);
  CHECK(set.count() == 3);
  CHECK(set.pixels(255, 0) == 1.0);
  CHECK(set.pixels(0, 0) == 0.0);
  CHECK(set.pixels(1, 1) == doctest::Approx(static_cast<double>((784 + 1) % 256) / 255.0));
  CHECK(read_idx_images(p, 2).count() == 2);
  CHECK(set.pixels.maxCoeff() <= 1.0);
}

TEST_CASE("bad magic is a format error at offset 0") {
  auto bytes = header({2049, 1, 2, 2});
  bytes.resize(bytes.size() + 4, 0);
  const auto p = scratch("bad-magic");
  write_bytes(p, bytes);
  try {
    read_idx_images(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 0);
  }
}

TEST_CASE("truncated pixel data reports where it stopped") {
  auto bytes = header({2051, 2, 2, 2});
  bytes.resize(bytes.size() + 5, 7);
  const auto p = scratch("short");
  write_bytes(p, bytes);
  try {
    read_idx_images(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 21);
  }
  write_bytes(p, {0, 0, 8});
  try {
    read_idx_images(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 3);
  }
}

TEST_CASE("labels") {
  auto bytes = header({2049, 3});
  bytes.insert(bytes.end(), {7, 1, 9});
  const auto p = scratch("labels");
  write_bytes(p, bytes);
  CHECK(read_idx_labels(p) == std::vector<std::uint8_t>{7, 1, 9});
  CHECK(read_idx_labels(p, 1) == std::vector<std::uint8_t>{7});
  CHECK_THROWS_AS(read_idx_images(p), FormatError);
}

TEST_CASE("load_mnist resolves the standard file names") {
  const auto dir = scratch("dir");
  fs::create_directories(dir);
  write_idx_images(dir / "t10k-images-idx3-ubyte", 28, 28, std::vector<std::uint8_t>(784, 255));
  const auto set = load_mnist(dir, MnistSplit::Test);
  CHECK(set.count() == 1);
  CHECK(set.pixels.minCoeff() == 1.0);
  CHECK_THROWS_AS(load_mnist(dir, MnistSplit::Train), IoError);
}
