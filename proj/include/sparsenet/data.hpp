#pragma once

#include <cstdint>
#include <cstdlib>
#include <algorithm>
#include <iterator>
#include <numeric>
#include <span>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sparsenet/errors.hpp"
#include "sparsenet/rng.hpp"

namespace sparsenet {

// Images stored row-major as floats in [0, 1]. Rows at or after
// `test_pool_begin` (when set) come from a separate official test file and are
// only ever used for the test split.
struct LabeledDataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> images;
  std::vector<std::uint8_t> labels;
  std::optional<std::size_t> test_pool_begin;

  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  std::span<const float> image(std::size_t row) const { return {images.data() + row * cols, cols}; }
  bool has_splits() const noexcept { return !train.empty(); }
};

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::string& file) {
  if (offset + 4 > bytes.size()) throw FormatError(offset, file + ": truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Parses an IDX image/label file pair (big-endian headers, unsigned bytes).
inline LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto img = detail::read_file(images_path);
  const auto lab = detail::read_file(labels_path);
  const std::string img_name = images_path.filename().string();
  const std::string lab_name = labels_path.filename().string();

  if (auto magic = detail::read_be32(img, 0, img_name); magic != kIdxImageMagic) {
    throw FormatError(0, img_name + ": bad image magic " + std::to_string(magic));
  }
  if (auto magic = detail::read_be32(lab, 0, lab_name); magic != kIdxLabelMagic) {
    throw FormatError(0, lab_name + ": bad label magic " + std::to_string(magic));
  }
  const std::size_t count = detail::read_be32(img, 4, img_name);
  const std::size_t height = detail::read_be32(img, 8, img_name);
  const std::size_t width = detail::read_be32(img, 12, img_name);
  const std::size_t label_count = detail::read_be32(lab, 4, lab_name);
  if (count != label_count) {
    throw FormatError(4, "image count " + std::to_string(count) + " differs from label count " + std::to_string(label_count));
  }
  const std::size_t pixels = height * width;
  if (pixels == 0) throw FormatError(8, img_name + ": zero image size");
  const std::size_t img_need = 16 + count * pixels;
  if (img.size() < img_need) throw FormatError(img.size(), img_name + ": truncated pixel payload");
  if (img.size() > img_need) throw FormatError(img_need, img_name + ": trailing bytes after payload");
  const std::size_t lab_need = 8 + count;
  if (lab.size() < lab_need) throw FormatError(lab.size(), lab_name + ": truncated label payload");
  if (lab.size() > lab_need) throw FormatError(lab_need, lab_name + ": trailing bytes after payload");

  LabeledDataset ds;
  ds.rows = count;
  ds.cols = pixels;
  ds.images.resize(count * pixels);
  for (std::size_t i = 0; i < count * pixels; ++i) ds.images[i] = static_cast<float>(img[16 + i]) / 255.0f;
  ds.labels.assign(lab.begin() + 8, lab.end());
  for (std::size_t i = 0; i < count; ++i) {
    if (ds.labels[i] > 9) throw FormatError(8 + i, lab_name + ": label out of range 0..9");
  }
  return ds;
}

// Official training file followed by the official test file; the latter is
// reserved for the test split.
inline LabeledDataset load_mnist(const std::filesystem::path& dir) {
  LabeledDataset train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  LabeledDataset test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  if (train.cols != test.cols) throw FormatError(8, "train and test image sizes differ");
  train.test_pool_begin = train.rows;
  train.images.insert(train.images.end(), test.images.begin(), test.images.end());
  train.labels.insert(train.labels.end(), test.labels.begin(), test.labels.end());
  train.rows += test.rows;
  return train;
}

// --mnist-dir wins over the SPARSENET_MNIST_DIR environment variable.
inline std::optional<std::filesystem::path> resolve_mnist_dir(const std::string& flag) {
  if (!flag.empty()) return std::filesystem::path(flag);
  if (const char* env = std::getenv("SPARSENET_MNIST_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

// Ten random binary prototypes over 784 pixels; each sample takes its class
// prototype and flips pixels with probability 0.1 before adding small noise.
// Labels cycle 0..9 so every class is equally represented.
inline LabeledDataset synthetic_digits(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw ArgumentError("synthetic_digits: need at least 10 samples");
  constexpr std::size_t kCols = 784;
  Rng rng(seed);
  Rng proto_rng = rng.split(1);
  Rng sample_rng = rng.split(2);
  std::vector<float> prototypes(10 * kCols);
  for (auto& p : prototypes) p = proto_rng.bernoulli(0.3) ? 1.0f : 0.0f;

  LabeledDataset ds;
  ds.rows = n;
  ds.cols = kCols;
  ds.images.resize(n * kCols);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::uint8_t>(i % 10);
    ds.labels[i] = label;
    for (std::size_t j = 0; j < kCols; ++j) {
      float v = prototypes[label * kCols + j];
      if (sample_rng.bernoulli(0.1)) v = 1.0f - v;
      v += static_cast<float>(0.1 * sample_rng.uniform01());
      ds.images[i * kCols + j] = std::min(v, 1.0f);
    }
  }
  return ds;
}

// Seeded shuffle then contiguous assignment. With a test pool present, test
// rows are drawn from the pool and train/val from the remaining rows.
inline LabeledDataset split(LabeledDataset ds, std::size_t train_n, std::size_t val_n, std::size_t test_n,
                            std::uint64_t seed) {
  Rng rng(seed);
  ds.train.clear();
  ds.val.clear();
  ds.test.clear();
  if (ds.test_pool_begin) {
    const std::size_t pool = *ds.test_pool_begin;
    const std::size_t test_pool = ds.rows - pool;
    if (train_n + val_n > pool || test_n > test_pool) {
      throw ArgumentError("split: requested " + std::to_string(train_n) + "/" + std::to_string(val_n) + "/" +
                          std::to_string(test_n) + " but only " + std::to_string(pool) + " training and " +
                          std::to_string(test_pool) + " test rows exist");
    }
    std::vector<std::size_t> a(pool);
    std::iota(a.begin(), a.end(), std::size_t{0});
    rng.split(1).shuffle(std::span<std::size_t>(a));
    std::vector<std::size_t> b(test_pool);
    std::iota(b.begin(), b.end(), pool);
    rng.split(2).shuffle(std::span<std::size_t>(b));
    ds.train.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(train_n));
    ds.val.assign(a.begin() + static_cast<std::ptrdiff_t>(train_n),
                  a.begin() + static_cast<std::ptrdiff_t>(train_n + val_n));
    ds.test.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(test_n));
    return ds;
  }
  if (train_n + val_n + test_n > ds.rows) {
    throw ArgumentError("split: " + std::to_string(train_n + val_n + test_n) + " rows requested, dataset has " +
                        std::to_string(ds.rows));
  }
  std::vector<std::size_t> idx(ds.rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.split(1).shuffle(std::span<std::size_t>(idx));
  auto at = [&](std::size_t k) { return idx.begin() + static_cast<std::ptrdiff_t>(k); };
  ds.train.assign(at(0), at(train_n));
  ds.val.assign(at(train_n), at(train_n + val_n));
  ds.test.assign(at(train_n + val_n), at(train_n + val_n + test_n));
  return ds;
}

}  // namespace sparsenet
