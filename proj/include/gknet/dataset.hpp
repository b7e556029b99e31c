#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gknet/tensor.hpp"

namespace gknet {

struct SampleRef {
  std::filesystem::path path;
  int label = 0;
  friend bool operator==(const SampleRef&, const SampleRef&) = default;
};

/// Labelled file list for one split; classes in alphabetical order, samples
/// sorted by path.
struct DatasetIndex {
  std::vector<std::string> classes;
  std::vector<SampleRef> samples;

  std::vector<std::size_t> class_counts() const;
  friend bool operator==(const DatasetIndex&, const DatasetIndex&) = default;
};

struct DatasetSplits {
  DatasetIndex train;
  DatasetIndex val;
  bool presplit = false;  // true when root/train and root/val were used as-is
};

/// True for .png, .pgm and .ppm (case-insensitive).
bool is_image_file(const std::filesystem::path& path);

/// Index a root holding one subdirectory per class. Throws IngestError for
/// a missing root, a root without class directories, or class directories
/// with no images (all offending paths are listed).
DatasetIndex scan_dataset(const std::filesystem::path& root);

/// Seeded per-class split; each class with at least two samples keeps at
/// least one on each side.
DatasetSplits stratified_split(const DatasetIndex& index, double val_fraction, std::uint64_t seed);

/// Honour root/train + root/val when both exist, otherwise split the flat
/// class tree with stratified_split().
DatasetSplits load_splits(const std::filesystem::path& root, double val_fraction, std::uint64_t seed);

enum class PreprocessMode { kRescale, kSamplewise };

PreprocessMode parse_preprocess(std::string_view name);
std::string preprocess_name(PreprocessMode mode);

/// Lower bound on the per-image std under samplewise normalisation.
inline constexpr double kMinSampleStd = 1e-8;

/// rescale: x / 255. samplewise: (x - mean) / max(std, 1e-8) over the whole image.
Tensor preprocess(const Tensor& image, PreprocessMode mode);

struct LoadOptions {
  std::size_t channels = 1;
  std::size_t resolution = 224;
  PreprocessMode preprocess = PreprocessMode::kRescale;
};

/// decode -> channel conversion -> bilinear resize -> preprocess.
Tensor load_sample(const std::filesystem::path& path, const LoadOptions& options);

/// Samples addressable by position: either files decoded on demand or
/// tensors held in memory (already preprocessed).
class Dataset {
 public:
  static Dataset from_index(DatasetIndex index, LoadOptions options);
  static Dataset from_tensors(std::vector<std::string> classes, std::vector<Tensor> images,
                              std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t class_count() const { return classes_.size(); }
  const std::vector<std::string>& classes() const { return classes_; }
  int label(std::size_t i) const { return labels_.at(i); }
  const std::vector<int>& labels() const { return labels_; }
  Shape sample_shape() const;
  Tensor sample(std::size_t i) const;

 private:
  std::vector<std::string> classes_;
  std::vector<int> labels_;
  std::vector<std::filesystem::path> paths_;
  std::vector<Tensor> images_;
  LoadOptions options_;
};

struct Batch {
  Tensor images;               // [B, C, H, W]
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

/// Epoch permutation of [0, n): identity when shuffle is off, otherwise
/// drawn from a generator seeded with (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch, bool shuffle);

/// Single-pass stream of batches over one epoch; the last batch may be short.
class BatchIterator {
 public:
  BatchIterator(const Dataset& data, std::size_t batch_size, std::uint64_t seed,
                std::uint64_t epoch = 0, bool shuffle = true);

  std::optional<Batch> next();
  std::size_t batch_count() const;
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  const Dataset* data_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace gknet
