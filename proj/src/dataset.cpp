#include "gknet/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "gknet/image.hpp"

namespace fs = std::filesystem;

namespace gknet {

std::vector<std::size_t> DatasetIndex::class_counts() const {
  std::vector<std::size_t> counts(classes.size(), 0);
  for (const auto& s : samples) ++counts.at(static_cast<std::size_t>(s.label));
  return counts;
}

bool is_image_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

DatasetIndex scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IngestError("dataset root " + root.string() + " is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && entry.path().filename().string().front() != '.') {
      class_dirs.push_back(entry.path());
    }
  }
  if (class_dirs.empty()) throw IngestError("dataset root " + root.string() + " has no class directories");
  std::sort(class_dirs.begin(), class_dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  DatasetIndex index;
  std::vector<std::string> empty;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    index.classes.push_back(class_dirs[c].filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[c])) {
      if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    if (files.empty()) empty.push_back(class_dirs[c].string());
    for (auto& f : files) index.samples.push_back({std::move(f), static_cast<int>(c)});
  }
  if (!empty.empty()) {
    std::string msg = "class directories without images:";
    for (const auto& p : empty) msg += " " + p;
    throw IngestError(msg);
  }
  std::sort(index.samples.begin(), index.samples.end(),
            [](const SampleRef& a, const SampleRef& b) { return a.path < b.path; });
  return index;
}

DatasetSplits stratified_split(const DatasetIndex& index, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val fraction must lie in [0,1)");
  DatasetSplits out;
  out.train.classes = index.classes;
  out.val.classes = index.classes;
  std::vector<std::vector<std::size_t>> by_class(index.classes.size());
  for (std::size_t i = 0; i < index.samples.size(); ++i) {
    by_class.at(static_cast<std::size_t>(index.samples[i].label)).push_back(i);
  }
  std::vector<bool> is_val(index.samples.size(), false);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(members.size())));
    if (val_fraction > 0.0 && members.size() >= 2) take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    for (std::size_t k = 0; k < take; ++k) is_val[members[k]] = true;
  }
  for (std::size_t i = 0; i < index.samples.size(); ++i) {
    (is_val[i] ? out.val : out.train).samples.push_back(index.samples[i]);
  }
  return out;
}

DatasetSplits load_splits(const fs::path& root, double val_fraction, std::uint64_t seed) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IngestError("dataset root " + root.string() + " is not a directory");
  if (fs::is_directory(root / "train", ec) && fs::is_directory(root / "val", ec)) {
    DatasetSplits out;
    out.presplit = true;
    out.train = scan_dataset(root / "train");
    out.val = scan_dataset(root / "val");
    if (out.train.classes != out.val.classes) {
      throw IngestError("train/ and val/ under " + root.string() + " list different classes");
    }
    return out;
  }
  return stratified_split(scan_dataset(root), val_fraction, seed);
}

PreprocessMode parse_preprocess(std::string_view name) {
  if (name == "rescale") return PreprocessMode::kRescale;
  if (name == "samplewise" || name == "samplewise_center_std") return PreprocessMode::kSamplewise;
  throw ConfigError("unknown preprocessing mode '" + std::string(name) + "'");
}

std::string preprocess_name(PreprocessMode mode) {
  return mode == PreprocessMode::kRescale ? "rescale" : "samplewise";
}

Tensor preprocess(const Tensor& image, PreprocessMode mode) {
  if (mode == PreprocessMode::kRescale) return scale(image, 1.0 / 255.0);
  const double n = static_cast<double>(image.size());
  double mean = 0.0;
  for (double v : image.data()) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : image.data()) var += (v - mean) * (v - mean);
  const double sd = std::max(std::sqrt(var / n), kMinSampleStd);
  Tensor out = image;
  for (double& v : out.data()) v = (v - mean) / sd;
  return out;
}

Tensor load_sample(const fs::path& path, const LoadOptions& options) {
  Tensor img = convert_channels(decode_image(path), options.channels);
  img = resize_bilinear(img, options.resolution);
  return preprocess(img, options.preprocess);
}

Dataset Dataset::from_index(DatasetIndex index, LoadOptions options) {
  Dataset d;
  d.classes_ = std::move(index.classes);
  d.options_ = options;
  for (auto& s : index.samples) {
    d.paths_.push_back(std::move(s.path));
    d.labels_.push_back(s.label);
  }
  return d;
}

Dataset Dataset::from_tensors(std::vector<std::string> classes, std::vector<Tensor> images,
                              std::vector<int> labels) {
  if (images.size() != labels.size()) throw ShapeError("image and label counts differ");
  for (const auto& img : images) {
    if (img.shape() != images.front().shape()) throw ShapeError("in-memory images differ in shape");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes.size()) throw ConfigError("label out of range");
  }
  Dataset d;
  d.classes_ = std::move(classes);
  d.images_ = std::move(images);
  d.labels_ = std::move(labels);
  return d;
}

Shape Dataset::sample_shape() const {
  if (!images_.empty()) return images_.front().shape();
  return {options_.channels, options_.resolution, options_.resolution};
}

Tensor Dataset::sample(std::size_t i) const {
  if (i >= labels_.size()) throw ShapeError("sample index out of range");
  if (!images_.empty()) return images_[i];
  return load_sample(paths_[i], options_);
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch, bool shuffle) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

BatchIterator::BatchIterator(const Dataset& data, std::size_t batch_size, std::uint64_t seed,
                             std::uint64_t epoch, bool shuffle)
    : data_(&data), batch_size_(batch_size), order_(epoch_order(data.size(), seed, epoch, shuffle)) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
}

std::size_t BatchIterator::batch_count() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

std::optional<Batch> BatchIterator::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t count = std::min(batch_size_, order_.size() - cursor_);
  const Shape sample = data_->sample_shape();
  const std::size_t block = shape_size(sample);
  Shape shape{count};
  shape.insert(shape.end(), sample.begin(), sample.end());
  Batch batch{Tensor(shape), {}, {}};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = order_[cursor_ + k];
    const Tensor img = data_->sample(idx);
    if (img.size() != block) throw ShapeError("sample " + std::to_string(idx) + " has an unexpected shape");
    std::copy(img.data().begin(), img.data().end(), batch.images.data().begin() + static_cast<std::ptrdiff_t>(k * block));
    batch.labels.push_back(data_->label(idx));
    batch.indices.push_back(idx);
  }
  cursor_ += count;
  return batch;
}

}  // namespace gknet
