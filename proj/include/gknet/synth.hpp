#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gknet/tensor.hpp"

namespace gknet {

/// Maximum number of distinct synthetic generators.
inline constexpr std::size_t kSynthMaxClasses = 5;

/// Directory names for the generators, in class-id order (they sort
/// alphabetically in the same order).
const std::vector<std::string>& synth_class_names();

struct SynthOptions {
  std::size_t per_class = 100;
  std::size_t val_per_class = 0;  // > 0 writes train/ and val/ subtrees
  std::size_t classes = 3;
  std::size_t resolution = 64;
  std::uint64_t seed = 42;
  double noise_sigma = 10.0;
};

/// One [1,R,R] image with values rounded and clamped to 0..255.
/// class 0: bright centred disk, 1: horizontal bands, 2: diagonal gradient,
/// 3: vertical bands, 4: checkerboard. noise_sigma 0 gives the clean pattern.
Tensor synth_image(std::size_t class_id, std::size_t resolution, std::mt19937_64& rng, double noise_sigma);

/// Write the corpus as binary PGM files; returns the number of files written.
std::size_t synth_dataset(const std::filesystem::path& root, const SynthOptions& options);

}  // namespace gknet
