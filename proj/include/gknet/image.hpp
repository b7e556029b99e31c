#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gknet/tensor.hpp"

namespace gknet {

/// Decode an 8-bit grayscale or RGB image (PNG, binary PGM "P5", binary PPM
/// "P6") into a [C,H,W] tensor with values 0..255, C in {1,3}. Alpha
/// channels are dropped; palette PNGs expand to RGB; 16-bit samples keep
/// their high byte. Throws DecodeError on unsupported or truncated input.
Tensor decode_image(const std::filesystem::path& path);
Tensor decode_image_bytes(std::span<const std::uint8_t> bytes);

Tensor decode_png(std::span<const std::uint8_t> bytes);
Tensor decode_pnm(std::span<const std::uint8_t> bytes);

/// Lossless encoders for [1,H,W] or [3,H,W] tensors; values are rounded and
/// clamped to 0..255.
std::vector<std::uint8_t> encode_png(const Tensor& image);
std::vector<std::uint8_t> encode_pnm(const Tensor& image);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Corner-aligned bilinear resampling of [C,H,W] to [C,target,target].
Tensor resize_bilinear(const Tensor& image, std::size_t target);
Tensor resize_bilinear(const Tensor& image, std::size_t target_h, std::size_t target_w);

/// RGB -> gray uses luma weights 0.299/0.587/0.114; gray -> RGB replicates.
Tensor convert_channels(const Tensor& image, std::size_t channels);

}  // namespace gknet
