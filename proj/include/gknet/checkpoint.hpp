#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gknet/network.hpp"

namespace gknet {

inline constexpr char kCheckpointMagic[] = "GKPT1";

/// Binary layout (all integers little-endian):
///   "GKPT1"                       5 bytes
///   u64 seed
///   u64 n, n bytes                model spec text (render_model_spec)
///   u64 k, then k x (u64 n, n bytes)  class names
///   u64 n, n bytes                generator state (textual mt19937_64 state)
///   u64 t, then t tensors: u32 rank, rank x u64 extent, size x f64 (IEEE-754 bits)
std::vector<std::uint8_t> serialize_checkpoint(const Network& network);
Network deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Network& network, const std::filesystem::path& path);
/// Throws CheckpointError for unreadable, truncated or foreign files.
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace gknet
