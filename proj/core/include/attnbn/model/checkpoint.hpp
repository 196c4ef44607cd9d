#pragma once

#include <cstdint>
#include <filesystem>

#include "attnbn/model/network.hpp"

namespace attnbn::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Seeds and progress that produced a set of weights.
struct SeedLineage {
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t steps = 0;
};

struct LoadedCheckpoint {
  Network network;
  SeedLineage lineage;
};

/// Layout: "ABCK" | u32 version | u32 header_len | header JSON (variant, model
/// config, lineage, parameter names and shapes) | f32 LE payloads | u32 CRC32 of
/// everything before it. Parameters are stored at 32-bit precision.
void save_checkpoint(const Network& network, const SeedLineage& lineage, const std::filesystem::path& path);

/// Errors: kIo, kVersionMismatch, kTruncated, kChecksum, kInvalidArgument when
/// the stored shapes do not match the declared variant.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace attnbn::model
