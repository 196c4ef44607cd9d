#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "attnbn/scene/raster.hpp"

namespace attnbn::scene {

inline constexpr std::uint32_t kDatasetVersion = 1;

struct DatasetHeader {
  std::uint32_t version = kDatasetVersion;
  GridConfig grid;
  std::vector<std::string> channels;
  std::vector<std::string> dense_channels;
  std::size_t horizon = kHorizon;
  std::size_t past_steps = kPastSteps;
  double step_seconds = kStepSeconds;
  std::size_t count = 0;
};

/// Writes examples rendered on `grid`. Throws kIo when the file cannot be written
/// and kInvalidArgument when an example does not match the grid or channel layout.
void write_dataset(std::span<const Example> examples, const GridConfig& grid,
                   const std::filesystem::path& path);

/// Reads every record. Errors: kIo (unopenable), kVersionMismatch, kTruncated,
/// ChecksumError (carries the failing record index).
std::vector<Example> read_dataset(const std::filesystem::path& path);

/// Random access over a dataset file; records have a fixed size.
class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& path);

  const DatasetHeader& header() const { return header_; }
  std::size_t size() const { return header_.count; }
  Example read(std::size_t index);

 private:
  std::ifstream in_;
  DatasetHeader header_;
  std::uint64_t data_offset_ = 0;
  std::uint64_t record_bytes_ = 0;
};

}  // namespace attnbn::scene
