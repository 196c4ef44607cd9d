// Binary layout (all integers and floats little-endian):
//   "ABDS" | u32 version | u32 header_len | header JSON
//   per record: u32 kind | u64 seed | f32 waypoints[K][3] | f32 past[P][3]
//               | f32 raster[C][R][R] | f32 occupancy[K][R][R] | u32 crc32(record)

#include "attnbn/scene/dataset.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <json.hpp>

#include "attnbn/error.hpp"

namespace attnbn::scene {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'B', 'D', 'S'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f32(std::vector<unsigned char>& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(n)));
}

std::uint64_t record_size(const DatasetHeader& h) {
  const std::uint64_t cells = static_cast<std::uint64_t>(h.grid.resolution) * h.grid.resolution;
  const std::uint64_t floats = h.horizon * 3 + h.past_steps * 3 + (h.channels.size() + h.horizon) * cells;
  return 4 + 8 + floats * 4 + 4;
}

std::string header_json(const DatasetHeader& h) {
  nlohmann::json j;
  j["version"] = h.version;
  j["grid"] = {{"field_of_view_m", h.grid.field_of_view_m}, {"resolution", h.grid.resolution}};
  j["channels"] = h.channels;
  j["dense_channels"] = h.dense_channels;
  j["horizon"] = h.horizon;
  j["past_steps"] = h.past_steps;
  j["step_seconds"] = h.step_seconds;
  j["count"] = h.count;
  return j.dump();
}

void encode(const Example& ex, const DatasetHeader& h, std::vector<unsigned char>& out) {
  const std::size_t cells = static_cast<std::size_t>(h.grid.resolution) * h.grid.resolution;
  if (ex.raster.names != h.channels || ex.raster.resolution != h.grid.resolution) {
    throw_invalid("write_dataset: example raster does not match the dataset grid/channels");
  }
  if (ex.expert_future.size() != h.horizon || ex.agent_past.size() != h.past_steps ||
      ex.future_object_occupancy.size() != h.horizon) {
    throw_invalid("write_dataset: example sequence lengths do not match K / past steps");
  }
  const std::size_t start = out.size();
  put_u32(out, static_cast<std::uint32_t>(ex.kind));
  put_u64(out, ex.seed);
  for (const auto* poses : {&ex.expert_future, &ex.agent_past}) {
    for (const auto& p : *poses) {
      put_f32(out, p.position.x);
      put_f32(out, p.position.y);
      put_f32(out, p.heading);
    }
  }
  auto put_grid = [&](const Grid& g) {
    if (g.size() != cells) throw_invalid("write_dataset: grid has wrong cell count");
    for (float v : g) put_u32(out, std::bit_cast<std::uint32_t>(v));
  };
  for (const auto& g : ex.raster.channels) put_grid(g);
  for (const auto& g : ex.future_object_occupancy) put_grid(g);
  put_u32(out, crc_of(out.data() + start, out.size() - start));
}

Example decode(const unsigned char* p, const DatasetHeader& h, std::size_t index) {
  const std::uint64_t n = record_size(h);
  const std::uint32_t stored = get_u32(p + n - 4);
  if (crc_of(p, n - 4) != stored) {
    throw ChecksumError(index, "dataset record " + std::to_string(index) + " failed its CRC32 check");
  }
  Example ex;
  ex.kind = scenario_kind_from_index(get_u32(p));
  ex.seed = get_u64(p + 4);
  p += 12;
  auto read_poses = [&](std::vector<Pose>& out, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i, p += 12) {
      out.push_back({{get_f32(p), get_f32(p + 4)}, get_f32(p + 8)});
    }
  };
  read_poses(ex.expert_future, h.horizon);
  read_poses(ex.agent_past, h.past_steps);
  const std::size_t cells = static_cast<std::size_t>(h.grid.resolution) * h.grid.resolution;
  auto read_grid = [&] {
    Grid g(cells);
    for (std::size_t i = 0; i < cells; ++i, p += 4) g[i] = get_f32(p);
    return g;
  };
  ex.raster.resolution = h.grid.resolution;
  ex.raster.names = h.channels;
  ex.raster.dense_subset_names = h.dense_channels;
  for (std::size_t c = 0; c < h.channels.size(); ++c) ex.raster.channels.push_back(read_grid());
  for (std::size_t k = 0; k < h.horizon; ++k) ex.future_object_occupancy.push_back(read_grid());
  return ex;
}

[[noreturn]] void truncated(const std::string& what) {
  throw Error(ErrorCode::kTruncated, "dataset truncated: " + what);
}

DatasetHeader read_header(std::ifstream& in, std::uint64_t& data_offset) {
  std::array<unsigned char, 12> prefix{};
  in.read(reinterpret_cast<char*>(prefix.data()), prefix.size());
  if (in.gcount() != static_cast<std::streamsize>(prefix.size())) truncated("missing file prefix");
  if (std::memcmp(prefix.data(), kMagic.data(), 4) != 0) {
    throw Error(ErrorCode::kIo, "not a dataset file (bad magic)");
  }
  const std::uint32_t version = get_u32(prefix.data() + 4);
  if (version != kDatasetVersion) {
    throw Error(ErrorCode::kVersionMismatch, "dataset version " + std::to_string(version) +
                                                 ", reader supports " + std::to_string(kDatasetVersion));
  }
  const std::uint32_t len = get_u32(prefix.data() + 8);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len)) truncated("header");
  DatasetHeader h;
  try {
    const auto j = nlohmann::json::parse(text);
    h.version = version;
    h.grid.field_of_view_m = j.at("grid").at("field_of_view_m").get<double>();
    h.grid.resolution = j.at("grid").at("resolution").get<int>();
    h.channels = j.at("channels").get<std::vector<std::string>>();
    h.dense_channels = j.at("dense_channels").get<std::vector<std::string>>();
    h.horizon = j.at("horizon").get<std::size_t>();
    h.past_steps = j.at("past_steps").get<std::size_t>();
    h.step_seconds = j.at("step_seconds").get<double>();
    h.count = j.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed dataset header: ") + e.what());
  }
  h.grid.validate();
  data_offset = 12 + len;
  return h;
}

}  // namespace

void write_dataset(std::span<const Example> examples, const GridConfig& grid,
                   const std::filesystem::path& path) {
  grid.validate();
  DatasetHeader h;
  h.grid = grid;
  h.channels = channel_names();
  h.dense_channels = dense_channel_names();
  h.count = examples.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  const std::string text = header_json(h);
  std::vector<unsigned char> buf(kMagic.begin(), kMagic.end());
  put_u32(buf, h.version);
  put_u32(buf, static_cast<std::uint32_t>(text.size()));
  buf.insert(buf.end(), text.begin(), text.end());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  for (const auto& ex : examples) {
    buf.clear();
    encode(ex, h, buf);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

DatasetReader::DatasetReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::kIo, "cannot open dataset '" + path.string() + "'");
  header_ = read_header(in_, data_offset_);
  record_bytes_ = record_size(header_);
  in_.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in_.tellg());
  if (file_size < data_offset_ + record_bytes_ * header_.count) {
    truncated("expected " + std::to_string(header_.count) + " records");
  }
}

Example DatasetReader::read(std::size_t index) {
  if (index >= header_.count) throw_invalid("dataset index " + std::to_string(index) + " out of range");
  std::vector<unsigned char> buf(record_bytes_);
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(data_offset_ + record_bytes_ * index));
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buf.size())) truncated("record " + std::to_string(index));
  return decode(buf.data(), header_, index);
}

std::vector<Example> read_dataset(const std::filesystem::path& path) {
  DatasetReader reader(path);
  std::vector<Example> out;
  out.reserve(reader.size());
  for (std::size_t i = 0; i < reader.size(); ++i) out.push_back(reader.read(i));
  return out;
}

}  // namespace attnbn::scene
