#include "attnbn/model/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "attnbn/error.hpp"

namespace attnbn::model {

namespace {

constexpr char kMagic[4] = {'A', 'B', 'C', 'K'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

nlohmann::json config_json(const ModelConfig& c) {
  return {{"input_channels", c.input_channels}, {"dense_channels", c.dense_channels},
          {"object_channels", c.object_channels}, {"resolution", c.resolution},
          {"feature_dim", c.feature_dim},       {"stem_dim", c.stem_dim},
          {"bottleneck_dim", c.bottleneck_dim}, {"mlp_hidden", c.mlp_hidden},
          {"rnn_hidden", c.rnn_hidden},         {"horizon", c.horizon},
          {"field_of_view_m", c.field_of_view_m},
          {"pool", c.pool == PoolMode::kMean ? "mean" : "sum"}};
}

ModelConfig config_from(const nlohmann::json& j) {
  ModelConfig c;
  c.input_channels = j.at("input_channels");
  c.dense_channels = j.at("dense_channels");
  c.object_channels = j.at("object_channels");
  c.resolution = j.at("resolution");
  c.feature_dim = j.at("feature_dim");
  c.stem_dim = j.at("stem_dim");
  c.bottleneck_dim = j.at("bottleneck_dim");
  c.mlp_hidden = j.at("mlp_hidden");
  c.rnn_hidden = j.at("rnn_hidden");
  c.horizon = j.at("horizon");
  c.field_of_view_m = j.at("field_of_view_m");
  const std::string pool = j.at("pool");
  if (pool != "mean" && pool != "sum") throw_invalid("unknown pool mode '" + pool + "'");
  c.pool = pool == "mean" ? PoolMode::kMean : PoolMode::kSum;
  return c;
}

}  // namespace

void save_checkpoint(const Network& network, const SeedLineage& lineage, const std::filesystem::path& path) {
  const auto& params = network.parameters();
  nlohmann::json header;
  header["variant"] = network.variant().to_string();
  header["model"] = config_json(network.config());
  header["lineage"] = {{"init_seed", lineage.init_seed}, {"train_seed", lineage.train_seed},
                       {"steps", lineage.steps}};
  auto& list = header["parameters"] = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    list.push_back({{"name", params.name(i)}, {"shape", params[i].shape()}});
  }
  const std::string text = header.dump();

  std::vector<unsigned char> buf(std::begin(kMagic), std::end(kMagic));
  put_u32(buf, kCheckpointVersion);
  put_u32(buf, static_cast<std::uint32_t>(text.size()));
  buf.insert(buf.end(), text.begin(), text.end());
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double v : params[i].values()) put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  put_u32(buf, crc_of(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint '" + path.string() + "'");
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto truncated = [&](const char* what) {
    return Error(ErrorCode::kTruncated, std::string("checkpoint truncated: ") + what);
  };
  if (buf.size() < 12) throw truncated("prefix");
  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw Error(ErrorCode::kIo, "not a checkpoint file (bad magic)");
  const std::uint32_t version = get_u32(buf.data() + 4);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                 ", reader supports " + std::to_string(kCheckpointVersion));
  }
  const std::uint32_t len = get_u32(buf.data() + 8);
  if (buf.size() < 12 + static_cast<std::size_t>(len) + 4) throw truncated("header");

  nlohmann::json header;
  VariantConfig variant;
  ModelConfig config;
  SeedLineage lineage;
  std::vector<std::pair<std::string, num::Shape>> declared;
  try {
    header = nlohmann::json::parse(buf.begin() + 12, buf.begin() + 12 + len);
    variant = VariantConfig::parse(header.at("variant").get<std::string>());
    config = config_from(header.at("model"));
    const auto& lin = header.at("lineage");
    lineage = {lin.at("init_seed"), lin.at("train_seed"), lin.at("steps")};
    for (const auto& p : header.at("parameters")) {
      declared.emplace_back(p.at("name").get<std::string>(), p.at("shape").get<num::Shape>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed checkpoint header: ") + e.what());
  }

  std::size_t floats = 0;
  for (const auto& d : declared) floats += num::numel(d.second);
  const std::size_t expected = 12 + len + floats * 4 + 4;
  if (buf.size() < expected) throw truncated("parameter payload");
  if (buf.size() > expected) throw Error(ErrorCode::kIo, "checkpoint has trailing bytes");
  if (crc_of(buf.data(), expected - 4) != get_u32(buf.data() + expected - 4)) {
    throw Error(ErrorCode::kChecksum, "checkpoint CRC32 mismatch");
  }

  num::ParameterSet params;
  const unsigned char* p = buf.data() + 12 + len;
  for (const auto& [name, shape] : declared) {
    std::vector<double> values(num::numel(shape));
    for (auto& v : values) {
      v = static_cast<double>(std::bit_cast<float>(get_u32(p)));
      p += 4;
    }
    params.add(name, num::Tensor::parameter(shape, std::move(values)));
  }
  return {Network(variant, config, std::move(params)), lineage};
}

}  // namespace attnbn::model
