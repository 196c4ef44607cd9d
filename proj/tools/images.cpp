#include "images.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "attnbn/error.hpp"

namespace attnbn::cli {

std::vector<std::uint8_t> heatmap_gray(std::span<const double> map) {
  const double peak = map.empty() ? 0.0 : *std::max_element(map.begin(), map.end());
  std::vector<std::uint8_t> out(map.size(), 0);
  if (!(peak > 0)) return out;
  for (std::size_t i = 0; i < map.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::max(map[i], 0.0) / peak));
  }
  return out;
}

std::vector<std::uint8_t> signed_gray(std::span<const double> map) {
  double peak = 0.0;
  for (double v : map) peak = std::max(peak, std::abs(v));
  std::vector<std::uint8_t> out(map.size(), 128);
  if (!(peak > 0)) return out;
  for (std::size_t i = 0; i < map.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(128.0 + 127.0 * map[i] / peak));
  }
  return out;
}

std::vector<std::uint8_t> overlay_rgb(const scene::RasterStack& raster, std::span<const double> alpha) {
  const std::size_t n = static_cast<std::size_t>(raster.resolution) * raster.resolution;
  if (alpha.size() != n) throw_invalid("overlay: attention map does not match the raster");
  const double peak = *std::max_element(alpha.begin(), alpha.end());
  std::vector<std::uint8_t> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    double base = 0.0;
    for (const auto& ch : raster.channels) base = std::max(base, static_cast<double>(ch[i]));
    const double a = peak > 0 ? 0.5 * alpha[i] / peak : 0.0;
    const double gray = 255.0 * base;
    out[3 * i] = static_cast<std::uint8_t>(std::lround(gray * (1 - a) + 255.0 * a));
    out[3 * i + 1] = static_cast<std::uint8_t>(std::lround(gray * (1 - a)));
    out[3 * i + 2] = static_cast<std::uint8_t>(std::lround(gray * (1 - a)));
  }
  return out;
}

namespace {

void write_netpbm(const std::filesystem::path& path, const char* magic, std::size_t width, std::size_t height,
                  std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write image '" + path.string() + "'");
  out << magic << '\n' << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

}  // namespace

void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> gray) {
  if (gray.size() != width * height) throw_invalid("write_pgm: pixel count mismatch");
  write_netpbm(path, "P5", width, height, gray);
}

void write_ppm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> rgb) {
  if (rgb.size() != 3 * width * height) throw_invalid("write_ppm: pixel count mismatch");
  write_netpbm(path, "P6", width, height, rgb);
}

}  // namespace attnbn::cli
