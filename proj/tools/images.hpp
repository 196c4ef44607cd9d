#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "attnbn/scene/raster.hpp"

namespace attnbn::cli {

/// round(255 * v / max v); all zeros when the map has no positive entry.
std::vector<std::uint8_t> heatmap_gray(std::span<const double> map);
/// 128 + 127 * v / max |v|, so zero maps to mid-gray.
std::vector<std::uint8_t> signed_gray(std::span<const double> map);
/// Raster flattened by channel max in gray, attention tinted red at 50% opacity.
std::vector<std::uint8_t> overlay_rgb(const scene::RasterStack& raster, std::span<const double> alpha);

void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> gray);
void write_ppm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> rgb);

}  // namespace attnbn::cli
