#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bloomseg/types.hpp"

namespace bloomseg {

/// Decodes a PNG or JPEG file into 8-bit RGB. 16-bit sources are downconverted.
/// Throws UnreadableFile, UnsupportedFormat or CorruptData.
RasterImage load_image(const std::filesystem::path& path);

/// Same as load_image, from an in-memory encoded buffer.
RasterImage decode_image(std::span<const std::uint8_t> bytes);

/// Single-channel PNG, 0 -> 0 and 1 -> 255.
std::vector<std::uint8_t> encode_mask_png(const SegMask& mask);
void save_mask(const SegMask& mask, const std::filesystem::path& path);

/// Any gray level above 127 reads as 1.
SegMask load_mask(const std::filesystem::path& path);
SegMask decode_mask(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_image_png(const RasterImage& image);
void save_image(const RasterImage& image, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace bloomseg
