#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bloomseg/tiler.hpp"

namespace bloomseg {

// Score pair file layout (little-endian):
//   bytes 0-3   magic "BSGS"
//   bytes 4-5   version (u16, currently 1)
//   bytes 6-9   width (u32)
//   bytes 10-13 height (u32)
//   bytes 14-15 reserved (u16, zero)
//   then width*height f32 foreground values, then width*height f32 background values,
//   both row-major.
inline constexpr std::uint16_t kScoreFileVersion = 1;
inline constexpr std::size_t kScoreFileHeaderSize = 16;

std::vector<std::uint8_t> encode_scores(const ScoreMap& foreground, const ScoreMap& background);
ScorePair decode_scores(std::span<const std::uint8_t> bytes);

void write_scores(const std::filesystem::path& path, const ScoreMap& foreground, const ScoreMap& background);
/// Throws MissingScoreFile when the file does not exist, CorruptData on a bad header or length.
ScorePair read_scores(const std::filesystem::path& path);

/// `<image-stem>.tile<index>.bsgs`
std::string tile_score_filename(std::string_view image_stem, int tile_index);

} // namespace bloomseg
