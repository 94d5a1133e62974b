#include "bloomseg/scoremap_io.hpp"

#include <cmath>
#include <cstring>

#include "bloomseg/image_io.hpp"

namespace bloomseg {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
    }
    return static_cast<T>(v);
}

void put_plane(std::vector<std::uint8_t>& out, const Plane<double>& values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const auto f = static_cast<float>(values.data()[i]);
        std::uint32_t bits = 0;
        std::memcpy(&bits, &f, sizeof bits);
        put_le(out, bits);
    }
}

Plane<double> get_plane(std::span<const std::uint8_t> bytes, std::size_t offset, int width, int height) {
    Plane<double> values(height, width);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const auto bits = get_le<std::uint32_t>(bytes, offset + static_cast<std::size_t>(i) * 4);
        float f = 0.0f;
        std::memcpy(&f, &bits, sizeof f);
        if (!std::isfinite(f)) {
            throw Error(ErrorCode::CorruptData, "score file contains a non-finite value");
        }
        values.data()[i] = f;
    }
    return values;
}

} // namespace

std::vector<std::uint8_t> encode_scores(const ScoreMap& foreground, const ScoreMap& background) {
    if (foreground.width() != background.width() || foreground.height() != background.height()) {
        throw Error(ErrorCode::ShapeMismatch, "foreground and background maps differ in size");
    }
    const auto n = static_cast<std::size_t>(foreground.width()) * foreground.height();
    std::vector<std::uint8_t> out;
    out.reserve(kScoreFileHeaderSize + 8 * n);
    for (const char c : {'B', 'S', 'G', 'S'}) out.push_back(static_cast<std::uint8_t>(c));
    put_le<std::uint16_t>(out, kScoreFileVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(foreground.width()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(foreground.height()));
    put_le<std::uint16_t>(out, 0);
    put_plane(out, foreground.values());
    put_plane(out, background.values());
    return out;
}

ScorePair decode_scores(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kScoreFileHeaderSize || std::memcmp(bytes.data(), "BSGS", 4) != 0) {
        throw Error(ErrorCode::CorruptData, "missing BSGS header");
    }
    const auto version = get_le<std::uint16_t>(bytes, 4);
    if (version != kScoreFileVersion) {
        throw Error(ErrorCode::CorruptData, "unsupported score file version " + std::to_string(version));
    }
    const auto width = get_le<std::uint32_t>(bytes, 6);
    const auto height = get_le<std::uint32_t>(bytes, 10);
    if (width == 0 || height == 0 || width > 1u << 20 || height > 1u << 20) {
        throw Error(ErrorCode::CorruptData, "implausible score map dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (bytes.size() != kScoreFileHeaderSize + 8 * n) {
        throw Error(ErrorCode::CorruptData, "score file length does not match its header");
    }
    const int w = static_cast<int>(width);
    const int h = static_cast<int>(height);
    return {ScoreMap(get_plane(bytes, kScoreFileHeaderSize, w, h)),
            ScoreMap(get_plane(bytes, kScoreFileHeaderSize + 4 * n, w, h))};
}

void write_scores(const std::filesystem::path& path, const ScoreMap& foreground, const ScoreMap& background) {
    write_file_bytes(path, encode_scores(foreground, background));
}

ScorePair read_scores(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::MissingScoreFile, path.string());
    }
    return decode_scores(read_file_bytes(path));
}

std::string tile_score_filename(std::string_view image_stem, int tile_index) {
    return std::string(image_stem) + ".tile" + std::to_string(tile_index) + ".bsgs";
}

} // namespace bloomseg
