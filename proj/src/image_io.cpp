#include "bloomseg/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>

namespace bloomseg {

namespace {

enum class Container { Png, Jpeg };

constexpr std::array<std::uint8_t, 8> kPngMagic = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
constexpr std::array<std::uint8_t, 8> kPngTrailer = {'I', 'E', 'N', 'D', 0xAE, 0x42, 0x60, 0x82};

Container sniff(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= kPngMagic.size() && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
        return Container::Png;
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
        return Container::Jpeg;
    }
    throw Error(ErrorCode::UnsupportedFormat, "not a PNG or JPEG stream");
}

// libjpeg silently gray-fills truncated scans, so look for the end markers ourselves.
void check_complete(Container kind, std::span<const std::uint8_t> bytes) {
    if (kind == Container::Png) {
        auto tail = bytes.last(std::min<std::size_t>(bytes.size(), 64));
        if (std::search(tail.begin(), tail.end(), kPngTrailer.begin(), kPngTrailer.end()) == tail.end()) {
            throw Error(ErrorCode::CorruptData, "PNG stream has no IEND chunk (truncated?)");
        }
        return;
    }
    auto tail = bytes.last(std::min<std::size_t>(bytes.size(), 4096));
    for (std::size_t i = tail.size(); i-- > 1;) {
        if (tail[i - 1] == 0xFF && tail[i] == 0xD9) return;
    }
    throw Error(ErrorCode::CorruptData, "JPEG stream has no EOI marker (truncated?)");
}

cv::Mat decode(std::span<const std::uint8_t> bytes, int flags) {
    const Container kind = sniff(bytes);
    check_complete(kind, bytes);
    const cv::Mat buffer(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat decoded;
    try {
        decoded = cv::imdecode(buffer, flags);
    } catch (const cv::Exception& e) {
        throw Error(ErrorCode::CorruptData, e.what());
    }
    if (decoded.empty()) {
        throw Error(ErrorCode::CorruptData, "decoder rejected the stream");
    }
    if (decoded.depth() != CV_8U) {
        cv::Mat narrowed;
        decoded.convertTo(narrowed, CV_8U, decoded.depth() == CV_16U ? 1.0 / 257.0 : 255.0);
        decoded = narrowed;
    }
    return decoded;
}

std::vector<std::uint8_t> encode_png(const cv::Mat& mat) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", mat, out)) {
        throw Error(ErrorCode::IoFailure, "PNG encoding failed");
    }
    return out;
}

} // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::UnreadableFile, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::UnreadableFile, "read error on " + path.string());
    }
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoFailure, "write error on " + path.string());
    }
}

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
    const cv::Mat bgr = decode(bytes, cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
    RasterImage image(bgr.cols, bgr.rows);
    auto out = image.mutable_data();
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* src = bgr.ptr<cv::Vec3b>(y);
        std::uint8_t* dst = out.data() + static_cast<std::size_t>(y) * bgr.cols * 3;
        for (int x = 0; x < bgr.cols; ++x) {
            dst[3 * x] = src[x][2];
            dst[3 * x + 1] = src[x][1];
            dst[3 * x + 2] = src[x][0];
        }
    }
    return image;
}

RasterImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return decode_image(bytes);
}

std::vector<std::uint8_t> encode_mask_png(const SegMask& mask) {
    cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x) {
            row[x] = mask(x, y) ? 255 : 0;
        }
    }
    return encode_png(gray);
}

void save_mask(const SegMask& mask, const std::filesystem::path& path) {
    write_file_bytes(path, encode_mask_png(mask));
}

SegMask decode_mask(std::span<const std::uint8_t> bytes) {
    const cv::Mat gray = decode(bytes, cv::IMREAD_GRAYSCALE);
    Plane<std::uint8_t> values(gray.rows, gray.cols);
    for (int y = 0; y < gray.rows; ++y) {
        const auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < gray.cols; ++x) {
            values(y, x) = row[x] > 127 ? 1 : 0;
        }
    }
    return SegMask(std::move(values));
}

SegMask load_mask(const std::filesystem::path& path) {
    return decode_mask(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_image_png(const RasterImage& image) {
    cv::Mat bgr(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        const std::uint8_t* src = image.row(y);
        auto* dst = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width(); ++x) {
            dst[x] = cv::Vec3b(src[3 * x + 2], src[3 * x + 1], src[3 * x]);
        }
    }
    return encode_png(bgr);
}

void save_image(const RasterImage& image, const std::filesystem::path& path) {
    write_file_bytes(path, encode_image_png(image));
}

} // namespace bloomseg
