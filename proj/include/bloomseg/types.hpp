#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bloomseg/error.hpp"

namespace bloomseg {

// Every raster in the library is row-major and addressed as (x, y) = (column, row):
// a Plane has height() rows and width() columns, and plane(y, x) is pixel (x, y).
template <typename T>
using Plane = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PixelIndex {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Half-open pixel rectangle [x0, x0 + width) x [y0, y0 + height).
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;

    bool empty() const noexcept { return width <= 0 || height <= 0; }
    bool contains(int x, int y) const noexcept {
        return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
    }
    long long area() const noexcept { return empty() ? 0 : static_cast<long long>(width) * height; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB image, interleaved and row-major.
class RasterImage {
public:
    RasterImage() = default;

    RasterImage(int width, int height, Rgb fill = {})
        : width_(width), height_(height) {
        check_dims(width, height);
        data_.resize(static_cast<std::size_t>(width) * height * 3);
        for (std::size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = fill.r;
            data_[i + 1] = fill.g;
            data_[i + 2] = fill.b;
        }
    }

    RasterImage(int width, int height, std::vector<std::uint8_t> data)
        : width_(width), height_(height), data_(std::move(data)) {
        check_dims(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
            throw Error(ErrorCode::ShapeMismatch, "RGB buffer length does not match width*height*3");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    long long pixel_count() const noexcept { return static_cast<long long>(width_) * height_; }
    bool empty() const noexcept { return data_.empty(); }

    Rgb at(int x, int y) const noexcept {
        const std::uint8_t* p = data_.data() + offset(x, y);
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) noexcept {
        std::uint8_t* p = data_.data() + offset(x, y);
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> mutable_data() noexcept { return data_; }
    const std::uint8_t* row(int y) const noexcept { return data_.data() + offset(0, y); }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    static void check_dims(int width, int height) {
        if (width < 1 || height < 1) {
            throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
        }
    }
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// One real value per pixel. Values are always finite; construction rejects NaN/Inf.
template <typename Scalar>
class ScoreMapT {
public:
    using PlaneType = Plane<Scalar>;

    ScoreMapT() = default;

    ScoreMapT(int width, int height, Scalar fill = Scalar(0))
        : values_(PlaneType::Constant(height, width, fill)) {
        if (width < 1 || height < 1) {
            throw Error(ErrorCode::InvalidArgument, "score map dimensions must be positive");
        }
        check_finite();
    }

    explicit ScoreMapT(PlaneType values) : values_(std::move(values)) {
        if (values_.size() == 0) {
            throw Error(ErrorCode::InvalidArgument, "score map must not be empty");
        }
        check_finite();
    }

    int width() const noexcept { return static_cast<int>(values_.cols()); }
    int height() const noexcept { return static_cast<int>(values_.rows()); }
    Scalar operator()(int x, int y) const noexcept { return values_(y, x); }
    const PlaneType& values() const noexcept { return values_; }

    bool is_normalized() const noexcept {
        return (values_ >= Scalar(0)).all() && (values_ <= Scalar(1)).all();
    }

    friend bool operator==(const ScoreMapT& a, const ScoreMapT& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               (a.values_ == b.values_).all();
    }

private:
    void check_finite() const {
        if (!values_.isFinite().all()) {
            throw Error(ErrorCode::InvalidArgument, "score map contains NaN or Inf");
        }
    }

    PlaneType values_;
};

using ScoreMap = ScoreMapT<double>;

/// Binary segmentation: 1 = flower, 0 = background.
class SegMask {
public:
    SegMask() = default;

    SegMask(int width, int height, std::uint8_t fill = 0)
        : values_(Plane<std::uint8_t>::Constant(height, width, fill)) {
        if (width < 1 || height < 1) {
            throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive");
        }
        check_binary();
    }

    explicit SegMask(Plane<std::uint8_t> values) : values_(std::move(values)) {
        if (values_.size() == 0) {
            throw Error(ErrorCode::InvalidArgument, "mask must not be empty");
        }
        check_binary();
    }

    int width() const noexcept { return static_cast<int>(values_.cols()); }
    int height() const noexcept { return static_cast<int>(values_.rows()); }
    std::uint8_t operator()(int x, int y) const noexcept { return values_(y, x); }
    const Plane<std::uint8_t>& values() const noexcept { return values_; }
    long long count() const noexcept { return values_.template cast<long long>().sum(); }

    friend bool operator==(const SegMask& a, const SegMask& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               (a.values_ == b.values_).all();
    }

private:
    void check_binary() const {
        if ((values_ > std::uint8_t(1)).any()) {
            throw Error(ErrorCode::InvalidArgument, "mask values must be 0 or 1");
        }
    }

    Plane<std::uint8_t> values_;
};

/// Builds a mask from `map > threshold`.
template <typename Scalar>
SegMask threshold(const ScoreMapT<Scalar>& map, Scalar level) {
    return SegMask((map.values() > level).template cast<std::uint8_t>());
}

} // namespace bloomseg
