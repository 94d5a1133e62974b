#include "bloomseg/hsv.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bloomseg {

Hsv rgb_to_hsv(Rgb pixel) noexcept {
    const int r = pixel.r;
    const int g = pixel.g;
    const int b = pixel.b;
    const int hi = std::max({r, g, b});
    const int lo = std::min({r, g, b});
    const int delta = hi - lo;

    Hsv out;
    out.v = hi / 255.0;
    out.s = hi == 0 ? 0.0 : static_cast<double>(delta) / hi;
    if (delta == 0) {
        out.h = 0.0;
    } else if (hi == r) {
        out.h = 60.0 * static_cast<double>(g - b) / delta;
        if (out.h < 0.0) out.h += 360.0;
    } else if (hi == g) {
        out.h = 60.0 * (static_cast<double>(b - r) / delta + 2.0);
    } else {
        out.h = 60.0 * (static_cast<double>(r - g) / delta + 4.0);
    }
    return out;
}

void HsvThresholds::validate() const {
    auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
    if (!in(hue_lo, 0.0, 360.0) || !in(hue_hi, 0.0, 360.0)) {
        throw Error(ErrorCode::InvalidArgument, "hue bounds must lie in [0, 360]");
    }
    if (!in(sat_lo, 0.0, 1.0) || !in(sat_hi, 0.0, 1.0) || sat_lo > sat_hi) {
        throw Error(ErrorCode::InvalidArgument, "saturation bounds must satisfy 0 <= lo <= hi <= 1");
    }
    if (!in(val_lo, 0.0, 1.0) || !in(val_hi, 0.0, 1.0) || val_lo > val_hi) {
        throw Error(ErrorCode::InvalidArgument, "value bounds must satisfy 0 <= lo <= hi <= 1");
    }
    if (min_region_area < 0) {
        throw Error(ErrorCode::InvalidArgument, "minimum region area must be non-negative");
    }
}

bool HsvThresholds::contains(const Hsv& hsv) const noexcept {
    const bool hue_ok = hue_lo <= hue_hi ? (hsv.h >= hue_lo && hsv.h <= hue_hi)
                                         : (hsv.h >= hue_lo || hsv.h <= hue_hi);
    return hue_ok && hsv.s >= sat_lo && hsv.s <= sat_hi && hsv.v >= val_lo && hsv.v <= val_hi;
}

Components label_components(const Plane<std::uint8_t>& binary) {
    const int h = static_cast<int>(binary.rows());
    const int w = static_cast<int>(binary.cols());
    Components out;
    out.labels = Plane<std::int32_t>::Zero(h, w);
    out.areas.push_back(0);
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!binary(y, x) || out.labels(y, x) != 0) continue;
            const auto label = static_cast<std::int32_t>(out.areas.size());
            long long area = 0;
            out.labels(y, x) = label;
            stack.push_back(y * w + x);
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                ++area;
                const int px = p % w;
                const int py = p / w;
                auto visit = [&](int nx, int ny) {
                    if (binary(ny, nx) && out.labels(ny, nx) == 0) {
                        out.labels(ny, nx) = label;
                        stack.push_back(ny * w + nx);
                    }
                };
                if (px > 0) visit(px - 1, py);
                if (px + 1 < w) visit(px + 1, py);
                if (py > 0) visit(px, py - 1);
                if (py + 1 < h) visit(px, py + 1);
            }
            out.areas.push_back(area);
        }
    }
    return out;
}

Plane<std::uint8_t> remove_small_regions(const Plane<std::uint8_t>& binary, long long min_area) {
    if (min_area <= 1) return binary;
    const Components cc = label_components(binary);
    Plane<std::uint8_t> out = binary;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const auto label = cc.labels.data()[i];
        if (label != 0 && cc.areas[static_cast<std::size_t>(label)] < min_area) {
            out.data()[i] = 0;
        }
    }
    return out;
}

HsvPlanes to_hsv_planes(const RasterImage& image) {
    HsvPlanes planes{Plane<float>(image.height(), image.width()), Plane<float>(image.height(), image.width()),
                     Plane<float>(image.height(), image.width())};
    const auto data = image.data();
    for (Eigen::Index i = 0; i < planes.h.size(); ++i) {
        const auto k = static_cast<std::size_t>(i) * 3;
        const Hsv hsv = rgb_to_hsv({data[k], data[k + 1], data[k + 2]});
        planes.h.data()[i] = static_cast<float>(hsv.h);
        planes.s.data()[i] = static_cast<float>(hsv.s);
        planes.v.data()[i] = static_cast<float>(hsv.v);
    }
    return planes;
}

SegMask hsv_segment(const HsvPlanes& planes, const HsvThresholds& thresholds) {
    thresholds.validate();
    Plane<std::uint8_t> in_box(planes.h.rows(), planes.h.cols());
    for (Eigen::Index i = 0; i < in_box.size(); ++i) {
        const Hsv hsv{planes.h.data()[i], planes.s.data()[i], planes.v.data()[i]};
        in_box.data()[i] = thresholds.contains(hsv) ? 1 : 0;
    }
    return SegMask(remove_small_regions(in_box, thresholds.min_region_area));
}

SegMask hsv_segment(const RasterImage& image, const HsvThresholds& thresholds) {
    return hsv_segment(to_hsv_planes(image), thresholds);
}

} // namespace bloomseg
