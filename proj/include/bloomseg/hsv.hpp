#pragma once

#include <cstdint>

#include "bloomseg/types.hpp"

namespace bloomseg {

/// Hue in degrees [0, 360), saturation and value in [0, 1].
struct Hsv {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
};

/// Hexcone conversion; achromatic pixels get hue 0.
Hsv rgb_to_hsv(Rgb pixel) noexcept;

/// Axis-aligned HSV box plus a minimum connected-region area.
/// The hue interval wraps through 0 when hue_lo > hue_hi.
struct HsvThresholds {
    double hue_lo = 0.0;
    double hue_hi = 360.0;
    double sat_lo = 0.0;
    double sat_hi = 1.0;
    double val_lo = 0.0;
    double val_hi = 1.0;
    long long min_region_area = 0;

    void validate() const;
    bool contains(const Hsv& hsv) const noexcept;

    friend bool operator==(const HsvThresholds&, const HsvThresholds&) = default;
};

/// 4-connected component labels (1..n, 0 for unset pixels) and per-label areas
/// (`areas[0]` is unused).
struct Components {
    Plane<std::int32_t> labels;
    std::vector<long long> areas;
};
Components label_components(const Plane<std::uint8_t>& binary);

/// Clears every 4-connected region smaller than `min_area`.
Plane<std::uint8_t> remove_small_regions(const Plane<std::uint8_t>& binary, long long min_area);

/// Per-pixel HSV of an image as three planes.
struct HsvPlanes {
    Plane<float> h;
    Plane<float> s;
    Plane<float> v;
};
HsvPlanes to_hsv_planes(const RasterImage& image);

/// Baseline color segmentation: in-box pixels belonging to a component of
/// at least `min_region_area` pixels.
SegMask hsv_segment(const RasterImage& image, const HsvThresholds& thresholds);
SegMask hsv_segment(const HsvPlanes& planes, const HsvThresholds& thresholds);

} // namespace bloomseg
