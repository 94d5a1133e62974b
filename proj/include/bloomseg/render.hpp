#pragma once

#include <optional>
#include <span>

#include "bloomseg/eval.hpp"
#include "bloomseg/types.hpp"

namespace bloomseg {

inline constexpr Rgb kBoundaryColor{255, 255, 0};
inline constexpr Rgb kTruePositiveColor{0, 0, 255};
inline constexpr Rgb kFalseNegativeColor{255, 0, 0};
inline constexpr Rgb kFalsePositiveColor{255, 105, 180};

/// Copy of `image` with region boundaries drawn. Without truth, the mask outline is drawn
/// in yellow; with truth, true positive / false negative / false positive regions are
/// outlined in blue / red / pink.
RasterImage render_overlay(const RasterImage& image, const SegMask& mask, const SegMask* truth = nullptr);

/// Line chart of precision, recall, F1 and IoU against tau0.
RasterImage plot_sweep(std::span<const SweepPoint> points, int width = 640, int height = 400);

} // namespace bloomseg
