#include "bloomseg/render.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cstdio>

namespace bloomseg {

namespace {

// 0 = nothing, otherwise a region class; boundary pixels are those with a 4-neighbor of another class.
RasterImage outline(const RasterImage& image, const Plane<std::uint8_t>& classes, std::span<const Rgb> palette) {
    RasterImage out = image;
    const int w = image.width();
    const int h = image.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint8_t c = classes(y, x);
            if (c == 0) continue;
            const bool edge = (x > 0 && classes(y, x - 1) != c) || (x + 1 < w && classes(y, x + 1) != c) ||
                              (y > 0 && classes(y - 1, x) != c) || (y + 1 < h && classes(y + 1, x) != c);
            if (edge) out.set(x, y, palette[c]);
        }
    }
    return out;
}

} // namespace

RasterImage render_overlay(const RasterImage& image, const SegMask& mask, const SegMask* truth) {
    if (mask.width() != image.width() || mask.height() != image.height() ||
        (truth && (truth->width() != image.width() || truth->height() != image.height()))) {
        throw Error(ErrorCode::ShapeMismatch, "overlay inputs differ in size");
    }
    if (!truth) {
        const Rgb palette[] = {{}, kBoundaryColor};
        return outline(image, mask.values(), palette);
    }
    // 1 = TP, 2 = FN, 3 = FP
    const Plane<std::uint8_t> classes =
        (mask.values() * truth->values()) + 2 * ((1 - mask.values()) * truth->values()) +
        3 * (mask.values() * (1 - truth->values()));
    const Rgb palette[] = {{}, kTruePositiveColor, kFalseNegativeColor, kFalsePositiveColor};
    return outline(image, classes, palette);
}

RasterImage plot_sweep(std::span<const SweepPoint> points, int width, int height) {
    cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
    const int left = 50, right = 20, top = 20, bottom = 40;
    const int pw = width - left - right;
    const int ph = height - top - bottom;
    const cv::Scalar axis(0, 0, 0);
    cv::rectangle(canvas, {left, top}, {left + pw, top + ph}, axis, 1);
    for (int k = 0; k <= 10; k += 2) {
        const int y = top + ph - ph * k / 10;
        const int x = left + pw * k / 10;
        char label[16];
        std::snprintf(label, sizeof label, "%.1f", k / 10.0);
        cv::putText(canvas, label, {5, y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1);
        cv::putText(canvas, label, {x - 10, top + ph + 18}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1);
    }
    cv::putText(canvas, "tau0", {left + pw / 2 - 15, height - 5}, cv::FONT_HERSHEY_SIMPLEX, 0.5, axis, 1);

    auto to_px = [&](double tau, double v) {
        return cv::Point(left + static_cast<int>(std::lround(std::clamp(tau, 0.0, 1.0) * pw)),
                         top + ph - static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * ph)));
    };
    struct Series {
        const char* name;
        double EvalReport::*field;
        cv::Scalar color;  // BGR
    };
    const Series series[] = {{"precision", &EvalReport::precision, {180, 105, 255}},
                             {"recall", &EvalReport::recall, {0, 0, 255}},
                             {"F1", &EvalReport::f1, {255, 0, 0}},
                             {"IoU", &EvalReport::iou, {0, 160, 0}}};
    int legend_y = top + 15;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const cv::Point p = to_px(points[i].tau0, points[i].mean.*s.field);
            cv::circle(canvas, p, 3, s.color, cv::FILLED);
            if (i > 0) cv::line(canvas, to_px(points[i - 1].tau0, points[i - 1].mean.*s.field), p, s.color, 2);
        }
        cv::line(canvas, {left + pw - 90, legend_y - 4}, {left + pw - 70, legend_y - 4}, s.color, 2);
        cv::putText(canvas, s.name, {left + pw - 65, legend_y}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1);
        legend_y += 16;
    }

    RasterImage out(width, height);
    for (int y = 0; y < height; ++y) {
        const auto* row = canvas.ptr<cv::Vec3b>(y);
        for (int x = 0; x < width; ++x) out.set(x, y, {row[x][2], row[x][1], row[x][0]});
    }
    return out;
}

} // namespace bloomseg
