#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>

#include "bloomseg/scorer.hpp"
#include "bloomseg/types.hpp"

namespace bloomseg::fixture {

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kGreen{40, 140, 40};
inline constexpr Rgb kYellow{230, 200, 40};

/// White disk on a green field. The normalized foreground map is 0.8 inside the disk
/// eroded by `band` pixels, 0.05 outside the disk dilated by `band` pixels and 0.5 in
/// between; the truth is the disk itself.
struct DiskFixture {
    RasterImage image;
    ScoreMap foreground;
    SegMask truth;
};

inline DiskFixture make_disk(int size = 512, double radius = 120.0, double band = 3.0) {
    DiskFixture f;
    f.image = RasterImage(size, size, kGreen);
    Plane<double> fg(size, size);
    Plane<std::uint8_t> truth(size, size);
    const double c = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double d = std::hypot(x - c, y - c);
            const bool inside = d <= radius;
            truth(y, x) = inside ? 1 : 0;
            if (inside) f.image.set(x, y, kWhite);
            fg(y, x) = d <= radius - band ? 0.8 : (d > radius + band ? 0.05 : 0.5);
        }
    }
    f.foreground = ScoreMap(std::move(fg));
    f.truth = SegMask(std::move(truth));
    return f;
}

/// Raw score pair whose softmax gives foreground probability p.
inline std::pair<double, double> logits_for(double p) { return {std::log(p), std::log(1.0 - p)}; }

/// Color scorer for the sweep fixture: white flowers 0.8, yellow distractors 0.2,
/// green foliage 0.05.
inline std::pair<double, double> sweep_scores(Rgb c) {
    if (c == kWhite) return logits_for(0.8);
    if (c == kYellow) return logits_for(0.2);
    return logits_for(0.05);
}

/// White disk plus a yellow distractor square on green; truth is the disk only.
inline LabeledImage make_sweep_image(int size, double radius, int distractor) {
    RasterImage image(size, size, kGreen);
    Plane<std::uint8_t> truth = Plane<std::uint8_t>::Zero(size, size);
    const double c = size / 3.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            if (std::hypot(x - c, y - c) <= radius) {
                image.set(x, y, kWhite);
                truth(y, x) = 1;
            } else if (x >= size - distractor - 8 && x < size - 8 && y >= size - distractor - 8 && y < size - 8) {
                image.set(x, y, kYellow);
            }
        }
    }
    return {std::move(image), SegMask(std::move(truth))};
}

inline RasterImage random_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
    for (auto& v : data) v = static_cast<std::uint8_t>(rng() & 0xFF);
    return RasterImage(w, h, std::move(data));
}

inline ScoreMap random_probabilities(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Plane<double> v(h, w);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
    return ScoreMap(std::move(v));
}

inline SegMask random_mask(int w, int h, std::uint64_t seed, double p = 0.5) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(p);
    Plane<std::uint8_t> v(h, w);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = b(rng) ? 1 : 0;
    return SegMask(std::move(v));
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("bloomseg_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace bloomseg::fixture
