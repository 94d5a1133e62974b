#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bloomseg/eval.hpp"
#include "bloomseg/hsv.hpp"
#include "bloomseg/tiler.hpp"

namespace bloomseg {

/// Color thresholding with size filtering; emits hard 0/1 foreground scores.
struct HsvBaselineScorer {
    HsvThresholds thresholds;
};

/// Reads externally produced tile scores from `<directory>/<image-stem>.tile<index>.bsgs`.
struct PrecomputedScorer {
    std::filesystem::path directory;
};

/// Scores each pixel with a deterministic function of its color: returns (m_F, m_B).
struct SyntheticOracleScorer {
    std::function<std::pair<double, double>(Rgb)> score;
};

using ScorerConfig = std::variant<HsvBaselineScorer, PrecomputedScorer, SyntheticOracleScorer>;

/// Raw (unnormalized) r x r foreground and background scores for one tile.
/// `image_stem` keys precomputed score files and is ignored by the other scorers.
TileScores score_tile(const ScorerConfig& config, const RasterImage& tile_image, const Tile& tile,
                      std::string_view image_stem = {});

/// Per-pixel two-class softmax, computed after subtracting the per-pixel maximum.
template <typename Scalar>
ScorePairT<Scalar> normalize(const ScoreMapT<Scalar>& foreground, const ScoreMapT<Scalar>& background) {
    if (foreground.width() != background.width() || foreground.height() != background.height()) {
        throw Error(ErrorCode::ShapeMismatch, "foreground and background maps differ in size");
    }
    const auto& f = foreground.values();
    const auto& b = background.values();
    const Plane<Scalar> peak = f.max(b);
    const Plane<Scalar> ef = (f - peak).exp();
    const Plane<Scalar> eb = (b - peak).exp();
    const Plane<Scalar> total = ef + eb;
    return {ScoreMapT<Scalar>(Plane<Scalar>(ef / total)), ScoreMapT<Scalar>(Plane<Scalar>(eb / total))};
}

/// Candidate values per axis; every combination is evaluated.
struct HsvGrid {
    std::vector<std::pair<double, double>> hue_ranges;
    std::vector<std::pair<double, double>> sat_ranges;
    std::vector<std::pair<double, double>> val_ranges;
    std::vector<long long> min_region_areas;

    std::size_t size() const noexcept {
        return hue_ranges.size() * sat_ranges.size() * val_ranges.size() * min_region_areas.size();
    }
    /// Grid point `index`, hue varying slowest and area fastest.
    HsvThresholds at(std::size_t index) const;
};

struct LabeledImage {
    RasterImage image;
    SegMask truth;
};

struct GridSearchResult {
    HsvThresholds best;
    std::size_t best_index = 0;
    /// Mean-over-images report of the best grid point.
    EvalReport report;
};

/// Exhaustive search maximizing mean F1 of the baseline scorer followed by a 0.5
/// threshold. Ties go to the smallest grid index.
GridSearchResult grid_search_hsv(std::span<const LabeledImage> dataset, const HsvGrid& grid, int workers = 1);

} // namespace bloomseg
