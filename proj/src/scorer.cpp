#include "bloomseg/scorer.hpp"

#include <mutex>

#include "bloomseg/parallel.hpp"
#include "bloomseg/scoremap_io.hpp"

namespace bloomseg {

namespace {

void check_tile_shape(const RasterImage& tile_image, const Tile& tile, int width, int height) {
    if (tile_image.width() != width || tile_image.height() != height) {
        throw Error(ErrorCode::ShapeMismatch,
                    "scores for tile " + std::to_string(tile.index) + " do not match the tile size");
    }
}

} // namespace

TileScores score_tile(const ScorerConfig& config, const RasterImage& tile_image, const Tile& tile,
                      std::string_view image_stem) {
    if (tile_image.width() != tile_image.height()) {
        throw Error(ErrorCode::ShapeMismatch, "tile image must be square");
    }
    const int r = tile_image.width();

    if (const auto* hsv = std::get_if<HsvBaselineScorer>(&config)) {
        const SegMask fg = hsv_segment(tile_image, hsv->thresholds);
        Plane<double> f = fg.values().cast<double>();
        Plane<double> b = 1.0 - f;
        return {tile.index, ScoreMap(std::move(f)), ScoreMap(std::move(b))};
    }

    if (const auto* pre = std::get_if<PrecomputedScorer>(&config)) {
        ScorePair scores = read_scores(pre->directory / tile_score_filename(image_stem, tile.index));
        check_tile_shape(tile_image, tile, scores.foreground.width(), scores.foreground.height());
        return {tile.index, std::move(scores.foreground), std::move(scores.background)};
    }

    const auto& oracle = std::get<SyntheticOracleScorer>(config);
    if (!oracle.score) {
        throw Error(ErrorCode::InvalidArgument, "synthetic oracle scorer has no scoring function");
    }
    Plane<double> f(r, r);
    Plane<double> b(r, r);
    for (int y = 0; y < r; ++y) {
        for (int x = 0; x < r; ++x) {
            const auto [mf, mb] = oracle.score(tile_image.at(x, y));
            f(y, x) = mf;
            b(y, x) = mb;
        }
    }
    return {tile.index, ScoreMap(std::move(f)), ScoreMap(std::move(b))};
}

HsvThresholds HsvGrid::at(std::size_t index) const {
    const std::size_t na = min_region_areas.size();
    const std::size_t nv = val_ranges.size();
    const std::size_t ns = sat_ranges.size();
    HsvThresholds t;
    t.min_region_area = min_region_areas[index % na];
    index /= na;
    std::tie(t.val_lo, t.val_hi) = val_ranges[index % nv];
    index /= nv;
    std::tie(t.sat_lo, t.sat_hi) = sat_ranges[index % ns];
    index /= ns;
    std::tie(t.hue_lo, t.hue_hi) = hue_ranges[index];
    return t;
}

GridSearchResult grid_search_hsv(std::span<const LabeledImage> dataset, const HsvGrid& grid, int workers) {
    if (dataset.empty()) {
        throw Error(ErrorCode::EmptyDataset, "grid search needs at least one labeled image");
    }
    if (grid.size() == 0) {
        throw Error(ErrorCode::InvalidArgument, "every grid axis needs at least one candidate");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) grid.at(i).validate();

    std::vector<HsvPlanes> planes;
    planes.reserve(dataset.size());
    for (const auto& item : dataset) {
        if (item.truth.width() != item.image.width() || item.truth.height() != item.image.height()) {
            throw Error(ErrorCode::ShapeMismatch, "truth mask does not match its image");
        }
        planes.push_back(to_hsv_planes(item.image));
    }

    // Raw scores are hard 0/1, so softmax maps them to ~0.731 / ~0.269 and a 0.5
    // threshold reproduces the baseline mask exactly.
    std::vector<EvalReport> means(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t g) {
        const HsvThresholds t = grid.at(g);
        std::vector<EvalReport> reports;
        reports.reserve(dataset.size());
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            reports.push_back(compare(hsv_segment(planes[i], t), dataset[i].truth));
        }
        means[g] = mean_report(reports);
    });

    GridSearchResult result;
    for (std::size_t g = 0; g < means.size(); ++g) {
        if (g == 0 || means[g].f1 > result.report.f1) {
            result.best_index = g;
            result.report = means[g];
        }
    }
    result.best = grid.at(result.best_index);
    return result;
}

} // namespace bloomseg
