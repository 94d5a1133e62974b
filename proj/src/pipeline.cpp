#include "bloomseg/pipeline.hpp"

#include "bloomseg/parallel.hpp"

namespace bloomseg {

ScorePair fused_scores(const RasterImage& image, const PipelineConfig& config, std::string_view image_stem) {
    const TileLayout layout = plan_tiles(image.width(), image.height(), config.tiles);
    std::vector<TileScores> scores(layout.tiles.size());
    parallel_for(layout.tiles.size(), config.workers, [&](std::size_t i) {
        const Tile& tile = layout.tiles[i];
        scores[i] = score_tile(config.scorer, extract_tile(image, tile, layout), tile, image_stem);
    });
    return fuse(layout, scores);
}

SegmentResult segment(const RasterImage& image, const PipelineConfig& config, std::string_view image_stem,
                      bool keep_raw) {
    config.rgr.validate();
    SegmentResult result;
    {
        ScorePair raw = fused_scores(image, config, image_stem);
        result.foreground = std::move(normalize(raw.foreground, raw.background).foreground);
        if (keep_raw) result.raw = std::move(raw);
    }
    if (config.threshold_only) {
        result.mask = threshold(result.foreground, config.rgr.tau0);
        return result;
    }
    result.refinement = refine(image, result.foreground, config.rgr, config.workers);
    result.mask = result.refinement.mask;
    return result;
}

std::vector<SweepPoint> sweep_tau0(std::span<const RasterImage> images, std::span<const std::string> stems,
                                   std::span<const SegMask> truths, const PipelineConfig& config,
                                   std::span<const double> taus) {
    if (stems.size() != images.size()) {
        throw Error(ErrorCode::CountMismatch, "need one stem per image");
    }
    std::vector<ScoreMap> foregrounds;
    foregrounds.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        ScorePair raw = fused_scores(images[i], config, stems[i]);
        foregrounds.push_back(std::move(normalize(raw.foreground, raw.background).foreground));
    }
    return sweep_tau0(images, foregrounds, truths, config.rgr, taus, config.workers);
}

} // namespace bloomseg
