#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bloomseg/eval.hpp"
#include "bloomseg/rgr.hpp"
#include "bloomseg/scorer.hpp"
#include "bloomseg/tiler.hpp"

namespace bloomseg {

struct PipelineConfig {
    TileSpec tiles;
    ScorerConfig scorer = HsvBaselineScorer{};
    RgrParams rgr;
    int workers = 1;
    /// Skip refinement and output M~_F > tau0 directly.
    bool threshold_only = false;
};

/// Tiles the image, scores every tile (in parallel) and fuses the raw maps.
ScorePair fused_scores(const RasterImage& image, const PipelineConfig& config, std::string_view image_stem = {});

struct SegmentResult {
    SegMask mask;
    /// Softmax-normalized foreground map.
    ScoreMap foreground;
    /// Raw fused maps, kept only when requested.
    std::optional<ScorePair> raw;
    RefineResult refinement;
};

/// Full flower segmentation of one image: tile, score, fuse, normalize, refine.
SegmentResult segment(const RasterImage& image, const PipelineConfig& config, std::string_view image_stem = {},
                      bool keep_raw = false);

/// Tau0 sweep through the full pipeline. Scores are computed once per image and reused
/// for every tau0.
std::vector<SweepPoint> sweep_tau0(std::span<const RasterImage> images, std::span<const std::string> stems,
                                   std::span<const SegMask> truths, const PipelineConfig& config,
                                   std::span<const double> taus);

} // namespace bloomseg
