#pragma once

#include <span>
#include <vector>

#include "bloomseg/types.hpp"

namespace bloomseg {

/// Square portrait size and the per-axis linear overlap between neighbors.
struct TileSpec {
    int tile_size = 321;
    double overlap_fraction = 0.10;

    int overlap_px() const noexcept;
    int stride() const noexcept { return tile_size - overlap_px(); }
    /// Throws InvalidSpec unless tile_size >= 2, 0 <= s < 0.5 and 2 * overlap_px < tile_size.
    void validate() const;
};

struct Tile {
    int index = 0;
    /// Top-left of the r x r sampling window, in padded-image coordinates.
    PixelIndex window_origin;
    /// Pixels of the original image whose fused scores come from this tile.
    Rect ownership;

    friend bool operator==(const Tile&, const Tile&) = default;
};

struct TileLayout {
    TileSpec spec;
    int image_width = 0;
    int image_height = 0;
    /// Image extended by reflection up to at least tile_size in each axis.
    int padded_width = 0;
    int padded_height = 0;
    int columns = 0;
    int rows = 0;
    /// Row-major by window origin.
    std::vector<Tile> tiles;
};

/// Window origins advance by the stride; the last one in each axis is clamped so the
/// window ends at the padded edge. Each overlap band is split at its midline.
TileLayout plan_tiles(int width, int height, const TileSpec& spec);

/// r x r crop of `image` under `tile`; samples beyond the image are mirrored (reflect-101).
RasterImage extract_tile(const RasterImage& image, const Tile& tile, const TileLayout& layout);

/// Mirror index into [0, n) without repeating the edge sample, periodic for any i.
int reflect_index(int i, int n) noexcept;

template <typename Scalar>
struct TileScoresT {
    int tile_index = 0;
    ScoreMapT<Scalar> foreground;
    ScoreMapT<Scalar> background;
};
using TileScores = TileScoresT<double>;

template <typename Scalar>
struct ScorePairT {
    ScoreMapT<Scalar> foreground;
    ScoreMapT<Scalar> background;
};
using ScorePair = ScorePairT<double>;

namespace detail {
void check_fusion_inputs(const TileLayout& layout, std::span<const int> tile_indices,
                         std::span<const std::pair<int, int>> shapes);
}

/// Writes each tile's ownership sub-window into the full-resolution maps; everything
/// outside a tile's ownership rect is discarded. The order of `tile_scores` is irrelevant.
template <typename Scalar>
ScorePairT<Scalar> fuse(const TileLayout& layout, std::span<const TileScoresT<Scalar>> tile_scores) {
    std::vector<int> indices;
    std::vector<std::pair<int, int>> shapes;
    indices.reserve(tile_scores.size());
    shapes.reserve(tile_scores.size() * 2);
    for (const auto& s : tile_scores) {
        indices.push_back(s.tile_index);
        shapes.emplace_back(s.foreground.width(), s.foreground.height());
        shapes.emplace_back(s.background.width(), s.background.height());
    }
    detail::check_fusion_inputs(layout, indices, shapes);

    Plane<Scalar> fg(layout.image_height, layout.image_width);
    Plane<Scalar> bg(layout.image_height, layout.image_width);
    for (const auto& s : tile_scores) {
        const Tile& tile = layout.tiles[static_cast<std::size_t>(s.tile_index)];
        const Rect& own = tile.ownership;
        const int local_x = own.x0 - tile.window_origin.x;
        const int local_y = own.y0 - tile.window_origin.y;
        fg.block(own.y0, own.x0, own.height, own.width) =
            s.foreground.values().block(local_y, local_x, own.height, own.width);
        bg.block(own.y0, own.x0, own.height, own.width) =
            s.background.values().block(local_y, local_x, own.height, own.width);
    }
    return {ScoreMapT<Scalar>(std::move(fg)), ScoreMapT<Scalar>(std::move(bg))};
}

template <typename Scalar>
ScorePairT<Scalar> fuse(const TileLayout& layout, const std::vector<TileScoresT<Scalar>>& tile_scores) {
    return fuse(layout, std::span<const TileScoresT<Scalar>>(tile_scores));
}

} // namespace bloomseg
