#include "bloomseg/tiler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bloomseg {

int TileSpec::overlap_px() const noexcept {
    return static_cast<int>(std::lround(overlap_fraction * tile_size));
}

void TileSpec::validate() const {
    if (tile_size < 2) {
        throw Error(ErrorCode::InvalidSpec, "tile size must be at least 2");
    }
    if (!std::isfinite(overlap_fraction) || overlap_fraction < 0.0 || overlap_fraction >= 0.5) {
        throw Error(ErrorCode::InvalidSpec, "overlap fraction must lie in [0, 0.5)");
    }
    if (2 * overlap_px() >= tile_size) {
        throw Error(ErrorCode::InvalidSpec, "overlap must be less than half the tile size");
    }
}

namespace {

struct AxisPlan {
    std::vector<int> origins;
    std::vector<int> own_begin;
    std::vector<int> own_end;
};

AxisPlan plan_axis(int extent, int tile, int stride) {
    const int padded = std::max(extent, tile);
    AxisPlan plan;
    plan.origins.push_back(0);
    while (plan.origins.back() + tile < padded) {
        plan.origins.push_back(std::min(plan.origins.back() + stride, padded - tile));
    }
    const std::size_t n = plan.origins.size();
    plan.own_begin.assign(n, 0);
    plan.own_end.assign(n, extent);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        // midline of the band [origin[i+1], origin[i] + tile)
        const int boundary = (plan.origins[i] + plan.origins[i + 1] + tile) / 2;
        plan.own_end[i] = boundary;
        plan.own_begin[i + 1] = boundary;
    }
    return plan;
}

} // namespace

TileLayout plan_tiles(int width, int height, const TileSpec& spec) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    }
    spec.validate();

    const AxisPlan cols = plan_axis(width, spec.tile_size, spec.stride());
    const AxisPlan rows = plan_axis(height, spec.tile_size, spec.stride());

    TileLayout layout;
    layout.spec = spec;
    layout.image_width = width;
    layout.image_height = height;
    layout.padded_width = std::max(width, spec.tile_size);
    layout.padded_height = std::max(height, spec.tile_size);
    layout.columns = static_cast<int>(cols.origins.size());
    layout.rows = static_cast<int>(rows.origins.size());
    layout.tiles.reserve(static_cast<std::size_t>(layout.columns) * layout.rows);
    for (std::size_t r = 0; r < rows.origins.size(); ++r) {
        for (std::size_t c = 0; c < cols.origins.size(); ++c) {
            Tile tile;
            tile.index = static_cast<int>(layout.tiles.size());
            tile.window_origin = {cols.origins[c], rows.origins[r]};
            tile.ownership = {cols.own_begin[c], rows.own_begin[r], cols.own_end[c] - cols.own_begin[c],
                              rows.own_end[r] - rows.own_begin[r]};
            layout.tiles.push_back(tile);
        }
    }
    return layout;
}

int reflect_index(int i, int n) noexcept {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

RasterImage extract_tile(const RasterImage& image, const Tile& tile, const TileLayout& layout) {
    if (image.width() != layout.image_width || image.height() != layout.image_height) {
        throw Error(ErrorCode::LayoutMismatch, "image dimensions differ from the layout");
    }
    if (tile.index < 0 || static_cast<std::size_t>(tile.index) >= layout.tiles.size() ||
        !(layout.tiles[static_cast<std::size_t>(tile.index)] == tile)) {
        throw Error(ErrorCode::LayoutMismatch, "tile does not belong to the layout");
    }
    const int r = layout.spec.tile_size;
    std::vector<std::uint8_t> data(static_cast<std::size_t>(r) * r * 3);
    const int w = image.width();
    const int h = image.height();
    const bool inside = tile.window_origin.x + r <= w && tile.window_origin.y + r <= h;
    for (int y = 0; y < r; ++y) {
        const int sy = inside ? tile.window_origin.y + y : reflect_index(tile.window_origin.y + y, h);
        const std::uint8_t* src = image.row(sy);
        std::uint8_t* dst = data.data() + static_cast<std::size_t>(y) * r * 3;
        if (inside) {
            std::copy_n(src + static_cast<std::size_t>(tile.window_origin.x) * 3, static_cast<std::size_t>(r) * 3, dst);
            continue;
        }
        for (int x = 0; x < r; ++x) {
            const int sx = reflect_index(tile.window_origin.x + x, w);
            std::copy_n(src + static_cast<std::size_t>(sx) * 3, 3, dst + static_cast<std::size_t>(x) * 3);
        }
    }
    return RasterImage(r, r, std::move(data));
}

namespace detail {

void check_fusion_inputs(const TileLayout& layout, std::span<const int> tile_indices,
                         std::span<const std::pair<int, int>> shapes) {
    if (tile_indices.size() != layout.tiles.size()) {
        throw Error(ErrorCode::CountMismatch, "expected " + std::to_string(layout.tiles.size()) +
                                                  " tile score pairs, got " + std::to_string(tile_indices.size()));
    }
    std::vector<bool> seen(layout.tiles.size(), false);
    for (int idx : tile_indices) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= seen.size() || seen[static_cast<std::size_t>(idx)]) {
            throw Error(ErrorCode::CountMismatch, "tile index " + std::to_string(idx) + " missing or repeated");
        }
        seen[static_cast<std::size_t>(idx)] = true;
    }
    const int r = layout.spec.tile_size;
    for (const auto& [w, h] : shapes) {
        if (w != r || h != r) {
            throw Error(ErrorCode::ShapeMismatch, "tile score map is " + std::to_string(w) + "x" + std::to_string(h) +
                                                      ", expected " + std::to_string(r) + "x" + std::to_string(r));
        }
    }
}

} // namespace detail

} // namespace bloomseg
