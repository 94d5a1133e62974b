#include "bloomseg/rgr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include "bloomseg/parallel.hpp"

namespace bloomseg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Uniform integer in [0, n); std::uniform_int_distribution is not portable across
// standard libraries, which would break cross-platform reproducibility.
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t floor = -n % n;
        while (low < floor) {
            m = static_cast<unsigned __int128>(engine()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

struct QueueItem {
    double key;
    std::uint64_t seq;
    std::int32_t pixel;
};

struct LaterFirst {
    bool operator()(const QueueItem& a, const QueueItem& b) const noexcept {
        return a.key != b.key ? a.key > b.key : a.seq > b.seq;
    }
};

void check_same_size(const RasterImage& image, int w, int h, const char* what) {
    if (image.width() != w || image.height() != h) {
        throw Error(ErrorCode::ShapeMismatch, std::string(what) + " does not match the image size");
    }
}

long long majority(int runs) { return (runs + 1) / 2; }

// Runs `per_run` for every Monte Carlo run and counts per-pixel foreground verdicts.
template <typename PerRun>
Plane<std::uint16_t> accumulate_runs(int runs, int workers, Eigen::Index rows, Eigen::Index cols, PerRun&& per_run) {
    Plane<std::uint16_t> counts = Plane<std::uint16_t>::Zero(rows, cols);
    std::mutex counts_mutex;
    parallel_for(static_cast<std::size_t>(runs), workers, [&](std::size_t run) {
        const std::vector<std::uint8_t> verdict = per_run(static_cast<int>(run));
        std::lock_guard lock(counts_mutex);
        for (Eigen::Index i = 0; i < counts.size(); ++i) {
            counts.data()[i] = static_cast<std::uint16_t>(counts.data()[i] + verdict[static_cast<std::size_t>(i)]);
        }
    });
    return counts;
}

SegMask final_vote(const Plane<std::uint16_t>& counts, int runs) {
    return SegMask((counts.cast<long long>() >= majority(runs)).cast<std::uint8_t>());
}

// Exact nearest neighbor among fixed points in the RGB cube, bucketed on a uniform grid.
// Ties go to the lowest point index.
class ColorIndex {
public:
    explicit ColorIndex(const std::vector<Eigen::Vector3d>& points) : points_(points), cells_(kCells * kCells * kCells) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            cells_[flat(cell_of(points_[i].x()), cell_of(points_[i].y()), cell_of(points_[i].z()))].push_back(i);
        }
    }

    std::size_t find(const Eigen::Vector3d& q) const {
        const int cx = cell_of(q.x()), cy = cell_of(q.y()), cz = cell_of(q.z());
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (int ring = 0; ring < kCells; ++ring) {
            for (int x = std::max(0, cx - ring); x <= std::min(kCells - 1, cx + ring); ++x) {
                for (int y = std::max(0, cy - ring); y <= std::min(kCells - 1, cy + ring); ++y) {
                    for (int z = std::max(0, cz - ring); z <= std::min(kCells - 1, cz + ring); ++z) {
                        const int chebyshev = std::max({std::abs(x - cx), std::abs(y - cy), std::abs(z - cz)});
                        if (chebyshev != ring) continue;
                        for (const std::size_t i : cells_[flat(x, y, z)]) {
                            const double d = (points_[i] - q).squaredNorm();
                            if (d < best || (d == best && i < arg)) {
                                best = d;
                                arg = i;
                            }
                        }
                    }
                }
            }
            // anything in a farther ring is at least ring * kCellSize away
            const double reach = ring * kCellSize;
            if (best < reach * reach) break;
        }
        return arg;
    }

private:
    static constexpr int kCells = 32;
    static constexpr double kCellSize = 256.0 / kCells;

    static int cell_of(double v) { return std::clamp(static_cast<int>(v / kCellSize), 0, kCells - 1); }
    static std::size_t flat(int x, int y, int z) { return (static_cast<std::size_t>(x) * kCells + y) * kCells + z; }

    const std::vector<Eigen::Vector3d>& points_;
    std::vector<std::vector<std::size_t>> cells_;
};

} // namespace

RgrParams RgrParams::with_tau0(double tau) const {
    RgrParams p = *this;
    p.tau0 = tau;
    p.tau_f = 1.25 * tau;
    return p;
}

void RgrParams::validate() const {
    auto open_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; };
    if (!open_unit(tau0)) throw Error(ErrorCode::InvalidArgument, "tau0 must lie in (0, 1)");
    if (!open_unit(tau_b)) throw Error(ErrorCode::InvalidArgument, "tau_b must lie in (0, 1)");
    if (!std::isfinite(tau_f) || tau_f <= 0.0) throw Error(ErrorCode::InvalidArgument, "tau_f must be positive");
    if (mc_runs < 1 || mc_runs > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "mc_runs must lie in [1, 65535]");
    if (!std::isfinite(seed_fraction) || seed_fraction <= 0.0 || seed_fraction > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "seed_fraction must lie in (0, 1]");
    }
    if (!std::isfinite(theta) || theta < 0.0) throw Error(ErrorCode::InvalidArgument, "theta must be non-negative");
}

ConfidencePartition partition_confidence(const ScoreMap& fg_normalized, const RgrParams& params) {
    if (!fg_normalized.is_normalized()) {
        throw Error(ErrorCode::InvalidArgument, "confidence partition needs a normalized map");
    }
    const auto& v = fg_normalized.values();
    ConfidencePartition part;
    part.labels.resize(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double f = v.data()[i];
        const bool fg = f > params.tau_f;
        const bool bg = params.background_rule == BackgroundRule::ForegroundBelow ? f < params.tau_b
                                                                                  : (1.0 - f) > params.tau_b;
        Confidence c = Confidence::Uncertain;
        if (fg && !bg) {
            c = Confidence::Foreground;
            ++part.foreground;
        } else if (bg && !fg) {
            c = Confidence::Background;
            ++part.background;
        } else {
            ++part.uncertain;
        }
        part.labels.data()[i] = static_cast<std::uint8_t>(c);
    }
    return part;
}

std::vector<std::int32_t> sample_seeds(std::span<const std::int32_t> candidates, double fraction,
                                       std::uint64_t rng_seed, int run) {
    const std::size_t n = candidates.size();
    const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
    std::mt19937_64 engine(splitmix64(rng_seed ^ splitmix64(static_cast<std::uint64_t>(run) + 1)));
    std::vector<std::int32_t> pool(candidates.begin(), candidates.end());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(engine, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

ClusterMap grow_clusters(const RasterImage& image, std::span<const std::int32_t> seeds, double theta) {
    const int w = image.width();
    const int h = image.height();
    const auto n = static_cast<std::size_t>(w) * h;
    const std::uint8_t* rgb = image.data().data();
    const double limit = theta * 255.0;
    const double limit2 = limit * limit;

    ClusterMap map;
    map.ids = Plane<std::int32_t>::Constant(h, w, -1);
    std::int32_t* ids = map.ids.data();
    std::vector<std::int32_t> pushed_by(n, -1);
    std::vector<QueueItem> heap;
    std::uint64_t seq = 0;

    for (const std::int32_t seed : seeds) {
        if (ids[seed] != -1) continue;
        const auto cluster = static_cast<std::int32_t>(map.sizes.size());
        double sum[3] = {double(rgb[3 * seed]), double(rgb[3 * seed + 1]), double(rgb[3 * seed + 2])};
        long long size = 1;
        ids[seed] = cluster;

        double mean[3] = {sum[0], sum[1], sum[2]};

        auto dist2 = [&](std::int32_t p) {
            const double dr = rgb[3 * p] - mean[0];
            const double dg = rgb[3 * p + 1] - mean[1];
            const double db = rgb[3 * p + 2] - mean[2];
            return dr * dr + dg * dg + db * db;
        };
        auto offer = [&](std::int32_t q) {
            if (ids[q] != -1 || pushed_by[q] == cluster) return;
            const double key = dist2(q);
            if (key < limit2) {
                pushed_by[q] = cluster;
                heap.push_back({key, seq++, q});
                std::push_heap(heap.begin(), heap.end(), LaterFirst{});
            }
        };
        auto offer_neighbors = [&](std::int32_t p) {
            const int x = p % w;
            if (x > 0) offer(p - 1);
            if (x + 1 < w) offer(p + 1);
            if (p >= w) offer(p - w);
            if (static_cast<std::size_t>(p) + w < n) offer(p + w);
        };

        if (limit2 > 0.0) {
            heap.clear();
            offer_neighbors(seed);
            while (!heap.empty()) {
                std::pop_heap(heap.begin(), heap.end(), LaterFirst{});
                const QueueItem item = heap.back();
                heap.pop_back();
                const std::int32_t p = item.pixel;
                if (ids[p] != -1) continue;
                if (dist2(p) >= limit2) {
                    // the mean drifted away; a later attachment may offer it again
                    pushed_by[p] = -1;
                    continue;
                }
                ids[p] = cluster;
                sum[0] += rgb[3 * p];
                sum[1] += rgb[3 * p + 1];
                sum[2] += rgb[3 * p + 2];
                ++size;
                const double inv = 1.0 / static_cast<double>(size);
                for (int c = 0; c < 3; ++c) mean[c] = sum[c] * inv;
                offer_neighbors(p);
            }
        }
        map.sizes.push_back(size);
        map.means.emplace_back(sum[0] / size, sum[1] / size, sum[2] / size);
    }
    return map;
}

RefineResult refine(const RasterImage& image, const ScoreMap& fg_normalized, const RgrParams& params, int workers) {
    check_same_size(image, fg_normalized.width(), fg_normalized.height(), "foreground score map");
    params.validate();
    const ConfidencePartition part = partition_confidence(fg_normalized, params);
    const auto& scores = fg_normalized.values();

    RefineResult result;
    if (part.foreground + part.background == 0) {
        result.mask = threshold(fg_normalized, params.tau0);
        result.used_fallback = true;
        result.warnings.push_back("no high-confidence pixels; fell back to direct thresholding at tau0");
        return result;
    }

    std::vector<std::int32_t> candidates;
    candidates.reserve(static_cast<std::size_t>(part.foreground + part.background));
    for (Eigen::Index i = 0; i < part.labels.size(); ++i) {
        if (part.labels.data()[i] != static_cast<std::uint8_t>(Confidence::Uncertain)) {
            candidates.push_back(static_cast<std::int32_t>(i));
        }
    }
    const Plane<std::uint8_t> votes = (scores > params.tau0).cast<std::uint8_t>();

    std::mutex stats_mutex;
    const Plane<std::uint16_t> counts =
        accumulate_runs(params.mc_runs, workers, scores.rows(), scores.cols(), [&](int run) {
            const auto seeds = sample_seeds(candidates, params.seed_fraction, params.rng_seed, run);
            const ClusterMap clusters = grow_clusters(image, seeds, params.theta);
            std::vector<long long> positive(clusters.sizes.size(), 0);
            const std::int32_t* ids = clusters.ids.data();
            for (Eigen::Index i = 0; i < votes.size(); ++i) {
                if (ids[i] >= 0) positive[static_cast<std::size_t>(ids[i])] += votes.data()[i];
            }
            std::vector<std::uint8_t> verdict(static_cast<std::size_t>(votes.size()));
            long long fg_pixels = 0;
            for (Eigen::Index i = 0; i < votes.size(); ++i) {
                const std::int32_t id = ids[i];
                const bool fg = id >= 0 ? 2 * positive[static_cast<std::size_t>(id)] >
                                              clusters.sizes[static_cast<std::size_t>(id)]
                                        : votes.data()[i] != 0;
                verdict[static_cast<std::size_t>(i)] = fg ? 1 : 0;
                fg_pixels += fg ? 1 : 0;
            }
            std::lock_guard lock(stats_mutex);
            result.seeds_per_run = static_cast<long long>(seeds.size());
            result.grown_clusters += std::count_if(clusters.sizes.begin(), clusters.sizes.end(),
                                                   [](long long s) { return s > 1; });
            result.foreground_votes += fg_pixels;
            return verdict;
        });
    result.mask = final_vote(counts, params.mc_runs);
    return result;
}

RefineResult refine_from_scribbles(const RasterImage& image, const SegMask& fg_strokes, const SegMask& bg_strokes,
                                   const RgrParams& params, int workers) {
    check_same_size(image, fg_strokes.width(), fg_strokes.height(), "foreground strokes");
    check_same_size(image, bg_strokes.width(), bg_strokes.height(), "background strokes");
    params.validate();
    const auto& fg = fg_strokes.values();
    const auto& bg = bg_strokes.values();
    if (fg.cast<int>().sum() == 0 || bg.cast<int>().sum() == 0) {
        throw Error(ErrorCode::EmptyStrokes, "need at least one foreground and one background stroke pixel");
    }
    if ((fg * bg).cast<int>().sum() != 0) {
        throw Error(ErrorCode::OverlappingStrokes, "foreground and background strokes share pixels");
    }

    std::vector<std::int32_t> candidates;
    for (Eigen::Index i = 0; i < fg.size(); ++i) {
        if (fg.data()[i] || bg.data()[i]) candidates.push_back(static_cast<std::int32_t>(i));
    }
    const std::uint8_t* rgb = image.data().data();

    std::mutex stats_mutex;
    RefineResult result;
    const Plane<std::uint16_t> counts = accumulate_runs(params.mc_runs, workers, fg.rows(), fg.cols(), [&](int run) {
        const auto seeds = sample_seeds(candidates, params.seed_fraction, params.rng_seed, run);
        const ClusterMap clusters = grow_clusters(image, seeds, params.theta);
        const std::int32_t* ids = clusters.ids.data();
        const std::size_t cluster_count = clusters.sizes.size();
        std::vector<long long> fg_count(cluster_count, 0);
        std::vector<long long> bg_count(cluster_count, 0);
        for (Eigen::Index i = 0; i < fg.size(); ++i) {
            if (ids[i] < 0) continue;
            fg_count[static_cast<std::size_t>(ids[i])] += fg.data()[i];
            bg_count[static_cast<std::size_t>(ids[i])] += bg.data()[i];
        }

        // Stroke-bearing clusters in priority order: grown clusters by creation, then
        // unreached stroke pixels in raster order. Exact duplicate colors keep the first.
        struct Reference {
            Eigen::Vector3d mean;
            bool foreground;
        };
        std::vector<Reference> references;
        for (std::size_t c = 0; c < cluster_count; ++c) {
            references.push_back({clusters.means[c], fg_count[c] > bg_count[c]});
        }
        std::vector<std::int8_t> singleton_seen(std::size_t{1} << 24, 0);
        auto color_key = [&](Eigen::Index i) {
            const auto k = static_cast<std::size_t>(i) * 3;
            return (std::size_t{rgb[k]} << 16) | (std::size_t{rgb[k + 1]} << 8) | rgb[k + 2];
        };
        for (Eigen::Index i = 0; i < fg.size(); ++i) {
            if (ids[i] >= 0 || !(fg.data()[i] || bg.data()[i])) continue;
            auto& seen = singleton_seen[color_key(i)];
            if (seen) continue;
            seen = 1;
            const auto k = static_cast<std::size_t>(i) * 3;
            references.push_back({Eigen::Vector3d(rgb[k], rgb[k + 1], rgb[k + 2]), fg.data()[i] != 0});
        }

        std::vector<Eigen::Vector3d> means;
        means.reserve(references.size());
        for (const auto& ref : references) means.push_back(ref.mean);
        const ColorIndex nearest(means);
        std::vector<std::int8_t> inherited(std::size_t{1} << 24, -1);
        auto nearest_verdict = [&](Eigen::Index i) -> bool {
            auto& memo = inherited[color_key(i)];
            if (memo < 0) {
                const auto k = static_cast<std::size_t>(i) * 3;
                memo = references[nearest.find(Eigen::Vector3d(rgb[k], rgb[k + 1], rgb[k + 2]))].foreground ? 1 : 0;
            }
            return memo != 0;
        };

        std::vector<std::uint8_t> verdict(static_cast<std::size_t>(fg.size()));
        long long fg_pixels = 0;
        for (Eigen::Index i = 0; i < fg.size(); ++i) {
            bool v = false;
            if (ids[i] >= 0) {
                v = references[static_cast<std::size_t>(ids[i])].foreground;
            } else if (fg.data()[i] || bg.data()[i]) {
                v = fg.data()[i] != 0;
            } else {
                v = nearest_verdict(i);
            }
            verdict[static_cast<std::size_t>(i)] = v ? 1 : 0;
            fg_pixels += v ? 1 : 0;
        }
        std::lock_guard lock(stats_mutex);
        result.seeds_per_run = static_cast<long long>(seeds.size());
        result.grown_clusters +=
            std::count_if(clusters.sizes.begin(), clusters.sizes.end(), [](long long s) { return s > 1; });
        result.foreground_votes += fg_pixels;
        return verdict;
    });
    result.mask = final_vote(counts, params.mc_runs);
    return result;
}

} // namespace bloomseg
