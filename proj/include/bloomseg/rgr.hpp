#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bloomseg/types.hpp"

namespace bloomseg {

/// Which map the background confidence threshold is applied to.
enum class BackgroundRule {
    /// R_B = { q : M~_F(q) < tau_b }
    ForegroundBelow,
    /// R_B = { q : M~_B(q) > tau_b }, i.e. M~_F(q) < 1 - tau_b
    BackgroundAbove,
};

struct RgrParams {
    double tau0 = 0.3;
    double tau_b = 0.1;
    double tau_f = 0.375;
    int mc_runs = 5;
    double seed_fraction = 0.25;
    /// Maximum Euclidean distance in RGB/255 units between a pixel and a cluster's mean color.
    double theta = 0.1;
    std::uint64_t rng_seed = 0;
    BackgroundRule background_rule = BackgroundRule::ForegroundBelow;

    /// Copy with tau0 replaced and tau_f re-derived as 1.25 * tau0.
    RgrParams with_tau0(double tau) const;
    void validate() const;
};

enum class Confidence : std::uint8_t { Uncertain = 0, Foreground = 1, Background = 2 };

struct ConfidencePartition {
    /// One Confidence value per pixel.
    Plane<std::uint8_t> labels;
    long long foreground = 0;
    long long background = 0;
    long long uncertain = 0;
};

/// Pixels matching both bands (possible only when the foreground threshold sits below
/// the background one) are left uncertain, so the three sets always partition the image.
ConfidencePartition partition_confidence(const ScoreMap& fg_normalized, const RgrParams& params);

/// Cluster assignment of a single Monte Carlo run. Pixels never reached by growth keep
/// id -1 and act as singleton clusters.
struct ClusterMap {
    Plane<std::int32_t> ids;
    std::vector<long long> sizes;
    /// Mean color per cluster, RGB in [0, 255].
    std::vector<Eigen::Vector3d> means;
};

/// Seeded best-first growth: each seed floods 4-adjacent pixels whose color lies within
/// `theta` of the cluster's running mean, in order of increasing distance, before the
/// next seed starts. Seeds already absorbed by an earlier cluster are skipped.
ClusterMap grow_clusters(const RasterImage& image, std::span<const std::int32_t> seeds, double theta);

/// Seeds for Monte Carlo run `run`: ceil(fraction * |candidates|) distinct candidates in
/// random order, drawn from a stream that depends only on (rng_seed, run).
std::vector<std::int32_t> sample_seeds(std::span<const std::int32_t> candidates, double fraction,
                                       std::uint64_t rng_seed, int run);

struct RefineResult {
    SegMask mask;
    /// Set when there were no confident pixels and the mask is M~_F > tau0.
    bool used_fallback = false;
    std::vector<std::string> warnings;
    long long seeds_per_run = 0;
    /// Clusters with at least two pixels, summed over runs.
    long long grown_clusters = 0;
    /// Pixels with a foreground verdict, summed over runs.
    long long foreground_votes = 0;
};

/// Monte Carlo region growing refinement of a normalized foreground map.
/// `workers` bounds how many runs execute concurrently; the result does not depend on it.
RefineResult refine(const RasterImage& image, const ScoreMap& fg_normalized, const RgrParams& params,
                    int workers = 1);

/// Scribble-seeded variant: strokes replace the confidence bands and clusters are
/// decided by their stroke pixel counts.
RefineResult refine_from_scribbles(const RasterImage& image, const SegMask& fg_strokes, const SegMask& bg_strokes,
                                   const RgrParams& params, int workers = 1);

} // namespace bloomseg
