#pragma once

#include <span>
#include <string>
#include <vector>

#include "bloomseg/rgr.hpp"
#include "bloomseg/types.hpp"

namespace bloomseg {

/// Pixel-level confusion counts and the ratios derived from them.
///
/// Empty denominators resolve so that an empty prediction of an empty truth scores 1:
/// precision is 1 when TP + FP = 0, recall is 1 when TP + FN = 0, IoU is 1 when
/// TP + FP + FN = 0, and F1 is 0 when precision + recall = 0.
struct EvalReport {
    long long true_positives = 0;
    long long false_positives = 0;
    long long false_negatives = 0;
    long long true_negatives = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    double iou = 1.0;

    static EvalReport from_counts(long long tp, long long fp, long long fn, long long tn);
};

EvalReport compare(const SegMask& prediction, const SegMask& truth);

/// Macro average: ratios are means over reports, counts are summed.
EvalReport mean_report(std::span<const EvalReport> reports);

/// Hue statistics are circular (degrees); saturation and value are in percent.
struct HsvStats {
    double mu_h = 0.0;
    double iqr_h = 0.0;
    double mu_s = 0.0;
    double iqr_s = 0.0;
    double mu_v = 0.0;
    double iqr_v = 0.0;
    long long pixels = 0;
};

/// Pools every selected pixel of every image. With masks, only mask == 1 pixels count.
/// The hue IQR is taken after unwrapping hues to (mean - 180, mean + 180].
HsvStats dataset_stats(std::span<const RasterImage> images, std::span<const SegMask> masks = {});

/// Linear-interpolated quantile of sorted data (numpy "linear", Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double q);

struct SweepPoint {
    double tau0 = 0.0;
    EvalReport mean;
};

/// Refines every normalized foreground map at each tau0 (tau_f = 1.25 * tau0, tau_b kept)
/// and averages metrics over images. Points come back in the order of `taus`.
std::vector<SweepPoint> sweep_tau0(std::span<const RasterImage> images, std::span<const ScoreMap> fg_normalized,
                                   std::span<const SegMask> truths, const RgrParams& base,
                                   std::span<const double> taus, int workers = 1);

// Serialization
std::string report_to_text(const EvalReport& report);
std::string reports_to_json(std::span<const std::string> names, std::span<const EvalReport> reports,
                            const EvalReport& aggregate);
std::string sweep_to_csv(std::span<const SweepPoint> points);
std::string format_stats_table(std::span<const std::string> names, std::span<const HsvStats> stats);

} // namespace bloomseg
