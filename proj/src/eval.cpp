#include "bloomseg/eval.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "bloomseg/hsv.hpp"

namespace bloomseg {

EvalReport EvalReport::from_counts(long long tp, long long fp, long long fn, long long tn) {
    EvalReport r;
    r.true_positives = tp;
    r.false_positives = fp;
    r.false_negatives = fn;
    r.true_negatives = tn;
    r.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.iou = tp + fp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    return r;
}

EvalReport compare(const SegMask& prediction, const SegMask& truth) {
    if (prediction.width() != truth.width() || prediction.height() != truth.height()) {
        throw Error(ErrorCode::ShapeMismatch, "prediction and truth masks differ in size");
    }
    const auto p = prediction.values().cast<long long>();
    const auto t = truth.values().cast<long long>();
    const long long tp = (p * t).sum();
    const long long predicted = p.sum();
    const long long actual = t.sum();
    const long long total = static_cast<long long>(prediction.values().size());
    return EvalReport::from_counts(tp, predicted - tp, actual - tp, total - predicted - actual + tp);
}

EvalReport mean_report(std::span<const EvalReport> reports) {
    if (reports.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no reports to aggregate");
    }
    EvalReport m;
    m.precision = m.recall = m.f1 = m.iou = 0.0;
    for (const auto& r : reports) {
        m.true_positives += r.true_positives;
        m.false_positives += r.false_positives;
        m.false_negatives += r.false_negatives;
        m.true_negatives += r.true_negatives;
        m.precision += r.precision;
        m.recall += r.recall;
        m.f1 += r.f1;
        m.iou += r.iou;
    }
    const auto n = static_cast<double>(reports.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    m.iou /= n;
    return m;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw Error(ErrorCode::EmptySelection, "quantile of an empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

struct Weighted {
    double value;
    long long count;
};

// Same convention as quantile_sorted, over a run-length encoded sorted sample.
double weighted_quantile(const std::vector<Weighted>& sorted, long long total, double q) {
    const double pos = q * static_cast<double>(total - 1);
    const auto lo = static_cast<long long>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    auto at_rank = [&](long long rank) {
        long long seen = 0;
        for (const auto& w : sorted) {
            seen += w.count;
            if (rank < seen) return w.value;
        }
        return sorted.back().value;
    };
    const double a = at_rank(lo);
    const double b = at_rank(std::min(lo + 1, total - 1));
    return a + frac * (b - a);
}

std::vector<Weighted> sorted_runs(std::vector<Weighted> values) {
    std::sort(values.begin(), values.end(), [](const Weighted& a, const Weighted& b) { return a.value < b.value; });
    std::vector<Weighted> runs;
    for (const auto& v : values) {
        if (!runs.empty() && runs.back().value == v.value) {
            runs.back().count += v.count;
        } else {
            runs.push_back(v);
        }
    }
    return runs;
}

double weighted_mean(const std::vector<Weighted>& runs, long long total) {
    double sum = 0.0;
    for (const auto& w : runs) sum += w.value * static_cast<double>(w.count);
    return sum / static_cast<double>(total);
}

} // namespace

HsvStats dataset_stats(std::span<const RasterImage> images, std::span<const SegMask> masks) {
    if (!masks.empty() && masks.size() != images.size()) {
        throw Error(ErrorCode::CountMismatch, "need one mask per image");
    }
    // A color histogram makes the result independent of image order and bounds memory.
    std::vector<long long> histogram(std::size_t{1} << 24, 0);
    long long total = 0;
    for (std::size_t k = 0; k < images.size(); ++k) {
        const RasterImage& image = images[k];
        const SegMask* mask = masks.empty() ? nullptr : &masks[k];
        if (mask && (mask->width() != image.width() || mask->height() != image.height())) {
            throw Error(ErrorCode::ShapeMismatch, "mask does not match its image");
        }
        const auto data = image.data();
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) {
                if (mask && !(*mask)(x, y)) continue;
                const std::size_t i = (static_cast<std::size_t>(y) * image.width() + x) * 3;
                ++histogram[(std::size_t{data[i]} << 16) | (std::size_t{data[i + 1]} << 8) | data[i + 2]];
                ++total;
            }
        }
    }
    if (total == 0) {
        throw Error(ErrorCode::EmptySelection, "no pixels selected");
    }

    std::vector<Weighted> hues, sats, vals;
    double sum_cos = 0.0;
    double sum_sin = 0.0;
    constexpr double kDeg = std::numbers::pi / 180.0;
    for (std::size_t key = 0; key < histogram.size(); ++key) {
        const long long count = histogram[key];
        if (count == 0) continue;
        const Hsv hsv = rgb_to_hsv({static_cast<std::uint8_t>(key >> 16), static_cast<std::uint8_t>((key >> 8) & 0xFF),
                                    static_cast<std::uint8_t>(key & 0xFF)});
        hues.push_back({hsv.h, count});
        sats.push_back({hsv.s * 100.0, count});
        vals.push_back({hsv.v * 100.0, count});
        sum_cos += static_cast<double>(count) * std::cos(hsv.h * kDeg);
        sum_sin += static_cast<double>(count) * std::sin(hsv.h * kDeg);
    }

    HsvStats stats;
    stats.pixels = total;
    const double resultant = std::hypot(sum_cos, sum_sin) / static_cast<double>(total);
    double mean_h = resultant < 1e-12 ? 0.0 : std::atan2(sum_sin, sum_cos) / kDeg;
    if (mean_h < 0.0) mean_h += 360.0;
    if (mean_h >= 360.0 - 1e-9 || mean_h < 1e-9) mean_h = 0.0;
    stats.mu_h = mean_h;

    for (auto& w : hues) {
        while (w.value > mean_h + 180.0) w.value -= 360.0;
        while (w.value <= mean_h - 180.0) w.value += 360.0;
    }
    const auto hue_runs = sorted_runs(std::move(hues));
    const auto sat_runs = sorted_runs(std::move(sats));
    const auto val_runs = sorted_runs(std::move(vals));
    auto iqr = [&](const std::vector<Weighted>& runs) {
        return weighted_quantile(runs, total, 0.75) - weighted_quantile(runs, total, 0.25);
    };
    stats.iqr_h = iqr(hue_runs);
    stats.mu_s = weighted_mean(sat_runs, total);
    stats.iqr_s = iqr(sat_runs);
    stats.mu_v = weighted_mean(val_runs, total);
    stats.iqr_v = iqr(val_runs);
    return stats;
}

std::vector<SweepPoint> sweep_tau0(std::span<const RasterImage> images, std::span<const ScoreMap> fg_normalized,
                                   std::span<const SegMask> truths, const RgrParams& base,
                                   std::span<const double> taus, int workers) {
    if (taus.empty()) {
        throw Error(ErrorCode::InvalidArgument, "tau0 sweep needs at least one value");
    }
    if (images.empty()) {
        throw Error(ErrorCode::EmptyDataset, "tau0 sweep needs at least one image");
    }
    if (fg_normalized.size() != images.size() || truths.size() != images.size()) {
        throw Error(ErrorCode::CountMismatch, "images, score maps and truths must pair up");
    }
    std::vector<SweepPoint> points;
    points.reserve(taus.size());
    for (const double tau : taus) {
        const RgrParams params = base.with_tau0(tau);
        std::vector<EvalReport> reports;
        for (std::size_t i = 0; i < images.size(); ++i) {
            const RefineResult refined = refine(images[i], fg_normalized[i], params, workers);
            reports.push_back(compare(refined.mask, truths[i]));
        }
        points.push_back({tau, mean_report(reports)});
    }
    return points;
}

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

nlohmann::ordered_json report_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["true_positives"] = r.true_positives;
    j["false_positives"] = r.false_positives;
    j["false_negatives"] = r.false_negatives;
    j["true_negatives"] = r.true_negatives;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["iou"] = r.iou;
    return j;
}

} // namespace

std::string report_to_text(const EvalReport& r) {
    std::ostringstream out;
    out << "true_positives=" << r.true_positives << '\n'
        << "false_positives=" << r.false_positives << '\n'
        << "false_negatives=" << r.false_negatives << '\n'
        << "true_negatives=" << r.true_negatives << '\n'
        << "precision=" << fixed(r.precision) << '\n'
        << "recall=" << fixed(r.recall) << '\n'
        << "f1=" << fixed(r.f1) << '\n'
        << "iou=" << fixed(r.iou) << '\n';
    return out.str();
}

std::string reports_to_json(std::span<const std::string> names, std::span<const EvalReport> reports,
                            const EvalReport& aggregate) {
    nlohmann::ordered_json images = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        nlohmann::ordered_json entry;
        entry["name"] = i < names.size() ? names[i] : std::to_string(i);
        entry.update(report_json(reports[i]));
        images.push_back(std::move(entry));
    }
    nlohmann::ordered_json doc;
    doc["images"] = std::move(images);
    doc["aggregate"] = report_json(aggregate);
    return doc.dump(2) + "\n";
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
    std::ostringstream out;
    out << "tau0,precision,recall,f1,iou\n";
    for (const auto& p : points) {
        out << fixed(p.tau0, 4) << ',' << fixed(p.mean.precision) << ',' << fixed(p.mean.recall) << ','
            << fixed(p.mean.f1) << ',' << fixed(p.mean.iou) << '\n';
    }
    return out.str();
}

std::string format_stats_table(std::span<const std::string> names, std::span<const HsvStats> stats) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %15s %15s %15s\n", "", "H [0-360 deg]", "S [%]", "V [%]");
    out << line;
    std::snprintf(line, sizeof line, "%-12s %7s %7s %7s %7s %7s %7s\n", "Dataset", "mu_H", "IQR_H", "mu_S", "IQR_S",
                  "mu_V", "IQR_V");
    out << line;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        std::snprintf(line, sizeof line, "%-12s %7.1f %7.1f %7.1f %7.1f %7.1f %7.1f\n",
                      i < names.size() ? names[i].c_str() : "", s.mu_h, s.iqr_h, s.mu_s, s.iqr_s, s.mu_v, s.iqr_v);
        out << line;
    }
    return out.str();
}

} // namespace bloomseg
