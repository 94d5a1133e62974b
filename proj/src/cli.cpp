#include "bloomseg/cli.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "bloomseg/eval.hpp"
#include "bloomseg/image_io.hpp"
#include "bloomseg/pipeline.hpp"
#include "bloomseg/render.hpp"
#include "bloomseg/scoremap_io.hpp"
#include "bloomseg/service.hpp"

namespace bloomseg {

namespace fs = std::filesystem;

std::pair<double, double> whiteness_score(Rgb pixel) noexcept {
    const double darkest = std::min({pixel.r, pixel.g, pixel.b}) / 255.0;
    return {8.0 * (darkest - 0.5), 0.0};
}

namespace {

using Json = nlohmann::json;

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Directories expand to their image files in name order; files are taken as given.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && is_image_file(entry.path())) found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(p)) {
            out.push_back(p);
        } else {
            throw Error(ErrorCode::UnreadableFile, "no such file or directory: " + in);
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no input images found");
    }
    return out;
}

// Pairing key: the file stem without a trailing ".mask", so "a.mask.png" pairs with "a.jpg".
std::string pairing_key(const fs::path& p) {
    std::string stem = p.stem().string();
    constexpr std::string_view suffix = ".mask";
    if (stem.size() > suffix.size() && stem.ends_with(suffix)) stem.resize(stem.size() - suffix.size());
    return stem;
}

std::map<std::string, fs::path> index_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::UnreadableFile, "not a directory: " + dir.string());
    }
    std::map<std::string, fs::path> index;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
        const auto [it, inserted] = index.emplace(pairing_key(entry.path()), entry.path());
        if (!inserted) {
            throw Error(ErrorCode::UnpairedFiles, "ambiguous names in " + dir.string() + ": " +
                                                      it->second.filename().string() + " and " +
                                                      entry.path().filename().string());
        }
    }
    return index;
}

// Truth masks for `images`, looked up by pairing key.
std::vector<fs::path> truths_for(const std::vector<fs::path>& images, const fs::path& truth_dir) {
    const auto index = index_directory(truth_dir);
    std::vector<fs::path> out;
    std::vector<std::string> missing;
    for (const auto& img : images) {
        const auto it = index.find(pairing_key(img));
        if (it == index.end()) {
            missing.push_back(img.filename().string());
        } else {
            out.push_back(it->second);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::UnpairedFiles, "no truth mask for: " + list);
    }
    return out;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::IoFailure, "cannot create output directory " + dir.string());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::pair<double, double> parse_range(const std::string& text, const char* what) {
    double lo = 0, hi = 0;
    char comma = 0;
    std::istringstream in(text);
    if (!(in >> lo >> comma >> hi) || comma != ',' || !in.eof()) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be given as lo,hi");
    }
    return {lo, hi};
}

HsvThresholds thresholds_from_json(const Json& j) {
    HsvThresholds t;
    t.hue_lo = j.value("hue_lo", t.hue_lo);
    t.hue_hi = j.value("hue_hi", t.hue_hi);
    t.sat_lo = j.value("sat_lo", t.sat_lo);
    t.sat_hi = j.value("sat_hi", t.sat_hi);
    t.val_lo = j.value("val_lo", t.val_lo);
    t.val_hi = j.value("val_hi", t.val_hi);
    t.min_region_area = j.value("min_region_area", t.min_region_area);
    t.validate();
    return t;
}

Json thresholds_to_json(const HsvThresholds& t) {
    return Json{{"hue_lo", t.hue_lo}, {"hue_hi", t.hue_hi}, {"sat_lo", t.sat_lo},         {"sat_hi", t.sat_hi},
                {"val_lo", t.val_lo}, {"val_hi", t.val_hi}, {"min_region_area", t.min_region_area}};
}

Json read_json_file(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return Json::parse(bytes.begin(), bytes.end());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
    }
}

// Options shared by every command that runs the pipeline.
struct PipelineOptions {
    int tile_size = 321;
    double overlap = 0.10;
    std::string scorer = "hsv";
    std::string scores_dir;
    std::string hsv_config;
    std::string hue, sat, val;
    long long min_area = -1;
    double tau0 = 0.3;
    double tau_b = 0.1;
    int mc_runs = 5;
    double theta = 0.1;
    double seed_fraction = 0.25;
    std::uint64_t seed = 0;
    int workers = 1;
    bool threshold_only = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--tile-size", tile_size, "Tile (portrait) side in pixels; 155 suits ~2.7K-wide images")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd.add_option("--overlap", overlap, "Overlap between neighboring tiles as a fraction of the tile size")
            ->capture_default_str()
            ->check(CLI::Range(0.0, 0.999));
        cmd.add_option("--scorer", scorer, "Tile scorer")
            ->capture_default_str()
            ->check(CLI::IsMember({"hsv", "precomputed", "oracle"}));
        cmd.add_option("--scores-dir", scores_dir, "Directory of <stem>.tile<index>.bsgs files (precomputed scorer)");
        cmd.add_option("--hsv-config", hsv_config, "JSON file with HSV thresholds, e.g. gridsearch output");
        cmd.add_option("--hue", hue, "Hue interval in degrees as lo,hi (wraps when lo > hi)");
        cmd.add_option("--sat", sat, "Saturation interval in [0, 1] as lo,hi");
        cmd.add_option("--val", val, "Value interval in [0, 1] as lo,hi");
        cmd.add_option("--min-area", min_area, "Minimum connected region area for the HSV scorer");
        cmd.add_option("--tau0", tau0, "Vote threshold")->capture_default_str();
        cmd.add_option("--tau-b", tau_b, "Background confidence threshold")->capture_default_str();
        cmd.add_option("--mc-runs", mc_runs, "Monte Carlo runs")->capture_default_str();
        cmd.add_option("--theta", theta, "Region growing color distance threshold")->capture_default_str();
        cmd.add_option("--seed-fraction", seed_fraction, "Fraction of confident pixels used as seeds")
            ->capture_default_str();
        cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd.add_option("--workers", workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        cmd.add_flag("--threshold-only", threshold_only, "Skip refinement and threshold at tau0");
    }

    PipelineConfig build() const {
        PipelineConfig config;
        config.tiles = TileSpec{tile_size, overlap};
        config.tiles.validate();
        config.rgr = RgrParams{}.with_tau0(tau0);
        config.rgr.tau_b = tau_b;
        config.rgr.mc_runs = mc_runs;
        config.rgr.theta = theta;
        config.rgr.seed_fraction = seed_fraction;
        config.rgr.rng_seed = seed;
        config.rgr.validate();
        config.workers = workers;
        config.threshold_only = threshold_only;
        if (scorer == "precomputed") {
            if (scores_dir.empty()) {
                throw Error(ErrorCode::InvalidArgument, "--scorer precomputed needs --scores-dir");
            }
            if (!fs::is_directory(scores_dir)) {
                throw Error(ErrorCode::UnreadableFile, "scores directory not found: " + scores_dir);
            }
            config.scorer = PrecomputedScorer{scores_dir};
        } else if (scorer == "oracle") {
            config.scorer = SyntheticOracleScorer{whiteness_score};
        } else {
            HsvThresholds t = hsv_config.empty() ? HsvThresholds{} : thresholds_from_json(read_json_file(hsv_config));
            if (!hue.empty()) std::tie(t.hue_lo, t.hue_hi) = parse_range(hue, "--hue");
            if (!sat.empty()) std::tie(t.sat_lo, t.sat_hi) = parse_range(sat, "--sat");
            if (!val.empty()) std::tie(t.val_lo, t.val_hi) = parse_range(val, "--val");
            if (min_area >= 0) t.min_region_area = min_area;
            t.validate();
            config.scorer = HsvBaselineScorer{t};
        }
        return config;
    }
};

// Files written for the image in progress; removed unless commit() is reached.
class OutputGuard {
public:
    ~OutputGuard() {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
    void add(fs::path p) { written_.push_back(std::move(p)); }
    void commit() { written_.clear(); }

private:
    std::vector<fs::path> written_;
};

int cmd_segment(const std::vector<std::string>& inputs, const PipelineOptions& options, const fs::path& out_dir,
                bool overlay, const std::string& truth_dir, bool save_scores, std::ostream& out) {
    const PipelineConfig config = options.build();
    const auto images = expand_inputs(inputs);
    std::vector<fs::path> truths;
    if (!truth_dir.empty()) truths = truths_for(images, truth_dir);
    ensure_directory(out_dir);

    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string stem = images[i].stem().string();
        const RasterImage image = load_image(images[i]);
        const SegmentResult result = segment(image, config, stem, save_scores);
        for (const auto& w : result.refinement.warnings) out << stem << ": warning: " << w << '\n';

        OutputGuard guard;
        const fs::path mask_path = out_dir / (stem + ".mask.png");
        guard.add(mask_path);
        save_mask(result.mask, mask_path);
        if (overlay) {
            const fs::path overlay_path = out_dir / (stem + ".overlay.png");
            guard.add(overlay_path);
            std::optional<SegMask> truth;
            if (!truths.empty()) truth = load_mask(truths[i]);
            save_image(render_overlay(image, result.mask, truth ? &*truth : nullptr), overlay_path);
        }
        if (save_scores) {
            const fs::path scores_path = out_dir / (stem + ".scores.bsgs");
            guard.add(scores_path);
            write_scores(scores_path, result.raw->foreground, result.raw->background);
        }
        guard.commit();
        out << stem << ": " << result.mask.count() << " foreground pixels -> " << mask_path.string() << '\n';
    }
    return 0;
}

int cmd_evaluate(const fs::path& pred_dir, const fs::path& truth_dir, const std::string& out_dir, std::ostream& out) {
    const auto preds = index_directory(pred_dir);
    const auto truths = index_directory(truth_dir);
    std::vector<std::string> unpaired;
    for (const auto& [key, path] : preds) {
        if (!truths.count(key)) unpaired.push_back(path.filename().string());
    }
    for (const auto& [key, path] : truths) {
        if (!preds.count(key)) unpaired.push_back(path.filename().string());
    }
    if (!unpaired.empty()) {
        std::string list;
        for (const auto& u : unpaired) list += (list.empty() ? "" : ", ") + u;
        throw Error(ErrorCode::UnpairedFiles, "files without a counterpart: " + list);
    }
    if (preds.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no masks to evaluate");
    }

    std::vector<std::string> names;
    std::vector<EvalReport> reports;
    for (const auto& [key, path] : preds) {
        names.push_back(key);
        reports.push_back(compare(load_mask(path), load_mask(truths.at(key))));
    }
    const EvalReport aggregate = mean_report(reports);
    if (!out_dir.empty()) {
        ensure_directory(out_dir);
        write_text(fs::path(out_dir) / "evaluation.json", reports_to_json(names, reports, aggregate));
        write_text(fs::path(out_dir) / "evaluation.txt", report_to_text(aggregate));
    }
    out << "images=" << reports.size() << '\n' << report_to_text(aggregate);
    return 0;
}

std::vector<double> default_taus() {
    std::vector<double> taus;
    for (int k = 1; k <= 19; ++k) taus.push_back(k * 0.05);
    return taus;
}

int cmd_sweep(const std::vector<std::string>& inputs, const fs::path& truth_dir, const PipelineOptions& options,
              std::vector<double> taus, const fs::path& out_dir, std::ostream& out) {
    const PipelineConfig config = options.build();
    if (taus.empty()) taus = default_taus();
    for (double t : taus) {
        if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidArgument, "tau0 values must lie in (0, 1)");
    }
    const auto paths = expand_inputs(inputs);
    const auto truth_paths = truths_for(paths, truth_dir);
    ensure_directory(out_dir);

    std::vector<RasterImage> images;
    std::vector<std::string> stems;
    std::vector<SegMask> truths;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        images.push_back(load_image(paths[i]));
        stems.push_back(paths[i].stem().string());
        truths.push_back(load_mask(truth_paths[i]));
    }
    const auto points = sweep_tau0(images, stems, truths, config, taus);

    OutputGuard guard;
    const std::string csv = sweep_to_csv(points);
    guard.add(out_dir / "sweep.csv");
    write_text(out_dir / "sweep.csv", csv);
    guard.add(out_dir / "sweep.png");
    save_image(plot_sweep(points), out_dir / "sweep.png");
    guard.commit();
    out << csv;
    return 0;
}

std::string dataset_name(const fs::path& dir) {
    fs::path p = fs::absolute(dir).lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return fs::is_directory(p) ? p.filename().string() : p.stem().string();
}

int cmd_stats(const std::vector<std::string>& datasets, const std::vector<std::string>& mask_dirs,
              const std::string& out_dir, std::ostream& out) {
    if (!mask_dirs.empty() && mask_dirs.size() != datasets.size()) {
        throw Error(ErrorCode::CountMismatch, "give one --masks directory per dataset");
    }
    std::vector<std::string> names;
    std::vector<HsvStats> stats;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        const auto paths = expand_inputs({datasets[d]});
        std::vector<RasterImage> images;
        std::vector<SegMask> masks;
        std::vector<fs::path> mask_paths;
        if (!mask_dirs.empty()) mask_paths = truths_for(paths, mask_dirs[d]);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            images.push_back(load_image(paths[i]));
            if (!mask_paths.empty()) masks.push_back(load_mask(mask_paths[i]));
        }
        names.push_back(dataset_name(datasets[d]));
        stats.push_back(dataset_stats(images, masks));
    }
    const std::string table = format_stats_table(names, stats);
    if (!out_dir.empty()) {
        ensure_directory(out_dir);
        write_text(fs::path(out_dir) / "stats.txt", table);
    }
    out << table;
    return 0;
}

HsvGrid grid_from_json(const Json& j) {
    HsvGrid grid;
    try {
        grid.hue_ranges = j.at("hue").get<std::vector<std::pair<double, double>>>();
        grid.sat_ranges = j.at("sat").get<std::vector<std::pair<double, double>>>();
        grid.val_ranges = j.at("val").get<std::vector<std::pair<double, double>>>();
        grid.min_region_areas = j.value("min_area", std::vector<long long>{0});
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("grid file: ") + e.what());
    }
    if (grid.size() == 0) {
        throw Error(ErrorCode::InvalidSpec, "grid file: every axis needs at least one value");
    }
    return grid;
}

int cmd_gridsearch(const std::vector<std::string>& inputs, const fs::path& truth_dir, const fs::path& grid_file,
                   int workers, const std::string& out_dir, std::ostream& out) {
    const HsvGrid grid = grid_from_json(read_json_file(grid_file));
    for (std::size_t i = 0; i < grid.size(); ++i) grid.at(i).validate();
    const auto paths = expand_inputs(inputs);
    const auto truth_paths = truths_for(paths, truth_dir);
    std::vector<LabeledImage> dataset;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        dataset.push_back({load_image(paths[i]), load_mask(truth_paths[i])});
    }
    const GridSearchResult result = grid_search_hsv(dataset, grid, workers);
    Json doc = thresholds_to_json(result.best);
    doc["grid_index"] = result.best_index;
    doc["grid_size"] = grid.size();
    doc["precision"] = result.report.precision;
    doc["recall"] = result.report.recall;
    doc["f1"] = result.report.f1;
    doc["iou"] = result.report.iou;
    const std::string text = doc.dump(2) + "\n";
    if (!out_dir.empty()) {
        ensure_directory(out_dir);
        write_text(fs::path(out_dir) / "gridsearch.json", text);
    }
    out << text;
    return 0;
}

AnnotationServer* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const std::string& host, int port, const ServiceConfig& config, std::ostream& out) {
    AnnotationServer server(config);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        throw Error(ErrorCode::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
    }
    out << "listening on http://" << host << ':' << bound << std::endl;
    g_server = &server;
    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    server.listen();
    g_server = nullptr;
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flower segmentation from tiled scores with region growing refinement", "bloomseg"};
    app.require_subcommand(1);

    PipelineOptions segment_opts;
    std::vector<std::string> segment_inputs;
    std::string segment_out = ".";
    bool overlay = false;
    std::string overlay_truth;
    bool save_scores = false;
    auto* segment_cmd = app.add_subcommand("segment", "Segment flowers in images");
    segment_cmd->add_option("inputs", segment_inputs, "Image files or directories")->required();
    segment_opts.attach(*segment_cmd);
    segment_cmd->add_option("--out-dir", segment_out, "Where <stem>.mask.png files go")->capture_default_str();
    segment_cmd->add_flag("--overlay", overlay, "Also write <stem>.overlay.png");
    segment_cmd->add_option("--truth-dir", overlay_truth, "Truth masks; overlays then show TP/FN/FP regions");
    segment_cmd->add_flag("--save-scores", save_scores, "Also write the raw fused scores as <stem>.scores.bsgs");

    std::string eval_pred, eval_truth, eval_out;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare predicted masks with truth masks");
    evaluate_cmd->add_option("--pred-dir", eval_pred, "Predicted masks")->required();
    evaluate_cmd->add_option("--truth-dir", eval_truth, "Truth masks, paired by file name")->required();
    evaluate_cmd->add_option("--out-dir", eval_out, "Write evaluation.json and evaluation.txt here");

    PipelineOptions sweep_opts;
    std::vector<std::string> sweep_inputs;
    std::string sweep_truth, sweep_out = ".";
    std::vector<double> taus;
    auto* sweep_cmd = app.add_subcommand("sweep", "Mean metrics as a function of tau0");
    sweep_cmd->add_option("inputs", sweep_inputs, "Image files or directories")->required();
    sweep_cmd->add_option("--truth-dir", sweep_truth, "Truth masks, paired by file name")->required();
    sweep_opts.attach(*sweep_cmd);
    sweep_cmd->add_option("--taus", taus, "tau0 values (default 0.05, 0.10, ..., 0.95)")->delimiter(',');
    sweep_cmd->add_option("--out-dir", sweep_out, "Where sweep.csv and sweep.png go")->capture_default_str();

    std::vector<std::string> stats_inputs, stats_masks;
    std::string stats_out;
    auto* stats_cmd = app.add_subcommand("stats", "HSV statistics per dataset");
    stats_cmd->add_option("datasets", stats_inputs, "One image directory per dataset")->required();
    stats_cmd->add_option("--masks", stats_masks, "Mask directory per dataset; only mask pixels count");
    stats_cmd->add_option("--out-dir", stats_out, "Also write stats.txt here");

    std::vector<std::string> grid_inputs;
    std::string grid_truth, grid_file, grid_out;
    int grid_workers = 1;
    auto* grid_cmd = app.add_subcommand("gridsearch", "Tune HSV thresholds for mean F1");
    grid_cmd->add_option("inputs", grid_inputs, "Image files or directories")->required();
    grid_cmd->add_option("--truth-dir", grid_truth, "Truth masks, paired by file name")->required();
    grid_cmd->add_option("--grid", grid_file, "JSON with hue, sat, val interval lists and min_area values")
        ->required();
    grid_cmd->add_option("--workers", grid_workers, "Worker threads")->check(CLI::PositiveNumber);
    grid_cmd->add_option("--out-dir", grid_out, "Also write gridsearch.json here");

    std::string host = "127.0.0.1";
    int port = 8080;
    ServiceConfig service;
    double max_upload_mb = 64.0;
    long long ttl = 3600;
    auto* serve_cmd = app.add_subcommand("serve", "Run the annotation HTTP service");
    serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
    serve_cmd->add_option("--max-upload-mb", max_upload_mb, "Largest accepted image upload")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    serve_cmd->add_option("--session-ttl", ttl, "Idle seconds before a session is dropped")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    serve_cmd->add_option("--seed", service.seed, "Random seed for new sessions");
    serve_cmd->add_option("--workers", service.workers, "Threads per refinement")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*segment_cmd) {
            return cmd_segment(segment_inputs, segment_opts, segment_out, overlay, overlay_truth, save_scores, out);
        }
        if (*evaluate_cmd) return cmd_evaluate(eval_pred, eval_truth, eval_out, out);
        if (*sweep_cmd) return cmd_sweep(sweep_inputs, sweep_truth, sweep_opts, taus, sweep_out, out);
        if (*stats_cmd) return cmd_stats(stats_inputs, stats_masks, stats_out, out);
        if (*grid_cmd) return cmd_gridsearch(grid_inputs, grid_truth, grid_file, grid_workers, grid_out, out);
        if (*serve_cmd) {
            service.max_upload_bytes = static_cast<std::size_t>(max_upload_mb * 1024.0 * 1024.0);
            service.session_ttl = std::chrono::seconds(ttl);
            return cmd_serve(host, port, service, out);
        }
    } catch (const std::exception& e) {
        err << "bloomseg: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace bloomseg
