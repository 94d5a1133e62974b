#include "bloomseg/service.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>

#include "bloomseg/image_io.hpp"
#include "bloomseg/pipeline.hpp"
#include "bloomseg/rgr.hpp"
#include "bloomseg/scoremap_io.hpp"

// after Eigen: <resolv.h> defines a _res macro that collides with Eigen parameter names
#include "httplib.h"
#include "json.hpp"

namespace bloomseg {

namespace {

using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

enum class StrokeLabel : std::uint8_t { None = 0, Foreground = 1, Background = 2 };
enum class RefineMode { Scribbles, Scoremap };

struct Session {
    std::mutex mutex;
    Clock::time_point last_used;
    RasterImage image;
    /// Per-pixel StrokeLabel; a pixel carries at most one class.
    Plane<std::uint8_t> strokes;
    RgrParams params;
    std::optional<ScoreMap> foreground;
    std::optional<SegMask> mask;
    std::optional<RefineMode> mode;
};

// Thrown by handlers and mapped to a JSON error response.
struct HttpError {
    int status;
    std::string message;
};

struct StrokeRequest {
    StrokeLabel label;
    int radius;
    std::vector<PixelIndex> points;
};

constexpr int kMaxRadius = 1024;
constexpr double kMaxCoordinate = 1e6;

std::vector<StrokeRequest> parse_strokes(const std::string& body) {
    Json doc;
    try {
        doc = Json::parse(body);
    } catch (const Json::exception&) {
        throw HttpError{422, "body is not valid JSON"};
    }
    const Json* list = &doc;
    if (doc.is_object()) {
        if (!doc.contains("strokes")) throw HttpError{422, "missing 'strokes'"};
        list = &doc["strokes"];
    }
    if (!list->is_array()) throw HttpError{422, "'strokes' must be an array"};

    std::vector<StrokeRequest> strokes;
    for (const auto& s : *list) {
        if (!s.is_object()) throw HttpError{422, "each stroke must be an object"};
        StrokeRequest req{};
        const auto label = s.value("label", std::string{});
        if (label == "fg") req.label = StrokeLabel::Foreground;
        else if (label == "bg") req.label = StrokeLabel::Background;
        else if (label == "erase") req.label = StrokeLabel::None;
        else throw HttpError{422, "stroke label must be fg, bg or erase"};

        const auto radius = s.find("radius");
        if (radius == s.end()) {
            req.radius = 0;
        } else if (radius->is_number_integer() && radius->get<long long>() >= 0 &&
                   radius->get<long long>() <= kMaxRadius) {
            req.radius = radius->get<int>();
        } else {
            throw HttpError{422, "radius must be an integer in [0, " + std::to_string(kMaxRadius) + "]"};
        }

        const auto points = s.find("points");
        if (points == s.end() || !points->is_array() || points->empty()) {
            throw HttpError{422, "stroke needs a non-empty 'points' array"};
        }
        for (const auto& p : *points) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw HttpError{422, "points must be [x, y] number pairs"};
            }
            const double x = p[0].get<double>();
            const double y = p[1].get<double>();
            if (!std::isfinite(x) || !std::isfinite(y) || std::abs(x) > kMaxCoordinate ||
                std::abs(y) > kMaxCoordinate) {
                throw HttpError{422, "point coordinates out of range"};
            }
            req.points.push_back({static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))});
        }
        strokes.push_back(std::move(req));
    }
    return strokes;
}

// Bresenham walk from a to b, stamping a disk at every step. Later stamps overwrite.
void rasterize(const StrokeRequest& stroke, Plane<std::uint8_t>& labels) {
    const int w = static_cast<int>(labels.cols());
    const int h = static_cast<int>(labels.rows());
    const int r = stroke.radius;
    const auto value = static_cast<std::uint8_t>(stroke.label);
    auto stamp = [&](int cx, int cy) {
        if (cx + r < 0 || cy + r < 0 || cx - r >= w || cy - r >= h) return;
        for (int dy = -r; dy <= r; ++dy) {
            const int y = cy + dy;
            if (y < 0 || y >= h) continue;
            for (int dx = -r; dx <= r; ++dx) {
                const int x = cx + dx;
                if (x >= 0 && x < w && dx * dx + dy * dy <= r * r) labels(y, x) = value;
            }
        }
    };
    auto line = [&](PixelIndex a, PixelIndex b) {
        int x = a.x, y = a.y;
        const int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
        const int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
        int e = dx + dy;
        for (;;) {
            stamp(x, y);
            if (x == b.x && y == b.y) break;
            const int e2 = 2 * e;
            if (e2 >= dy) {
                e += dy;
                x += sx;
            }
            if (e2 <= dx) {
                e += dx;
                y += sy;
            }
        }
    };
    if (stroke.points.size() == 1) {
        stamp(stroke.points[0].x, stroke.points[0].y);
        return;
    }
    for (std::size_t i = 1; i < stroke.points.size(); ++i) line(stroke.points[i - 1], stroke.points[i]);
}

Json stroke_counts(const Session& s) {
    const auto fg = (s.strokes == static_cast<std::uint8_t>(StrokeLabel::Foreground)).count();
    const auto bg = (s.strokes == static_cast<std::uint8_t>(StrokeLabel::Background)).count();
    return Json{{"foreground", fg}, {"background", bg}};
}

SegMask stroke_mask(const Session& s, StrokeLabel label) {
    return SegMask((s.strokes == static_cast<std::uint8_t>(label)).cast<std::uint8_t>());
}

Json parse_optional_object(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    Json doc;
    try {
        doc = Json::parse(body);
    } catch (const Json::exception&) {
        throw HttpError{422, "body is not valid JSON"};
    }
    if (!doc.is_object()) throw HttpError{422, "body must be a JSON object"};
    return doc;
}

double number_field(const Json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_number()) throw HttpError{422, std::string(key) + " must be a number"};
    return v.get<double>();
}

RgrParams apply_overrides(RgrParams p, const Json& doc) {
    if (doc.contains("tau0")) p = p.with_tau0(number_field(doc, "tau0"));
    if (doc.contains("tau_b")) p.tau_b = number_field(doc, "tau_b");
    if (doc.contains("theta")) p.theta = number_field(doc, "theta");
    if (doc.contains("seed_fraction")) p.seed_fraction = number_field(doc, "seed_fraction");
    if (doc.contains("mc_runs")) {
        if (!doc["mc_runs"].is_number_integer()) throw HttpError{422, "mc_runs must be an integer"};
        p.mc_runs = doc["mc_runs"].get<int>();
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw HttpError{422, "seed must be a non-negative integer"};
        p.rng_seed = doc["seed"].get<std::uint64_t>();
    }
    try {
        p.validate();
    } catch (const Error& e) {
        throw HttpError{422, e.what()};
    }
    return p;
}

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_mask(httplib::Response& res, Session& s, const RefineResult* stats) {
    const auto png = encode_mask_png(*s.mask);
    res.status = 200;
    res.set_content(std::string(png.begin(), png.end()), "image/png");
    res.set_header("X-Mask-Foreground-Pixels", std::to_string(s.mask->count()));
    res.set_header("X-Refine-Mode", s.mode == RefineMode::Scribbles ? "scribbles" : "scoremap");
    res.set_header("X-Tau0", std::to_string(s.params.tau0));
    if (stats) {
        res.set_header("X-Seeds-Per-Run", std::to_string(stats->seeds_per_run));
        res.set_header("X-Grown-Clusters", std::to_string(stats->grown_clusters));
        res.set_header("X-Foreground-Votes", std::to_string(stats->foreground_votes));
        res.set_header("X-Used-Fallback", stats->used_fallback ? "true" : "false");
    }
}

std::string new_session_id() {
    static std::atomic<std::uint64_t> counter{0};
    static const std::uint64_t salt = [] {
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }();
    std::uint64_t x = salt + 0x9E3779B97F4A7C15ull * ++counter;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    x ^= x >> 31;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

} // namespace

struct AnnotationServer::Impl {
    ServiceConfig config;
    httplib::Server server;
    mutable std::mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<Session>> sessions;

    explicit Impl(ServiceConfig c) : config(std::move(c)) {
        server.set_payload_max_length(config.max_upload_bytes);
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Expose-Headers",
                                     "X-Mask-Foreground-Pixels, X-Refine-Mode, X-Tau0, X-Seeds-Per-Run, "
                                     "X-Grown-Clusters, X-Foreground-Votes, X-Used-Fallback"}});
        routes();
    }

    void evict_expired() {
        const auto now = Clock::now();
        std::lock_guard lock(sessions_mutex);
        for (auto it = sessions.begin(); it != sessions.end();) {
            if (now - it->second->last_used > config.session_ttl) {
                it = sessions.erase(it);
            } else {
                ++it;
            }
        }
    }

    std::shared_ptr<Session> find(const httplib::Request& req) {
        evict_expired();
        std::lock_guard lock(sessions_mutex);
        const auto it = sessions.find(req.path_params.at("id"));
        if (it == sessions.end()) throw HttpError{404, "unknown session"};
        it->second->last_used = Clock::now();
        return it->second;
    }

    // Runs `fn` and turns failures into JSON error responses.
    template <typename Fn>
    static httplib::Server::Handler guarded(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const HttpError& e) {
                send_json(res, e.status, Json{{"error", e.message}});
            } catch (const Error& e) {
                send_json(res, 422, Json{{"error", e.what()}, {"code", to_string(e.code())}});
            } catch (const std::exception& e) {
                send_json(res, 500, Json{{"error", e.what()}});
            }
        };
    }

    void routes() {
        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok\n", "text/plain");
        });

        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            if (req.body.size() > config.max_upload_bytes) throw HttpError{413, "image too large"};
            const auto* bytes = reinterpret_cast<const std::uint8_t*>(req.body.data());
            RasterImage image;
            try {
                image = decode_image(std::span(bytes, req.body.size()));
            } catch (const Error& e) {
                throw HttpError{415, e.what()};
            }
            auto session = std::make_shared<Session>();
            session->last_used = Clock::now();
            session->strokes = Plane<std::uint8_t>::Zero(image.height(), image.width());
            session->params.rng_seed = config.seed;
            const int w = image.width(), h = image.height();
            session->image = std::move(image);
            const std::string id = new_session_id();
            evict_expired();
            {
                std::lock_guard lock(sessions_mutex);
                sessions.emplace(id, std::move(session));
            }
            send_json(res, 201, Json{{"id", id}, {"width", w}, {"height", h}});
        }));

        server.Delete("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(sessions_mutex);
            if (sessions.erase(req.path_params.at("id")) == 0) throw HttpError{404, "unknown session"};
            res.status = 204;
        }));

        server.Post("/sessions/:id/strokes", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto session = find(req);
            const auto strokes = parse_strokes(req.body);
            std::lock_guard lock(session->mutex);
            for (const auto& s : strokes) rasterize(s, session->strokes);
            send_json(res, 200, stroke_counts(*session));
        }));

        server.Post("/sessions/:id/scoremap", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto session = find(req);
            std::lock_guard lock(session->mutex);
            const bool json = req.get_header_value("Content-Type").starts_with("application/json");
            ScorePair raw;
            if (json) {
                const Json doc = parse_optional_object(req.body);
                PipelineConfig pc;
                pc.workers = config.workers;
                pc.tiles.tile_size = doc.value("tile_size", pc.tiles.tile_size);
                pc.tiles.overlap_fraction = doc.value("overlap", pc.tiles.overlap_fraction);
                const auto scorer = doc.value("scorer", std::string("hsv"));
                if (scorer != "hsv") throw HttpError{422, "only the hsv scorer can run server-side"};
                HsvThresholds t;
                if (doc.contains("thresholds")) {
                    const Json& j = doc["thresholds"];
                    t.hue_lo = j.value("hue_lo", t.hue_lo);
                    t.hue_hi = j.value("hue_hi", t.hue_hi);
                    t.sat_lo = j.value("sat_lo", t.sat_lo);
                    t.sat_hi = j.value("sat_hi", t.sat_hi);
                    t.val_lo = j.value("val_lo", t.val_lo);
                    t.val_hi = j.value("val_hi", t.val_hi);
                    t.min_region_area = j.value("min_region_area", t.min_region_area);
                }
                t.validate();
                pc.scorer = HsvBaselineScorer{t};
                raw = fused_scores(session->image, pc);
            } else {
                const auto* bytes = reinterpret_cast<const std::uint8_t*>(req.body.data());
                raw = decode_scores(std::span(bytes, req.body.size()));
                if (raw.foreground.width() != session->image.width() ||
                    raw.foreground.height() != session->image.height()) {
                    throw HttpError{422, "score map size does not match the image"};
                }
            }
            session->foreground = normalize(raw.foreground, raw.background).foreground;
            send_json(res, 200,
                      Json{{"width", session->foreground->width()},
                           {"height", session->foreground->height()},
                           {"mean_foreground", session->foreground->values().mean()}});
        }));

        server.Post("/sessions/:id/refine", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto session = find(req);
            const Json doc = parse_optional_object(req.body);
            std::lock_guard lock(session->mutex);
            const RgrParams params = apply_overrides(session->params, doc);
            const auto counts = stroke_counts(*session);
            const bool have_strokes = counts["foreground"] > 0 && counts["background"] > 0;

            RefineMode mode = have_strokes || !session->foreground ? RefineMode::Scribbles : RefineMode::Scoremap;
            if (doc.contains("mode")) {
                const auto m = doc["mode"].is_string() ? doc["mode"].get<std::string>() : std::string{};
                if (m == "scribbles") mode = RefineMode::Scribbles;
                else if (m == "scoremap") mode = RefineMode::Scoremap;
                else throw HttpError{422, "mode must be scribbles or scoremap"};
            }
            RefineResult result;
            if (mode == RefineMode::Scribbles) {
                if (!have_strokes) throw HttpError{409, "need both foreground and background strokes"};
                result = refine_from_scribbles(session->image, stroke_mask(*session, StrokeLabel::Foreground),
                                               stroke_mask(*session, StrokeLabel::Background), params,
                                               config.workers);
            } else {
                if (!session->foreground) throw HttpError{409, "no score map attached"};
                result = refine(session->image, *session->foreground, params, config.workers);
            }
            session->params = params;
            session->mode = mode;
            session->mask = result.mask;
            send_mask(res, *session, &result);
        }));

        server.Patch("/sessions/:id/params", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto session = find(req);
            const Json doc = parse_optional_object(req.body);
            if (!doc.contains("tau0")) throw HttpError{422, "missing tau0"};
            const double tau0 = number_field(doc, "tau0");
            if (!(tau0 > 0.0 && tau0 < 1.0)) throw HttpError{422, "tau0 must lie in (0, 1)"};
            std::lock_guard lock(session->mutex);
            if (!session->foreground || session->mode == RefineMode::Scribbles) {
                throw HttpError{409, "tau0 tuning needs score map mode"};
            }
            RgrParams params = session->params.with_tau0(tau0);
            const RefineResult result = refine(session->image, *session->foreground, params, config.workers);
            session->params = params;
            session->mode = RefineMode::Scoremap;
            session->mask = result.mask;
            send_mask(res, *session, &result);
        }));

        server.Get("/sessions/:id/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto session = find(req);
            std::lock_guard lock(session->mutex);
            if (!session->mask) throw HttpError{409, "no mask yet"};
            send_mask(res, *session, nullptr);
            res.set_header("Content-Disposition", "attachment; filename=\"mask.png\"");
        }));
    }
};

AnnotationServer::AnnotationServer(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool AnnotationServer::listen() { return impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
    if (impl_) impl_->server.stop();
}

bool AnnotationServer::is_running() const { return impl_->server.is_running(); }

void AnnotationServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::size_t AnnotationServer::session_count() const {
    std::lock_guard lock(impl_->sessions_mutex);
    return impl_->sessions.size();
}

} // namespace bloomseg
