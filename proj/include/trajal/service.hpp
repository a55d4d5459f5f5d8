#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <regex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "trajal/active_learning.hpp"
#include "trajal/decision_surface.hpp"
#include "trajal/embed.hpp"
#include "trajal/error.hpp"
#include "trajal/trajectory.hpp"

namespace trajal {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "data";
    std::filesystem::path images_dir = "images";
    std::filesystem::path ui_dir = "ui";
    std::filesystem::path sessions_dir = "sessions";
    unsigned threads = 1;         // numeric kernels per request
    bool derive_features = false; // add avg_speed / max_speed / direction_variance from geometry
    TsneConfig tsne{};
    SurfaceOptions surface{};
    ALConfig session_defaults{};
    double holdout_fraction = 0.2; // simulated sessions
};

namespace detail {

inline std::filesystem::path resolve_against(const std::filesystem::path& base, const std::filesystem::path& p) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

inline void apply_env(ServiceConfig& c) {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    try {
        if (auto v = env("TRAJAL_HOST")) c.host = *v;
        if (auto v = env("TRAJAL_PORT")) c.port = std::stoi(*v);
        if (auto v = env("TRAJAL_DATA_DIR")) c.data_dir = *v;
        if (auto v = env("TRAJAL_IMAGES_DIR")) c.images_dir = *v;
        if (auto v = env("TRAJAL_UI_DIR")) c.ui_dir = *v;
        if (auto v = env("TRAJAL_SESSIONS_DIR")) c.sessions_dir = *v;
        if (auto v = env("TRAJAL_THREADS")) c.threads = static_cast<unsigned>(std::stoul(*v));
    } catch (const std::exception& e) {
        fail(ErrorKind::config, std::string("bad environment override: ") + e.what());
    }
}

} // namespace detail

/// Reads the JSON config (all keys optional), resolves relative directories
/// against the config file's directory, then applies TRAJAL_* environment
/// overrides.
inline ServiceConfig service_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
    ServiceConfig c;
    if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
    try {
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        c.data_dir = detail::resolve_against(base, j.value("data_dir", c.data_dir.string()));
        c.images_dir = detail::resolve_against(base, j.value("images_dir", c.images_dir.string()));
        c.ui_dir = detail::resolve_against(base, j.value("ui_dir", c.ui_dir.string()));
        c.sessions_dir = detail::resolve_against(base, j.value("sessions_dir", c.sessions_dir.string()));
        c.threads = j.value("threads", c.threads);
        c.derive_features = j.value("derive_features", c.derive_features);
        c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
        if (j.contains("tsne")) {
            const auto& t = j.at("tsne");
            c.tsne.perplexity = t.value("perplexity", c.tsne.perplexity);
            c.tsne.iterations = t.value("iterations", c.tsne.iterations);
            c.tsne.seed = t.value("seed", c.tsne.seed);
        }
        if (j.contains("surface")) {
            const auto& s = j.at("surface");
            c.surface.h = s.value("h", c.surface.h);
            c.surface.margin = s.value("margin", c.surface.margin);
            c.surface.ground_truth = s.value("ground_truth", c.surface.ground_truth);
        }
        if (j.contains("session_defaults")) c.session_defaults = al_config_from_json(j.at("session_defaults"));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, std::string("invalid config: ") + e.what());
    }
    detail::apply_env(c);
    return c;
}

inline ServiceConfig load_service_config(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::parse, "config: malformed JSON at byte " + std::to_string(e.byte), {{"byte", e.byte}});
    }
    return service_config_from_json(j, path.parent_path());
}

inline bool valid_dataset_key(std::string_view key) {
    if (key.empty() || key.size() > 128) return false;
    return std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

/// Relative path made of plain segments only (no "..", no absolute roots,
/// no backslashes or NULs).
inline bool safe_relative_path(std::string_view p) {
    if (p.empty() || p.front() == '/' || p.find('\\') != std::string_view::npos || p.find('\0') != std::string_view::npos) {
        return false;
    }
    std::size_t start = 0;
    while (start <= p.size()) {
        const std::size_t end = std::min(p.find('/', start), p.size());
        const auto seg = p.substr(start, end - start);
        if (seg.empty() || seg == "." || seg == "..") return false;
        start = end + 1;
    }
    return true;
}

inline std::string mime_type(const std::filesystem::path& p) {
    static const std::map<std::string, std::string> types = {
        {".html", "text/html; charset=utf-8"}, {".htm", "text/html; charset=utf-8"},
        {".js", "text/javascript"},            {".mjs", "text/javascript"},
        {".css", "text/css"},                  {".json", "application/json"},
        {".geojson", "application/geo+json"},  {".png", "image/png"},
        {".svg", "image/svg+xml"},             {".ico", "image/x-icon"},
        {".txt", "text/plain; charset=utf-8"}, {".csv", "text/csv"},
    };
    auto it = types.find(p.extension().string());
    return it == types.end() ? "application/octet-stream" : it->second;
}

/// HTTP status for a library error.
inline int http_status(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::config: return 400;
    case ErrorKind::protocol: return 422;
    case ErrorKind::degenerate: return 422;
    case ErrorKind::insufficient_points: return 422;
    case ErrorKind::empty_table: return 422;
    case ErrorKind::session_complete: return 410;
    default: return 500;
    }
}

/// Request-level failure carrying its own HTTP status.
struct HttpError : std::runtime_error {
    int status;
    nlohmann::json detail;
    HttpError(int s, const std::string& msg, nlohmann::json d = nlohmann::json::object())
        : std::runtime_error(msg), status(s), detail(std::move(d)) {}
};

/// Loads `<data_dir>/<key>.json` and `<data_dir>/<key>_label.json` and joins them.
inline FeatureTable load_dataset(const std::filesystem::path& data_dir, const std::string& key, bool derive) {
    const auto traj_path = data_dir / (key + ".json");
    const auto label_path = data_dir / (key + "_label.json");
    if (!std::filesystem::is_regular_file(traj_path) || !std::filesystem::is_regular_file(label_path)) {
        fail(ErrorKind::not_found, "dataset \"" + key + "\" not found", {{"key", key}});
    }
    auto records = load_trajectories(traj_path);
    if (derive) {
        for (auto& r : records)
            if (r.points.size() >= 2) r = derive_motion_features(r);
    }
    return assemble_feature_table(records, load_labels(label_path));
}

/// The HTTP/JSON service: the reduction and plot endpoints, the
/// active-learning session protocol and static assets.
class Service {
public:
    explicit Service(ServiceConfig config) : config_(std::move(config)) { routes(); }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    const ServiceConfig& config() const noexcept { return config_; }
    httplib::Server& server() noexcept { return server_; }

    /// Binds config.host:config.port (0 picks a free port); returns the port.
    int bind() {
        int port = config_.port;
        if (port == 0) {
            port = server_.bind_to_any_port(config_.host);
        } else if (!server_.bind_to_port(config_.host, port)) {
            port = -1;
        }
        if (port < 0) fail(ErrorKind::io, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
        bound_port_ = port;
        return port;
    }

    /// Blocks until stop().
    void run() { server_.listen_after_bind(); }

    void stop() { server_.stop(); }
    void wait_until_ready() const { server_.wait_until_ready(); }
    int port() const noexcept { return bound_port_; }

    // Endpoint bodies, callable without HTTP.

    nlohmann::json reduction(const std::string& key) {
        check_key(key);
        std::lock_guard key_lock(key_mutex(key));
        FeatureTable table = load_dataset(config_.data_dir, key, config_.derive_features);
        export_csv(table, csv_path(key));
        if (table.size() < 3) {
            throw HttpError(422, "t-SNE needs at least 3 merged rows", {{"n", table.size()}});
        }
        TsneConfig tc = config_.tsne;
        tc.threads = config_.threads;
        const EmbedResult er = embed_pipeline(table, tc);
        if (!er.tsne2) throw HttpError(422, er.tsne_error ? er.tsne_error->what() : "t-SNE unavailable");
        return {{"reduced_data", rows_of(er.pca2.coords)},
                {"label", table.labels},
                {"tsne", rows_of(er.tsne2->coords)},
                {"tid", table.tids},
                {"perplexity", er.perplexity}};
    }

    nlohmann::json plots(const std::string& key, const std::optional<std::string>& color_scale_text) {
        check_key(key);
        FeatureTable table;
        {
            std::lock_guard key_lock(key_mutex(key));
            if (!std::filesystem::is_regular_file(csv_path(key))) {
                throw HttpError(409, "merged CSV missing; call /perform_dimensionality_reduction first", {{"key", key}});
            }
            table = import_csv(csv_path(key));
        }
        ColorScale colors;
        if (color_scale_text) {
            nlohmann::json cs;
            try {
                cs = nlohmann::json::parse(*color_scale_text);
            } catch (const nlohmann::json::parse_error&) {
                throw HttpError(400, "colorScale is not valid JSON");
            }
            if (!cs.is_object()) throw HttpError(400, "colorScale must be a JSON object");
            for (const auto& [label, color] : cs.items()) {
                if (!color.is_string()) throw HttpError(400, "colorScale values must be strings", {{"label", label}});
                colors[label] = color.get<std::string>();
            }
        } else {
            colors = default_color_scale(LabelCodec(table.labels).labels());
        }
        const LabelCodec codec(table.labels);
        for (const auto& label : codec.labels()) {
            if (!colors.contains(label)) {
                throw HttpError(422, "colorScale has no color for label \"" + label + "\"", {{"label", label}});
            }
        }
        if (codec.size() < 2) throw HttpError(422, "plots need at least 2 classes", {{"labels", codec.labels()}});

        SurfaceOptions opt = config_.surface;
        opt.threads = config_.threads;
        std::lock_guard images_lock(images_mutex_);
        const SurfaceResult res = surface_pipeline(table, colors, config_.images_dir, opt);
        nlohmann::json paths = nlohmann::json::array();
        nlohmann::json scores = nlohmann::json::array();
        for (std::size_t i = 0; i < res.paths.size(); ++i) {
            paths.push_back("images/" + res.paths[i].filename().string());
            scores.push_back(res.surfaces[i].f_score);
        }
        nlohmann::json out = {{"image_paths", paths}, {"f_scores", scores}};
        if (res.ground_truth_path) out["ground_truth"] = "images/" + res.ground_truth_path->filename().string();
        return out;
    }

    nlohmann::json create_session(const nlohmann::json& body) {
        if (!body.is_object()) throw HttpError(400, "body must be a JSON object");
        const std::string key = body.value("key", "");
        check_key(key);
        const nlohmann::json cfg_json = body.contains("config") ? body.at("config") : body;
        ALConfig cfg = al_config_from_json(cfg_json, config_.session_defaults);
        cfg.threads = config_.threads;
        const bool simulated = body.value("simulated", false);
        const double holdout = body.value("holdout_fraction", config_.holdout_fraction);
        FeatureTable table = load_dataset(config_.data_dir, key, config_.derive_features);
        if (!simulated && cfg.labels.empty()) cfg.labels = LabelCodec(table.labels).labels();
        const std::string id = new_session_id();
        auto entry = std::make_shared<SessionEntry>(
            key, simulated ? ALSession::create_simulated(table, cfg, holdout, id) : ALSession::create(table, cfg, id));
        {
            std::lock_guard lk(entry->mutex);
            persist(*entry);
        }
        {
            std::unique_lock lk(sessions_mutex_);
            sessions_[id] = entry;
        }
        std::lock_guard lk(entry->mutex);
        return {{"session_id", id}, {"status", status_json(*entry)}};
    }

    nlohmann::json next_bag(const std::string& id) {
        auto entry = find_session(id);
        std::lock_guard lk(entry->mutex);
        const auto bag = entry->session.next_bag();
        persist(*entry);
        nlohmann::json features = nlohmann::json::object();
        for (Tid t : bag) features[std::to_string(t)] = entry->session.feature_summary(t);
        return {{"session_id", id},
                {"round", entry->session.round()},
                {"strategy_used", to_string(entry->session.effective_strategy())},
                {"tids", bag},
                {"features", features}};
    }

    nlohmann::json submit_labels(const std::string& id, const nlohmann::json& body) {
        if (!body.is_object()) throw HttpError(400, "body must be a JSON object of tid -> label");
        const nlohmann::json& map = body.contains("labels") && body.at("labels").is_object() ? body.at("labels") : body;
        std::map<Tid, std::string> answers;
        std::vector<std::string> bad_keys;
        for (const auto& [k, v] : map.items()) {
            Tid t = 0;
            if (!detail::parse_integer(k, t) || !v.is_string()) {
                bad_keys.push_back(k);
                continue;
            }
            answers[t] = v.get<std::string>();
        }
        if (!bad_keys.empty()) throw HttpError(422, "keys must be integer tids and values label strings", {{"keys", bad_keys}});
        auto entry = find_session(id);
        std::lock_guard lk(entry->mutex);
        entry->session.submit_labels(answers);
        persist(*entry);
        return status_json(*entry);
    }

    nlohmann::json declare_labels(const std::string& id, const nlohmann::json& body) {
        std::vector<std::string> labels;
        if (body.is_object() && body.contains("label") && body.at("label").is_string()) {
            labels.push_back(body.at("label").get<std::string>());
        } else if (body.is_object() && body.contains("labels") && body.at("labels").is_array()) {
            for (const auto& l : body.at("labels")) {
                if (!l.is_string()) throw HttpError(400, "labels must be strings");
                labels.push_back(l.get<std::string>());
            }
        } else {
            throw HttpError(400, "body must be {\"label\": ...} or {\"labels\": [...]}");
        }
        auto entry = find_session(id);
        std::lock_guard lk(entry->mutex);
        for (const auto& l : labels) entry->session.declare_label(l);
        persist(*entry);
        return status_json(*entry);
    }

    nlohmann::json session_status(const std::string& id) {
        auto entry = find_session(id);
        std::lock_guard lk(entry->mutex);
        return status_json(*entry);
    }

    /// Dataset geometry as a GeoJSON FeatureCollection, one Feature per record.
    nlohmann::ordered_json trajectories_geojson(const std::string& key) {
        check_key(key);
        const auto path = config_.data_dir / (key + ".json");
        if (!std::filesystem::is_regular_file(path)) fail(ErrorKind::not_found, "dataset \"" + key + "\" not found", {{"key", key}});
        const auto doc = detail::parse_json(detail::read_file(path), path.string());
        if (!doc.is_array()) fail(ErrorKind::schema, "dataset must be a JSON array");
        nlohmann::ordered_json features = nlohmann::ordered_json::array();
        for (const auto& el : doc) {
            const auto& line = el.contains("line") ? el.at("line") : el;
            nlohmann::ordered_json f;
            f["type"] = "Feature";
            f["geometry"] = line.contains("geometry") ? line.at("geometry") : nlohmann::ordered_json(nullptr);
            f["properties"] = line.contains("properties") ? line.at("properties") : nlohmann::ordered_json::object();
            features.push_back(std::move(f));
        }
        nlohmann::ordered_json out;
        out["type"] = "FeatureCollection";
        out["features"] = std::move(features);
        return out;
    }

private:
    struct SessionEntry {
        SessionEntry(std::string k, ALSession s) : key(std::move(k)), session(std::move(s)) {}
        std::mutex mutex;
        std::string key;
        ALSession session;
    };

    static nlohmann::json rows_of(const Matrix& m) {
        nlohmann::json out = nlohmann::json::array();
        for (std::size_t i = 0; i < m.rows(); ++i) out.push_back({m(i, 0), m(i, 1)});
        return out;
    }

    static void check_key(const std::string& key) {
        if (!valid_dataset_key(key)) throw HttpError(400, "invalid or missing dataset key", {{"key", key}});
    }

    std::filesystem::path csv_path(const std::string& key) const { return config_.data_dir / (key + ".csv"); }

    std::mutex& key_mutex(const std::string& key) {
        std::lock_guard lk(key_mutexes_guard_);
        auto& slot = key_mutexes_[key];
        if (!slot) slot = std::make_unique<std::mutex>();
        return *slot;
    }

    std::string new_session_id() {
        static thread_local std::mt19937_64 gen{std::random_device{}() ^
                                                 static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
        return std::string("s") + buf + std::to_string(session_counter_++);
    }

    std::filesystem::path session_path(const std::string& id) const { return config_.sessions_dir / (id + ".json"); }

    void persist(const SessionEntry& e) const {
        std::error_code ec;
        std::filesystem::create_directories(config_.sessions_dir, ec);
        nlohmann::json doc = e.session.to_json();
        doc["key"] = e.key;
        const auto path = session_path(e.session.id());
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) fail(ErrorKind::io, "cannot write session state", {{"path", tmp}});
            out << doc.dump(1);
        }
        std::filesystem::rename(tmp, path, ec);
        if (ec) fail(ErrorKind::io, "cannot write session state", {{"path", path.string()}});
    }

    std::shared_ptr<SessionEntry> find_session(const std::string& id) {
        {
            std::shared_lock lk(sessions_mutex_);
            auto it = sessions_.find(id);
            if (it != sessions_.end()) return it->second;
        }
        if (!valid_dataset_key(id) || !std::filesystem::is_regular_file(session_path(id))) {
            fail(ErrorKind::not_found, "unknown session", {{"session_id", id}});
        }
        // Persisted by an earlier process: rebuild from the dataset and replay.
        std::unique_lock lk(sessions_mutex_);
        auto it = sessions_.find(id);
        if (it != sessions_.end()) return it->second;
        const auto doc = nlohmann::json::parse(detail::read_file(session_path(id)));
        const std::string key = doc.at("key").get<std::string>();
        const FeatureTable table = load_dataset(config_.data_dir, key, config_.derive_features);
        auto entry = std::make_shared<SessionEntry>(key, ALSession::restore(table, doc));
        sessions_[id] = entry;
        return entry;
    }

    static nlohmann::json status_json(const SessionEntry& e) {
        const ALSession& s = e.session;
        const SessionStatus st = s.status();
        nlohmann::json history = nlohmann::json::array();
        for (const auto& h : s.history()) {
            history.push_back({{"round", h.round},
                               {"queried", h.queried},
                               {"labels", h.labels},
                               {"holdout_f1", h.holdout_f1 ? nlohmann::json(*h.holdout_f1) : nlohmann::json(nullptr)}});
        }
        return {{"session_id", s.id()},
                {"key", e.key},
                {"round", st.round},
                {"labeled_count", st.labeled_count},
                {"pending_count", st.pending_count},
                {"pool_size", st.pool_size},
                {"budget", st.budget},
                {"remaining", st.remaining},
                {"complete", st.complete},
                {"simulated", s.simulated()},
                {"label_counts", st.label_counts},
                {"pending", s.pending()},
                {"config", to_json(s.config())},
                {"history", history}};
    }

    static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void send_error(httplib::Response& res, int status, const std::string& message, nlohmann::json detail) {
        if (!detail.is_object()) detail = nlohmann::json{{"value", detail}};
        send_json(res, status, {{"error", message}, {"detail", detail}});
    }

    template <typename Fn>
    static void guarded(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const HttpError& e) {
            send_error(res, e.status, e.what(), e.detail);
        } catch (const Error& e) {
            nlohmann::json d = e.detail().is_object() ? e.detail() : nlohmann::json::object();
            d["kind"] = to_string(e.kind());
            send_error(res, http_status(e.kind()), e.what(), d);
        } catch (const std::exception& e) {
            send_error(res, 500, e.what(), nlohmann::json::object());
        }
    }

    static nlohmann::json parse_body(const httplib::Request& req) {
        try {
            return req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error& e) {
            throw HttpError(400, "request body is not valid JSON", {{"byte", e.byte}});
        }
    }

    void serve_file(const std::filesystem::path& root, const std::string& rel, httplib::Response& res) {
        if (!safe_relative_path(rel)) throw HttpError(400, "invalid path", {{"path", rel}});
        const auto path = root / rel;
        if (!std::filesystem::is_regular_file(path)) throw HttpError(404, "not found", {{"path", rel}});
        std::ifstream in(path, std::ios::binary);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        res.status = 200;
        res.set_content(std::move(body), mime_type(path).c_str());
    }

    void routes() {
        server_.Get("/perform_dimensionality_reduction", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, reduction(req.get_param_value("key"))); });
        });
        server_.Get("/getPlots", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::optional<std::string> cs;
                if (req.has_param("colorScale")) cs = req.get_param_value("colorScale");
                send_json(res, 200, plots(req.get_param_value("key"), cs));
            });
        });
        server_.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 201, create_session(parse_body(req))); });
        });
        server_.Get(R"(/session/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, next_bag(req.matches[1])); });
        });
        server_.Post(R"(/session/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, submit_labels(req.matches[1], parse_body(req))); });
        });
        server_.Post(R"(/session/([^/]+)/declare)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, declare_labels(req.matches[1], parse_body(req))); });
        });
        server_.Get(R"(/session/([^/]+)/status)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, session_status(req.matches[1])); });
        });
        server_.Get(R"(/data/([^/]+)/trajectories)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                res.status = 200;
                res.set_content(trajectories_geojson(req.matches[1]).dump(), "application/geo+json");
            });
        });
        server_.Get(R"(/images/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { serve_file(config_.images_dir, req.matches[1], res); });
        });
        server_.Get("/ui", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
        server_.Get(R"(/ui/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::string rel = req.matches[1];
                if (rel.empty()) rel = "index.html";
                serve_file(config_.ui_dir, rel, res);
            });
        });
        server_.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
    }

    ServiceConfig config_;
    httplib::Server server_;
    int bound_port_ = -1;

    std::mutex key_mutexes_guard_;
    std::map<std::string, std::unique_ptr<std::mutex>> key_mutexes_;
    std::mutex images_mutex_;

    std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
    std::atomic<std::uint64_t> session_counter_{0};
};

} // namespace trajal
